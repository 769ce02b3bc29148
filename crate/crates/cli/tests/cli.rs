use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cmchain(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmchain"))
        .args(args)
        .current_dir(cwd)
        .env_remove("CMCHAIN_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn spectrum_writes_csv_plot_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = cmchain(&["spectrum", "--theta-points", "21", "-o", "run"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let run = dir.path().join("run");
    let csv = fs::read_to_string(run.join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("theta,level_index,energy"));
    assert_eq!(csv.lines().count(), 1 + 21 * 21);
    assert!(run.join("spectrum.svg").exists());
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["tool"], "cmchain");
    assert_eq!(manifest["files"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["config"]["chain"]["n_cells"], 10);
}

#[test]
fn verify_reports_tampering_with_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = cmchain(&["edge-state", "--theta", "pi/4", "--no-plots", "-o", "run"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("overlap with analytic zero mode = 1.0000000"));
    let ok = cmchain(&["verify", "run"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("ok        profile.csv"));
    fs::write(dir.path().join("run/profile.csv"), "changed\n").unwrap();
    let bad = cmchain(&["verify", "run/manifest.json"], dir.path());
    assert_eq!(bad.status.code(), Some(4));
    assert!(stdout(&bad).contains("MISMATCH  profile.csv"));
}

#[test]
fn invalid_physics_exits_two_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let o = cmchain(&["evolve", "--omega", "-1", "-o", "run"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("omega must be positive"));
    assert!(!dir.path().join("run").exists());

    fs::write(dir.path().join("bad.toml"), "preset = \"PhotonJ0\"\nbogus = 1\n").unwrap();
    let o = cmchain(&["spectrum", "-c", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = cmchain(&["preset", "Nonexistent"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exhausted_step_refinement_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = cmchain(&["evolve", "--tolerance", "1e-16", "--max-refinements", "1", "-o", "run"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("integration failed"));
    assert!(!dir.path().join("run/manifest.json").exists());
}

#[test]
fn missing_config_file_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = cmchain(&["spectrum", "-c", "absent.toml"], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "preset = \"PhotonJ0\"\nn_cells = 3\nomega = 0.5\nsnapshot_count = 5\n",
    )
    .unwrap();
    let o = cmchain(&["evolve", "-c", "run.toml", "--omega", "0.05", "--no-plots", "-o", "run"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("run/evolve.json")).unwrap()).unwrap();
    let t_final = summary["t_final"].as_f64().unwrap();
    assert!((t_final - std::f64::consts::PI / 0.05).abs() < 1e-9);
    assert_eq!(summary["final_probabilities"].as_array().unwrap().len(), 7);
    let pops = fs::read_to_string(dir.path().join("run/populations.csv")).unwrap();
    assert_eq!(pops.lines().next(), Some("t,theta,a1,m1,a2,m2,a3,m3,a4"));
    assert_eq!(pops.lines().count(), 6);
}

#[test]
fn sweeps_without_timing_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec!["sweep", "--n-cells", "4", "--omega-min", "0.01", "--omega-max", "0.1", "--omega-points", "4", "--no-timing", "--no-plots", "-o", out]
    };
    let a = cmchain(&args("a"), dir.path());
    let mut b_args = args("b");
    b_args.extend(["--workers", "2"]);
    let b = cmchain(&b_args, dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    let ca = fs::read(dir.path().join("a/sweep.csv")).unwrap();
    let cb = fs::read(dir.path().join("b/sweep.csv")).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(String::from_utf8(ca).unwrap().lines().count(), 5);
}

#[test]
fn gap_preset_writes_gap_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = cmchain(&["preset", "GapVsLength", "--theta-points", "51", "-o", "run"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let gap = fs::read_to_string(dir.path().join("run/gap.csv")).unwrap();
    assert_eq!(gap.lines().next(), Some("n_cells,g0,g0_prime,j_hop,gap_width"));
    assert_eq!(gap.lines().count(), 8);
    assert!(dir.path().join("run/gap.svg").exists());
    assert_eq!(cmchain(&["verify", "run"], dir.path()).status.code(), Some(0));
}
