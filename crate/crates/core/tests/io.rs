use std::f64::consts::PI;
use std::fs;

use cmchain_core::experiments::{Preset, SweepResult, SweepRow};
use cmchain_core::io::csv::{
    emit_spectrum_csv, fmt_f64, parse_spectrum_csv, read_spectrum_csv, spectrum_csv, sweep_csv, SPECTRUM_HEADER,
};
use cmchain_core::io::plot::{fidelity_plot, spectrum_plot};
use cmchain_core::io::{emit_plots, parse_config, verify_manifest, PlotInputs, RunManifest};
use cmchain_core::spectral::uniform_grid;
use cmchain_core::{scan_spectrum, ChainSpec, Error};
use proptest::prelude::*;

fn magnonic_rows() -> Vec<SweepRow> {
    [1e-4, 1e-3, 1e-2]
        .iter()
        .map(|&omega| SweepRow {
            preset: Preset::Magnonic,
            n_cells: 2,
            g0: 1.0,
            g0_prime: 1.0,
            j_hop: 8.0,
            omega,
            fidelity: 0.95,
            norm_drift: 1e-9,
            wall_time: 0.1,
        })
        .collect()
}

#[test]
fn spectrum_csv_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.csv");
    let spec = ChainSpec::new(4, 1.3, 1.0, 0.125).unwrap();
    let scan = scan_spectrum(&spec, &uniform_grid(0.0, 2.0 * PI, 37)).unwrap();
    emit_spectrum_csv(&scan, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(SPECTRUM_HEADER));
    assert!(!text.contains('\r'));
    let records = read_spectrum_csv(&path).unwrap();
    assert_eq!(records.len(), 37 * 9);
    for r in &records {
        let k = scan.thetas.iter().position(|t| t.to_bits() == r.theta.to_bits()).unwrap();
        assert_eq!(r.energy.to_bits(), scan.energies[k][r.level_index].to_bits());
    }
}

#[test]
fn zero_mode_rows_are_zero_without_hopping() {
    let scan = scan_spectrum(&ChainSpec::default(), &uniform_grid(0.0, 2.0 * PI, 201)).unwrap();
    let records = parse_spectrum_csv(&spectrum_csv(&scan).unwrap()).unwrap();
    let mid: Vec<_> = records.iter().filter(|r| r.level_index == 10).collect();
    assert_eq!(mid.len(), 201);
    assert!(mid.iter().all(|r| r.energy.abs() < 1e-10));
}

#[test]
fn unwritable_path_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let scan = scan_spectrum(&ChainSpec::default(), &[0.0]).unwrap();
    let blocker = dir.path().join("not-a-dir");
    fs::write(&blocker, "").unwrap();
    let err = emit_spectrum_csv(&scan, &blocker.join("spectrum.csv")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn spectrum_plot_draws_every_branch() {
    let scan = scan_spectrum(&ChainSpec::default(), &uniform_grid(0.0, 2.0 * PI, 201)).unwrap();
    let svg = spectrum_plot(&scan).render().unwrap();
    assert_eq!(svg.matches(r#"class="series""#).count(), 21);
}

#[test]
fn magnonic_fidelity_plot_marks_threshold() {
    let rows = magnonic_rows();
    let (level, threshold) = Preset::Magnonic.reference_lines();
    assert_eq!(threshold, Some(-2.3));
    let svg = fidelity_plot("Magnonic", &rows, threshold, level).render().unwrap();
    assert!(svg.contains("log10 Ω = -2.3"));
    assert!(svg.contains(r#"class="marker""#));
}

#[test]
fn plots_write_files_and_leave_data_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let scan = scan_spectrum(&ChainSpec::default(), &uniform_grid(0.0, PI, 11)).unwrap();
    let csv_path = dir.path().join("spectrum.csv");
    emit_spectrum_csv(&scan, &csv_path).unwrap();
    let before = fs::read(&csv_path).unwrap();
    let sweep = SweepResult {
        rows: magnonic_rows(),
        gaps: Vec::new(),
    };
    let inputs = PlotInputs {
        spectrum: Some(&scan),
        sweep: Some((&sweep, Preset::Magnonic)),
        ..Default::default()
    };
    let written = emit_plots(&inputs, dir.path()).unwrap();
    let names: Vec<_> = written.iter().map(|p| p.file_name().unwrap().to_str().unwrap()).collect();
    assert_eq!(names, ["spectrum.svg", "fidelity.svg"]);
    assert_eq!(fs::read(&csv_path).unwrap(), before);
}

#[test]
fn empty_sweep_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = SweepResult::default();
    let inputs = PlotInputs {
        sweep: Some((&sweep, Preset::PhotonJ0)),
        ..Default::default()
    };
    let err = emit_plots(&inputs, dir.path()).unwrap_err();
    assert!(matches!(err, Error::EmptyInput(_)));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn sweep_csv_timing_column_is_optional() {
    let rows = magnonic_rows();
    let with = sweep_csv(&rows, true).unwrap();
    let without = sweep_csv(&rows, false).unwrap();
    assert!(with.lines().next().unwrap().ends_with(",wall_time"));
    assert!(!without.contains("wall_time"));
    assert_eq!(without.lines().count(), 4);
}

#[test]
fn manifest_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config("preset = \"PhotonJ0\"\n").unwrap();
    let file = dir.path().join("spectrum.csv");
    fs::write(&file, "theta,level_index,energy\n").unwrap();
    let mut m = RunManifest::new("spectrum", &cfg).unwrap();
    m.record(dir.path(), &file).unwrap();
    m.write(dir.path()).unwrap();
    assert!(verify_manifest(dir.path()).unwrap().all_ok());
    fs::write(&file, "tampered\n").unwrap();
    assert!(!verify_manifest(dir.path()).unwrap().all_ok());
}

#[test]
fn config_errors_map_to_exit_code_two() {
    let err = parse_config("preset = \"PhotonJ0\"\nomega = -1\n").unwrap_err();
    assert!(err.to_string().contains("omega must be positive"), "{err}");
    assert_eq!(err.exit_code(), 2);
    let err = parse_config("preset = \"PhotonJ0\"\n[oops\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    let cfg = parse_config("preset = \"PhotonJ0\"\nj_hop = 0.125\n").unwrap();
    assert_eq!(cfg.chain.j_hop(), 0.125);
}

proptest! {
    #[test]
    fn seventeen_digits_are_lossless(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = fmt_f64(x);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
