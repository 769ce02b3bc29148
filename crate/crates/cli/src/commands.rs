use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cmchain_core::dynamics::{evolve_with, time_in_ns};
use cmchain_core::experiments::{fidelity_plateau, run_sweep, Preset, SweepOptions};
use cmchain_core::io::config::{Angle, RawConfig, RunConfig};
use cmchain_core::io::csv::{
    emit_gap_csv, emit_profile_csv, emit_snapshots_csv, emit_spectrum_csv, emit_sweep_csv,
};
use cmchain_core::io::manifest::{verify_manifest, FileStatus, RunManifest};
use cmchain_core::io::plot::{emit_plots, PlotInputs};
use cmchain_core::spectral::{analytic_zero_mode, eigendecompose, localization_profile, scan_spectrum, uniform_grid};
use cmchain_core::{Error, Result};
use serde::Serialize;

use crate::args::Common;

pub fn load_config(common: &Common, preset: Option<&str>) -> Result<RunConfig> {
    let file = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            RawConfig::from_toml(&text)?
        }
        None => RawConfig::default(),
    };
    let mut flags = common.as_overrides();
    if let Some(p) = preset {
        flags.preset = Some(p.to_string());
    }
    file.merge(flags).resolve()
}

/// Collects output files and writes the manifest once everything succeeded.
struct Outputs {
    dir: PathBuf,
    manifest: RunManifest,
    clock: Instant,
}

impl Outputs {
    fn new(command: &str, cfg: &impl Serialize, dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            manifest: RunManifest::new(command, cfg)?,
            clock: Instant::now(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, path: &Path) -> Result<()> {
        self.manifest.record(&self.dir, path)
    }

    fn finish(mut self) -> Result<()> {
        self.manifest.wall_time_s = self.clock.elapsed().as_secs_f64();
        let path = self.manifest.write(&self.dir)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn spectrum_outputs(cfg: &RunConfig, out: &mut Outputs, plots: &mut Vec<PathBuf>) -> Result<()> {
    let grid = uniform_grid(0.0, 2.0 * std::f64::consts::PI, cfg.theta_points);
    let scan = scan_spectrum(&cfg.chain, &grid)?;
    let csv = out.path("spectrum.csv");
    emit_spectrum_csv(&scan, &csv)?;
    out.record(&csv)?;
    println!(
        "spectrum: {} theta points x {} levels; gap level min distance to bands {:.6e}",
        scan.len(),
        cfg.chain.dim(),
        scan.min_band_distance()
    );
    if cfg.plots {
        plots.extend(emit_plots(&PlotInputs { spectrum: Some(&scan), ..Default::default() }, &out.dir)?);
    }
    Ok(())
}

pub fn spectrum(cfg: &RunConfig) -> Result<()> {
    let mut out = Outputs::new("spectrum", cfg, &cfg.output_dir)?;
    let mut plots = Vec::new();
    spectrum_outputs(cfg, &mut out, &mut plots)?;
    record_all(&mut out, &plots)?;
    out.finish()
}

fn record_all(out: &mut Outputs, paths: &[PathBuf]) -> Result<()> {
    for p in paths {
        out.record(p)?;
    }
    Ok(())
}

pub fn edge_state(cfg: &RunConfig, theta: &str) -> Result<()> {
    let theta = match theta.parse::<f64>() {
        Ok(x) => x,
        Err(_) => Angle::Expr(theta.to_string()).radians("theta")?,
    };
    let mut out = Outputs::new("edge-state", &(cfg, theta), &cfg.output_dir)?;
    let eig = eigendecompose(&cfg.chain.build_hamiltonian(theta))?;
    let n = cfg.chain.n_cells();
    let numeric = eig.state(n);
    let profile = localization_profile(&numeric)?;
    let analytic = analytic_zero_mode(&cfg.chain, theta);
    let analytic_p: Vec<f64> = analytic.amplitudes.iter().map(|a| a * a).collect();
    let overlap = cmchain_core::fidelity(&analytic.state(), &numeric)?;
    println!("theta = {theta}  gap level E = {:.6e}", eig.energies[n]);
    println!(
        "edge weight left = {:.6}  right = {:.6}  ipr = {:.6}",
        profile.edge_weight_left, profile.edge_weight_right, profile.ipr
    );
    if cfg.chain.j_hop() == 0.0 {
        println!("overlap with analytic zero mode = {overlap:.12}");
    } else {
        println!("J != 0: analytic zero mode shown for reference only (overlap {overlap:.6})");
    }
    if let Some(note) = &analytic.note {
        println!("note: {note}");
    }
    let csv = out.path("profile.csv");
    emit_profile_csv(&profile.probabilities, Some(&analytic_p), &csv)?;
    out.record(&csv)?;
    if cfg.plots {
        let inputs = PlotInputs {
            profile: Some((&profile.probabilities, Some(&analytic_p))),
            ..Default::default()
        };
        let plots = emit_plots(&inputs, &out.dir)?;
        record_all(&mut out, &plots)?;
    }
    out.finish()
}

fn evolve_outputs(cfg: &RunConfig, out: &mut Outputs, plots: &mut Vec<PathBuf>) -> Result<()> {
    let spec = &cfg.chain;
    let initial = cfg.sweep.initial.resolve(spec)?;
    let target = cfg.sweep.target.resolve(spec)?;
    let result = evolve_with(spec, &cfg.protocol, &initial, &target, cfg.snapshot_count, &cfg.integrator)?;
    let t_final = cfg.protocol.t_final();
    println!(
        "evolve: {} -> {}  omega = {:e}  t_final = {t_final:.6} (= {:.3} ns at g0'/2pi = 2 GHz)",
        cfg.sweep.initial,
        cfg.sweep.target,
        cfg.protocol.omega(),
        time_in_ns(t_final, 2.0)
    );
    println!(
        "fidelity = {:.9}  norm drift = {:.3e}  steps = {}",
        result.fidelity, result.norm_drift, result.steps
    );
    let summary = out.path("evolve.json");
    let body = serde_json::json!({
        "fidelity": result.fidelity,
        "norm_drift": result.norm_drift,
        "steps": result.steps,
        "error_estimate": result.error_estimate,
        "t_final": t_final,
        "final_probabilities": result.final_state.probabilities(),
    });
    fs::write(&summary, format!("{:#}\n", body)).map_err(|e| Error::io(&summary, e))?;
    out.record(&summary)?;
    if let Some(snaps) = &result.snapshots {
        let csv = out.path("populations.csv");
        emit_snapshots_csv(snaps, &csv)?;
        out.record(&csv)?;
        if cfg.plots {
            let init_site = initial.probabilities().iter().position(|&p| p == 1.0);
            let tgt_site = target.probabilities().iter().position(|&p| p == 1.0);
            let mut sites: Vec<usize> = init_site.into_iter().chain(tgt_site).collect();
            sites.dedup();
            if sites.is_empty() {
                sites = vec![0, spec.dim() - 1];
            }
            let inputs = PlotInputs {
                populations: Some((snaps, &sites)),
                ..Default::default()
            };
            plots.extend(emit_plots(&inputs, &out.dir)?);
        }
    }
    Ok(())
}

pub fn evolve_cmd(cfg: &RunConfig) -> Result<()> {
    let mut out = Outputs::new("evolve", cfg, &cfg.output_dir)?;
    let mut plots = Vec::new();
    evolve_outputs(cfg, &mut out, &mut plots)?;
    record_all(&mut out, &plots)?;
    out.finish()
}

fn sweep_outputs(cfg: &RunConfig, out: &mut Outputs, plots: &mut Vec<PathBuf>) -> Result<()> {
    let opts = SweepOptions {
        workers: cfg.workers,
        integrator: cfg.integrator,
    };
    let result = run_sweep(&cfg.sweep, &opts)?;
    if !result.rows.is_empty() {
        let csv = out.path("sweep.csv");
        emit_sweep_csv(&result.rows, cfg.timing, &csv)?;
        out.record(&csv)?;
        let (level, _) = cfg.preset.reference_lines();
        for &j in &cfg.sweep.j_values {
            let curve = result.curve(j);
            let best = curve.iter().map(|r| r.fidelity).fold(0.0, f64::max);
            match level.and_then(|l| fidelity_plateau(&curve, l).map(|p| (l, p))) {
                Some((l, (lo, hi))) => println!(
                    "J = {j}: max F = {best:.6}; F >= {l} for log10(omega) in [{:.3}, {:.3}]",
                    lo.log10(),
                    hi.log10()
                ),
                None => println!("J = {j}: max F = {best:.6}"),
            }
        }
    }
    if !result.gaps.is_empty() {
        let csv = out.path("gap.csv");
        emit_gap_csv(&result.gaps, &csv)?;
        out.record(&csv)?;
        for g in &result.gaps {
            println!("N = {}: gap = {:.6e}", g.n_cells, g.gap_width);
        }
    }
    if cfg.plots {
        let inputs = PlotInputs {
            sweep: Some((&result, cfg.preset)),
            ..Default::default()
        };
        plots.extend(emit_plots(&inputs, &out.dir)?);
    }
    Ok(())
}

pub fn sweep(cfg: &RunConfig) -> Result<()> {
    let mut out = Outputs::new("sweep", cfg, &cfg.output_dir)?;
    let mut plots = Vec::new();
    sweep_outputs(cfg, &mut out, &mut plots)?;
    record_all(&mut out, &plots)?;
    out.finish()
}

pub fn preset(cfg: &RunConfig) -> Result<()> {
    let mut out = Outputs::new(&format!("preset {}", cfg.preset), cfg, &cfg.output_dir)?;
    let mut plots = Vec::new();
    if cfg.preset != Preset::GapVsLength {
        spectrum_outputs(cfg, &mut out, &mut plots)?;
    }
    sweep_outputs(cfg, &mut out, &mut plots)?;
    if cfg.preset != Preset::GapVsLength {
        evolve_outputs(cfg, &mut out, &mut plots)?;
    }
    record_all(&mut out, &plots)?;
    out.finish()
}

/// Returns whether every file matched.
pub fn verify(path: &Path) -> Result<bool> {
    let report = verify_manifest(path)?;
    for (file, status) in &report.entries {
        match status {
            FileStatus::Ok => println!("ok        {}", file.display()),
            FileStatus::Missing => println!("MISSING   {}", file.display()),
            FileStatus::Mismatch { expected, actual } => {
                println!("MISMATCH  {} (expected {expected}, got {actual})", file.display())
            }
        }
    }
    Ok(report.all_ok())
}
