use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use cmchain_core::io::config::{Angle, RawConfig};

#[derive(Debug, Parser)]
#[command(name = "cmchain", version, about = "Topological state transfer in a cavity-magnon chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectrum and gap state over theta in [0, 2pi].
    Spectrum(Common),
    /// Numeric gap state at one theta, beside the analytic zero mode.
    EdgeState {
        #[command(flatten)]
        common: Common,
        /// Pump parameter (radians, or e.g. "pi/4").
        #[arg(long, default_value = "pi/4")]
        theta: String,
    },
    /// One adiabatic ramp with population snapshots.
    Evolve(Common),
    /// Fidelity versus ramp rate (or gap versus length for GapVsLength).
    Sweep(Common),
    /// Run every output of a named preset: spectrum, sweep and a sample ramp.
    Preset {
        /// PhotonJ0, PhotonJ, Magnonic, MagnonToPhoton, GapVsLength, Custom.
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Re-hash the files listed in a run manifest.
    Verify {
        /// Manifest file or the output directory containing manifest.json.
        path: PathBuf,
    },
}

/// Configuration file plus flag overrides; flags take precedence.
#[derive(Debug, Args, Default)]
pub struct Common {
    /// TOML key-value configuration file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub n_cells: Option<usize>,
    #[arg(long)]
    pub g0: Option<f64>,
    #[arg(long)]
    pub g0_prime: Option<f64>,
    /// Cavity-cavity coupling J.
    #[arg(long = "j", alias = "j-hop")]
    pub j_hop: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub detuning: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_start: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_end: Option<String>,
    #[arg(long)]
    pub omega_min: Option<f64>,
    #[arg(long)]
    pub omega_max: Option<f64>,
    #[arg(long)]
    pub omega_points: Option<usize>,
    #[arg(long)]
    pub theta_points: Option<usize>,
    /// a<k>, m<k>, last-cavity, last-magnon or gap-state.
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub snapshots: Option<usize>,
    /// Output directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_plots: bool,
    /// Sweep worker threads (default: CMCHAIN_WORKERS or all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Omit the wall-time column so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
    /// Integrator error budget per unit of simulated time (default 1e-8).
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Step-halving attempts before giving up (default 12).
    #[arg(long)]
    pub max_refinements: Option<u32>,
}

fn angle(s: &Option<String>) -> Option<Angle> {
    s.as_ref().map(|s| match s.parse::<f64>() {
        Ok(x) => Angle::Radians(x),
        Err(_) => Angle::Expr(s.clone()),
    })
}

impl Common {
    pub fn as_overrides(&self) -> RawConfig {
        RawConfig {
            preset: self.preset.clone(),
            n_cells: self.n_cells,
            g0: self.g0,
            g0_prime: self.g0_prime,
            j_hop: self.j_hop,
            detuning: self.detuning,
            omega: self.omega,
            theta_start: angle(&self.theta_start),
            theta_end: angle(&self.theta_end),
            omega_min: self.omega_min,
            omega_max: self.omega_max,
            omega_points: self.omega_points,
            theta_points: self.theta_points,
            initial: self.initial.clone(),
            target: self.target.clone(),
            snapshot_count: self.snapshots,
            output_dir: self.out.clone(),
            plots: self.no_plots.then_some(false),
            workers: self.workers,
            timing: self.no_timing.then_some(false),
            tolerance: self.tolerance,
            max_refinements: self.max_refinements,
            ..Default::default()
        }
    }
}
