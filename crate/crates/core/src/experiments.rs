//! Named parameter presets and the fidelity sweep driver.
//!
//! Every sweep point is an independent ramp integration. Points run on a
//! bounded rayon pool and results are assembled in input order, so output is
//! identical for any worker count.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_with, IntegratorOptions, RampProtocol};
use crate::error::{Error, Result};
use crate::model::{ChainSpec, SiteIndex};
use crate::spectral::{eigendecompose, gap_width, uniform_grid, validate_grid};
use crate::state::StateVector;

/// Environment variable holding the sweep worker-pool size.
pub const WORKERS_ENV: &str = "CMCHAIN_WORKERS";

pub const DEFAULT_OMEGA_MIN: f64 = 1e-4;
pub const DEFAULT_OMEGA_MAX: f64 = 1e-1;
pub const DEFAULT_OMEGA_POINTS: usize = 41;
pub const DEFAULT_THETA_POINTS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Photonic edge-to-edge transfer through the zero mode, L = 21, J = 0.
    PhotonJ0,
    /// Photonic transfer through the gap state for several cavity-cavity couplings.
    PhotonJ,
    /// Magnon-to-magnon transfer, L = 5, J = 8.
    Magnonic,
    /// Magnon-to-photon transfer, L = 5, g0 = 16, J = 8.
    MagnonToPhoton,
    /// Gap between the gap state and the lower band versus chain length.
    GapVsLength,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::PhotonJ0,
        Preset::PhotonJ,
        Preset::Magnonic,
        Preset::MagnonToPhoton,
        Preset::GapVsLength,
        Preset::Custom,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::PhotonJ0 => "PhotonJ0",
            Preset::PhotonJ => "PhotonJ",
            Preset::Magnonic => "Magnonic",
            Preset::MagnonToPhoton => "MagnonToPhoton",
            Preset::GapVsLength => "GapVsLength",
            Preset::Custom => "Custom",
        }
    }

    /// Default chain for the preset.
    pub fn chain(&self) -> ChainSpec {
        let make = |n, g0, j| ChainSpec::new(n, g0, 1.0, j).expect("preset chain is valid");
        match self {
            Preset::PhotonJ0 | Preset::Custom => make(10, 1.0, 0.0),
            Preset::PhotonJ => make(10, 1.0, 0.125),
            Preset::Magnonic | Preset::GapVsLength => make(2, 1.0, 8.0),
            Preset::MagnonToPhoton => make(2, 16.0, 8.0),
        }
    }

    pub fn j_values(&self) -> Vec<f64> {
        match self {
            Preset::PhotonJ => vec![0.125, 0.2, 0.3, 0.4, 0.5],
            _ => vec![self.chain().j_hop()],
        }
    }

    pub fn initial(&self) -> StateChoice {
        match self {
            Preset::Magnonic | Preset::MagnonToPhoton => StateChoice::Site(SiteIndex::magnon(1)),
            _ => StateChoice::Site(SiteIndex::cavity(1)),
        }
    }

    pub fn target(&self) -> StateChoice {
        match self {
            Preset::Magnonic => StateChoice::LastMagnon,
            _ => StateChoice::LastCavity,
        }
    }

    /// Fidelity level the preset is judged against, with the log10(omega)
    /// threshold to mark on plots where one applies.
    pub fn reference_lines(&self) -> (Option<f64>, Option<f64>) {
        match self {
            Preset::PhotonJ0 | Preset::PhotonJ => (Some(0.99), Some(-2.5)),
            Preset::Magnonic => (Some(0.99), Some(-2.3)),
            Preset::MagnonToPhoton => (Some(0.90), Some(-3.0)),
            _ => (None, None),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::validation(
                    "preset",
                    format!(
                        "unknown preset `{s}` (expected one of {})",
                        Preset::ALL.map(|p| p.name()).join(", ")
                    ),
                )
            })
    }
}

/// How an initial or target state is chosen for a given chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StateChoice {
    Site(SiteIndex),
    /// Cavity `a(N+1)`.
    LastCavity,
    /// Magnon `mN`.
    LastMagnon,
    /// Numeric mid-gap eigenvector at the given pump parameter.
    GapState { theta: f64 },
}

impl StateChoice {
    pub fn resolve(&self, spec: &ChainSpec) -> Result<StateVector> {
        match *self {
            StateChoice::Site(site) => spec.basis_state(site),
            StateChoice::LastCavity => spec.basis_state(SiteIndex::cavity(spec.n_cells() + 1)),
            StateChoice::LastMagnon => spec.basis_state(SiteIndex::magnon(spec.n_cells())),
            StateChoice::GapState { theta } => {
                Ok(eigendecompose(&spec.build_hamiltonian(theta))?.state(spec.n_cells()))
            }
        }
    }

    /// Parses `a1`, `m2`, `last-cavity`, `last-magnon`, or `gap-state`;
    /// `gap_theta` is used for the latter.
    pub fn parse(s: &str, gap_theta: f64) -> Result<Self> {
        match s.trim() {
            "last-cavity" | "right-edge" => Ok(StateChoice::LastCavity),
            "last-magnon" => Ok(StateChoice::LastMagnon),
            "gap-state" => Ok(StateChoice::GapState { theta: gap_theta }),
            other => Ok(StateChoice::Site(other.parse()?)),
        }
    }
}

impl fmt::Display for StateChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateChoice::Site(s) => write!(f, "{s}"),
            StateChoice::LastCavity => f.write_str("last-cavity"),
            StateChoice::LastMagnon => f.write_str("last-magnon"),
            StateChoice::GapState { theta } => write!(f, "gap-state@{theta}"),
        }
    }
}

/// Optional replacements for the preset chain's parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainOverrides {
    pub n_cells: Option<usize>,
    pub g0: Option<f64>,
    pub g0_prime: Option<f64>,
    pub j_hop: Option<f64>,
    pub detuning: Option<f64>,
}

impl ChainOverrides {
    pub fn apply(&self, base: &ChainSpec) -> Result<ChainSpec> {
        ChainSpec::new(
            self.n_cells.unwrap_or(base.n_cells()),
            self.g0.unwrap_or(base.g0()),
            self.g0_prime.unwrap_or(base.g0_prime()),
            self.j_hop.unwrap_or(base.j_hop()),
        )?
        .with_detuning(self.detuning.unwrap_or(base.detuning()))
    }
}

/// `points` values evenly spaced in log10 between `min` and `max`.
pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    uniform_grid(min.log10(), max.log10(), points)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect()
}

pub fn default_omega_grid() -> Vec<f64> {
    log_grid(DEFAULT_OMEGA_MIN, DEFAULT_OMEGA_MAX, DEFAULT_OMEGA_POINTS)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub preset: Preset,
    pub chain: ChainSpec,
    pub omega_grid: Vec<f64>,
    /// One fidelity curve per value; replaces the chain's `J`.
    pub j_values: Vec<f64>,
    pub initial: StateChoice,
    pub target: StateChoice,
    /// Chain lengths for [`Preset::GapVsLength`].
    pub lengths: Vec<usize>,
    pub theta_grid: Vec<f64>,
}

impl SweepSpec {
    pub fn for_preset(preset: Preset, overrides: &ChainOverrides) -> Result<Self> {
        let chain = overrides.apply(&preset.chain())?;
        let j_values = match overrides.j_hop {
            Some(j) => vec![j],
            None => preset.j_values(),
        };
        let lengths = match (preset, overrides.n_cells) {
            (Preset::GapVsLength, None) => (2..=8).collect(),
            _ => vec![chain.n_cells()],
        };
        Ok(SweepSpec {
            preset,
            chain,
            omega_grid: default_omega_grid(),
            j_values,
            initial: preset.initial(),
            target: preset.target(),
            lengths,
            theta_grid: uniform_grid(0.0, 2.0 * PI, DEFAULT_THETA_POINTS),
        })
    }

    pub fn validate(&self) -> Result<()> {
        validate_grid(&self.omega_grid, "omega_grid")?;
        if self.omega_grid[0] <= 0.0 {
            return Err(Error::validation("omega_grid", "omega must be positive"));
        }
        if self.j_values.is_empty() {
            return Err(Error::EmptyInput("j_values".into()));
        }
        if self.j_values.iter().any(|j| !(j.is_finite() && *j >= 0.0)) {
            return Err(Error::validation("j_values", "must be nonnegative"));
        }
        if self.preset == Preset::GapVsLength {
            if self.lengths.is_empty() {
                return Err(Error::EmptyInput("lengths".into()));
            }
            if self.lengths.contains(&0) {
                return Err(Error::validation("lengths", "must be at least 1"));
            }
            validate_grid(&self.theta_grid, "theta_grid")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub preset: Preset,
    pub n_cells: usize,
    pub g0: f64,
    pub g0_prime: f64,
    pub j_hop: f64,
    pub omega: f64,
    pub fidelity: f64,
    pub norm_drift: f64,
    /// Seconds spent on this point; excluded from determinism comparisons.
    pub wall_time: f64,
}

impl SweepRow {
    /// Every column except `wall_time`.
    pub fn same_physics(&self, other: &SweepRow) -> bool {
        let bits = |r: &SweepRow| {
            (
                r.preset,
                r.n_cells,
                r.g0.to_bits(),
                r.g0_prime.to_bits(),
                r.j_hop.to_bits(),
                r.omega.to_bits(),
                r.fidelity.to_bits(),
                r.norm_drift.to_bits(),
            )
        };
        bits(self) == bits(other)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub n_cells: usize,
    pub g0: f64,
    pub g0_prime: f64,
    pub j_hop: f64,
    pub gap_width: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub gaps: Vec<GapRow>,
}

impl SweepResult {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() && self.gaps.is_empty()
    }

    /// Rows for one cavity-cavity coupling, ordered by omega.
    pub fn curve(&self, j_hop: f64) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.j_hop == j_hop).collect()
    }

    pub fn same_physics(&self, other: &SweepResult) -> bool {
        self.gaps == other.gaps
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| a.same_physics(b))
    }
}

/// Longest contiguous run of rows with `fidelity >= threshold`, as the
/// `(min, max)` omega of that run. Rows are assumed ordered by omega.
pub fn fidelity_plateau(rows: &[&SweepRow], threshold: f64) -> Option<(f64, f64)> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, r) in rows.iter().enumerate() {
        if r.fidelity >= threshold {
            let s = *start.get_or_insert(i);
            if best.is_none_or(|(bs, be)| i - s > be - bs) {
                best = Some((s, i));
            }
        } else {
            start = None;
        }
    }
    best.map(|(s, e)| (rows[s].omega, rows[e].omega))
}

/// Worker-pool settings for sweeps.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepOptions {
    /// `None` reads [`WORKERS_ENV`], falling back to rayon's default.
    pub workers: Option<usize>,
    pub integrator: IntegratorOptions,
}

impl SweepOptions {
    pub fn sequential() -> Self {
        SweepOptions {
            workers: Some(1),
            ..Default::default()
        }
    }

    pub fn resolved_workers(&self) -> Result<Option<usize>> {
        if let Some(w) = self.workers {
            return if w == 0 {
                Err(Error::validation("workers", "must be at least 1"))
            } else {
                Ok(Some(w))
            };
        }
        match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&w| w > 0)
                .map(Some)
                .ok_or_else(|| Error::validation(WORKERS_ENV, format!("expected a positive integer, got `{v}`"))),
            Err(_) => Ok(None),
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.resolved_workers()? {
            b = b.num_threads(w);
        }
        b.build().map_err(|e| Error::validation("workers", e.to_string()))
    }
}

fn run_point(
    preset: Preset,
    spec: &ChainSpec,
    omega: f64,
    initial: &StateChoice,
    target: &StateChoice,
    integrator: &IntegratorOptions,
) -> Result<SweepRow> {
    let ctx = || {
        format!(
            "preset={preset} N={} g0={} g0'={} J={} omega={omega:e}",
            spec.n_cells(),
            spec.g0(),
            spec.g0_prime(),
            spec.j_hop()
        )
    };
    let clock = Instant::now();
    let protocol = RampProtocol::new(omega)?;
    let init = initial.resolve(spec)?;
    let tgt = target.resolve(spec)?;
    let r = evolve_with(spec, &protocol, &init, &tgt, 0, integrator).map_err(|e| e.with_context(ctx()))?;
    Ok(SweepRow {
        preset,
        n_cells: spec.n_cells(),
        g0: spec.g0(),
        g0_prime: spec.g0_prime(),
        j_hop: spec.j_hop(),
        omega,
        fidelity: r.fidelity,
        norm_drift: r.norm_drift,
        wall_time: clock.elapsed().as_secs_f64(),
    })
}

/// One ramp per omega for a fixed chain; rows ordered by omega.
pub fn sweep_fidelity(
    spec: &ChainSpec,
    omega_grid: &[f64],
    initial: &StateChoice,
    target: &StateChoice,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    sweep_points(Preset::Custom, std::slice::from_ref(spec), omega_grid, initial, target, opts)
}

fn sweep_points(
    preset: Preset,
    chains: &[ChainSpec],
    omega_grid: &[f64],
    initial: &StateChoice,
    target: &StateChoice,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    validate_grid(omega_grid, "omega_grid")?;
    if omega_grid[0] <= 0.0 {
        return Err(Error::validation("omega_grid", "omega must be positive"));
    }
    let points: Vec<(ChainSpec, f64)> = chains
        .iter()
        .flat_map(|c| omega_grid.iter().map(move |&w| (*c, w)))
        .collect();
    let rows = opts.pool()?.install(|| {
        points
            .par_iter()
            .map(|(c, w)| run_point(preset, c, *w, initial, target, &opts.integrator))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepResult { rows, gaps: Vec::new() })
}

pub fn run_sweep(sweep: &SweepSpec, opts: &SweepOptions) -> Result<SweepResult> {
    sweep.validate()?;
    if sweep.preset == Preset::GapVsLength {
        let chains: Vec<ChainSpec> = sweep
            .lengths
            .iter()
            .map(|&n| {
                ChainOverrides {
                    n_cells: Some(n),
                    ..Default::default()
                }
                .apply(&sweep.chain)
            })
            .collect::<Result<_>>()?;
        let gaps = opts.pool()?.install(|| {
            chains
                .par_iter()
                .map(|c| {
                    Ok(GapRow {
                        n_cells: c.n_cells(),
                        g0: c.g0(),
                        g0_prime: c.g0_prime(),
                        j_hop: c.j_hop(),
                        gap_width: gap_width(c, &sweep.theta_grid)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        return Ok(SweepResult { rows: Vec::new(), gaps });
    }
    let chains: Vec<ChainSpec> = sweep
        .j_values
        .iter()
        .map(|&j| {
            ChainOverrides {
                j_hop: Some(j),
                ..Default::default()
            }
            .apply(&sweep.chain)
        })
        .collect::<Result<_>>()?;
    sweep_points(sweep.preset, &chains, &sweep.omega_grid, &sweep.initial, &sweep.target, opts)
}

pub fn run_preset(preset: Preset, overrides: &ChainOverrides) -> Result<SweepResult> {
    run_sweep(&SweepSpec::for_preset(preset, overrides)?, &SweepOptions::default())
}
