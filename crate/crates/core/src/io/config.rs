//! Run configuration: a TOML key-value file plus command-line overrides.
//!
//! All keys are optional; unknown keys are rejected. Angles accept either a
//! number (radians) or a multiple of pi written as `"pi"`, `"pi/2"`,
//! `"3pi/4"`, `"2pi"`.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynamics::{IntegratorOptions, RampProtocol, DEFAULT_SNAPSHOTS};
use crate::error::{Error, Result};
use crate::experiments::{
    log_grid, ChainOverrides, Preset, StateChoice, SweepSpec, DEFAULT_OMEGA_MAX, DEFAULT_OMEGA_MIN,
    DEFAULT_OMEGA_POINTS, DEFAULT_THETA_POINTS,
};
use crate::model::ChainSpec;
use crate::spectral::validate_grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Radians(f64),
    Expr(String),
}

impl Angle {
    pub fn radians(&self, field: &str) -> Result<f64> {
        match self {
            Angle::Radians(x) => Ok(*x),
            Angle::Expr(s) => parse_pi_expr(s).ok_or_else(|| {
                Error::validation(field, format!("cannot read `{s}` as an angle (try 1.57, \"pi/2\", \"3pi/4\")"))
            }),
        }
    }
}

fn parse_pi_expr(s: &str) -> Option<f64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(x) = s.parse::<f64>() {
        return Some(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok()?),
        None => (s.as_str(), 1.0),
    };
    let coeff = num.strip_suffix("pi")?.trim_end_matches('*');
    let coeff = match coeff {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    Some(coeff * PI / den)
}

/// Unresolved key-value configuration. Every field is optional so that a
/// file and a set of flags can be layered with [`RawConfig::merge`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub preset: Option<String>,
    pub n_cells: Option<usize>,
    pub g0: Option<f64>,
    pub g0_prime: Option<f64>,
    pub j_hop: Option<f64>,
    pub detuning: Option<f64>,
    pub omega: Option<f64>,
    pub theta_start: Option<Angle>,
    pub theta_end: Option<Angle>,
    pub omega_grid: Option<Vec<f64>>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub omega_points: Option<usize>,
    pub j_values: Option<Vec<f64>>,
    pub lengths: Option<Vec<usize>>,
    pub theta_points: Option<usize>,
    pub initial: Option<String>,
    pub target: Option<String>,
    pub snapshot_count: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub plots: Option<bool>,
    pub workers: Option<usize>,
    pub timing: Option<bool>,
    /// Integrator error budget per unit of simulated time.
    pub tolerance: Option<f64>,
    pub max_refinements: Option<u32>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
            message: e.message().trim().to_string(),
        })
    }

    /// Layer `over` on top of `self`; fields set in `over` win.
    pub fn merge(self, over: RawConfig) -> RawConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RawConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            preset, n_cells, g0, g0_prime, j_hop, detuning, omega, theta_start, theta_end, omega_grid,
            omega_min, omega_max, omega_points, j_values, lengths, theta_points, initial, target,
            snapshot_count, output_dir, plots, workers, timing, tolerance, max_refinements
        )
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let preset: Preset = match &self.preset {
            Some(p) => p.parse()?,
            None => Preset::PhotonJ0,
        };
        let overrides = ChainOverrides {
            n_cells: self.n_cells,
            g0: self.g0,
            g0_prime: self.g0_prime,
            j_hop: self.j_hop,
            detuning: self.detuning,
        };
        let mut sweep = SweepSpec::for_preset(preset, &overrides)?;
        let chain = sweep.chain;

        let omega = self.omega.unwrap_or(default_omega(preset));
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::validation("omega", "omega must be positive"));
        }
        let theta_start = match &self.theta_start {
            Some(a) => a.radians("theta_start")?,
            None => 0.0,
        };
        let theta_end = match &self.theta_end {
            Some(a) => a.radians("theta_end")?,
            None => PI,
        };
        let protocol = RampProtocol::with_range(omega, theta_start, theta_end)?;

        if let Some(grid) = &self.omega_grid {
            if self.omega_min.is_some() || self.omega_max.is_some() || self.omega_points.is_some() {
                return Err(Error::validation("omega_grid", "give either omega_grid or omega_min/omega_max/omega_points"));
            }
            sweep.omega_grid = grid.clone();
        } else {
            let lo = self.omega_min.unwrap_or(DEFAULT_OMEGA_MIN);
            let hi = self.omega_max.unwrap_or(DEFAULT_OMEGA_MAX);
            let n = self.omega_points.unwrap_or(DEFAULT_OMEGA_POINTS);
            if !(lo > 0.0 && lo.is_finite()) {
                return Err(Error::validation("omega_min", "omega must be positive"));
            }
            if !(hi.is_finite() && (hi > lo || (n == 1 && hi >= lo))) {
                return Err(Error::validation("omega_max", "must exceed omega_min"));
            }
            if n == 0 {
                return Err(Error::validation("omega_points", "must be at least 1"));
            }
            sweep.omega_grid = log_grid(lo, hi, n);
        }
        if let Some(w) = sweep.omega_grid.iter().find(|w| w.is_nan() || **w <= 0.0) {
            return Err(Error::validation("omega_grid", format!("omega must be positive (got {w})")));
        }
        validate_grid(&sweep.omega_grid, "omega_grid")?;

        if let Some(j) = &self.j_values {
            if self.j_hop.is_some() {
                return Err(Error::validation("j_values", "give either j_hop or j_values"));
            }
            sweep.j_values = j.clone();
        }
        if let Some(l) = &self.lengths {
            sweep.lengths = l.clone();
        }
        if let Some(s) = &self.initial {
            sweep.initial = StateChoice::parse(s, theta_start)?;
        }
        if let Some(s) = &self.target {
            sweep.target = StateChoice::parse(s, theta_end)?;
        }
        // Catch out-of-range sites before any computation.
        sweep.initial.resolve(&chain)?;
        sweep.target.resolve(&chain)?;

        let theta_points = self.theta_points.unwrap_or(DEFAULT_THETA_POINTS);
        if theta_points == 0 {
            return Err(Error::validation("theta_points", "must be at least 1"));
        }
        sweep.theta_grid = crate::spectral::uniform_grid(0.0, 2.0 * PI, theta_points);
        sweep.validate()?;

        if self.workers == Some(0) {
            return Err(Error::validation("workers", "must be at least 1"));
        }
        let mut integrator = IntegratorOptions::default();
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::validation("tolerance", "must be positive"));
            }
            integrator.tol_per_unit_time = t;
        }
        if let Some(r) = self.max_refinements {
            if r == 0 {
                return Err(Error::validation("max_refinements", "must be at least 1"));
            }
            integrator.max_refinements = r;
        }

        Ok(RunConfig {
            preset,
            chain,
            protocol,
            sweep,
            theta_points,
            snapshot_count: self.snapshot_count.unwrap_or(DEFAULT_SNAPSHOTS),
            output_dir: self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
            plots: self.plots.unwrap_or(true),
            workers: self.workers,
            timing: self.timing.unwrap_or(true),
            integrator,
        })
    }
}

/// Ramp rate for single runs when none is configured.
pub fn default_omega(preset: Preset) -> f64 {
    match preset {
        Preset::Magnonic => 3e-4,
        Preset::MagnonToPhoton => 1e-3,
        _ => 0.03,
    }
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub preset: Preset,
    pub chain: ChainSpec,
    pub protocol: RampProtocol,
    pub sweep: SweepSpec,
    pub theta_points: usize,
    pub snapshot_count: usize,
    pub output_dir: PathBuf,
    pub plots: bool,
    pub workers: Option<usize>,
    /// Include the wall-time column in sweep CSVs.
    pub timing: bool,
    pub integrator: IntegratorOptions,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    RawConfig::from_toml(text)?.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse_config("preset = \"PhotonJ0\"\n").unwrap();
        assert_eq!(c.preset, Preset::PhotonJ0);
        assert_eq!(c.chain, ChainSpec::new(10, 1.0, 1.0, 0.0).unwrap());
        assert_eq!(c.protocol.omega(), 0.03);
        assert_eq!(c.protocol.theta_end(), PI);
        assert_eq!(c.sweep.omega_grid.len(), 41);
        assert_eq!(c.snapshot_count, 200);
        assert_eq!(c.theta_points, 201);
        assert_eq!(parse_config("").unwrap().chain, c.chain);
    }

    #[test]
    fn negative_omega_names_field() {
        let e = parse_config("omega = -1\n").unwrap_err();
        assert!(matches!(e, Error::Validation { ref field, .. } if field == "omega"));
        assert!(e.to_string().contains("omega must be positive"));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn j_override() {
        let c = parse_config("preset = \"PhotonJ0\"\nj_hop = 0.125\n").unwrap();
        assert_eq!(c.chain.j_hop(), 0.125);
        assert_eq!(c.sweep.j_values, vec![0.125]);
    }

    #[test]
    fn syntax_errors_report_line() {
        let e = parse_config("preset = \"PhotonJ0\"\n\nn_cells = = 3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e:?}");
        let e = parse_config("preset = \"PhotonJ0\"\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e:?}");
        assert!(e.to_string().contains("bogus"));
    }

    #[test]
    fn physics_validated_up_front() {
        assert!(parse_config("n_cells = 0").is_err());
        assert!(parse_config("g0_prime = 0.0").is_err());
        assert!(parse_config("omega_grid = [0.1, 0.01]").is_err());
        assert!(parse_config("omega_grid = [0.0, 0.01]").is_err());
        assert!(parse_config("target = \"a12\"").is_err());
        assert!(parse_config("preset = \"Magnonic\"\ninitial = \"m3\"").is_err());
        assert!(parse_config("preset = \"Nope\"").is_err());
        assert!(parse_config("theta_end = \"banana\"").is_err());
        assert!(parse_config("j_hop = 0.1\nj_values = [0.2]").is_err());
    }

    #[test]
    fn angles_and_presets() {
        let c = parse_config(
            "preset = \"Magnonic\"\ntheta_start = \"pi\"\ntheta_end = 0\ninitial = \"last-magnon\"\ntarget = \"m1\"\n",
        )
        .unwrap();
        assert_eq!(c.chain, ChainSpec::new(2, 1.0, 1.0, 8.0).unwrap());
        assert_eq!(c.protocol.theta_start(), PI);
        assert_eq!(c.protocol.omega(), 3e-4);
        assert_eq!(parse_pi_expr("3pi/4"), Some(0.75 * PI));
        assert_eq!(parse_pi_expr("-pi"), Some(-PI));
        assert_eq!(parse_pi_expr("2*pi"), Some(2.0 * PI));
        assert_eq!(parse_pi_expr("pie"), None);
    }

    #[test]
    fn merge_prefers_overrides() {
        let file = RawConfig::from_toml("n_cells = 4\ng0 = 2.0\n").unwrap();
        let flags = RawConfig {
            n_cells: Some(6),
            ..Default::default()
        };
        let c = file.merge(flags).resolve().unwrap();
        assert_eq!(c.chain.n_cells(), 6);
        assert_eq!(c.chain.g0(), 2.0);
    }
}
