//! Ramp dynamics `i d/dt |psi> = H(theta(t)) |psi>` with `theta(t)` linear in
//! time, integrated by fixed-step RK4 with step halving, plus an independent
//! piecewise-exact propagator used as an oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ChainSpec;
use crate::spectral::{eigendecompose, eigenvalues, uniform_grid};
use crate::state::{fidelity, StateVector};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Linear ramp of the pump parameter from `theta_start` to `theta_end` at
/// rate `omega`. A ramp with `theta_end < theta_start` runs backwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RampProtocol {
    omega: f64,
    theta_start: f64,
    theta_end: f64,
}

impl RampProtocol {
    /// The standard `0 -> pi` ramp.
    pub fn new(omega: f64) -> Result<Self> {
        Self::with_range(omega, 0.0, PI)
    }

    pub fn with_range(omega: f64, theta_start: f64, theta_end: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::validation("omega", "omega must be positive"));
        }
        if !(theta_start.is_finite() && theta_end.is_finite()) {
            return Err(Error::validation("theta", "ramp endpoints must be finite"));
        }
        if theta_start == theta_end {
            return Err(Error::validation("theta_end", "ramp must have nonzero length"));
        }
        Ok(RampProtocol {
            omega,
            theta_start,
            theta_end,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn theta_start(&self) -> f64 {
        self.theta_start
    }

    pub fn theta_end(&self) -> f64 {
        self.theta_end
    }

    pub fn t_final(&self) -> f64 {
        (self.theta_end - self.theta_start).abs() / self.omega
    }

    pub fn theta_at(&self, t: f64) -> f64 {
        let dir = (self.theta_end - self.theta_start).signum();
        self.theta_start + dir * self.omega * t
    }
}

/// Step-control knobs for [`evolve_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorOptions {
    /// Bound on both the Richardson error estimate and the norm drift, per
    /// unit of simulated time.
    pub tol_per_unit_time: f64,
    /// Hard ceiling on `| |psi| - 1 |` for an accepted run.
    pub max_norm_drift: f64,
    /// Initial step is `initial_step_scale / rho`, with `rho` the largest
    /// eigenvalue magnitude along the ramp.
    pub initial_step_scale: f64,
    pub max_refinements: u32,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            tol_per_unit_time: 1e-8,
            max_norm_drift: 1e-6,
            initial_step_scale: 0.5,
            max_refinements: 12,
        }
    }
}

pub const DEFAULT_SNAPSHOTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub theta: f64,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferResult {
    pub final_state: StateVector,
    pub fidelity: f64,
    pub norm_drift: f64,
    pub snapshots: Option<Vec<Snapshot>>,
    /// Total RK4 steps of the accepted run.
    pub steps: usize,
    /// Richardson estimate of the final-state error.
    pub error_estimate: f64,
}

struct Run {
    state: Vec<Complex64>,
    snapshots: Vec<Snapshot>,
    drift: f64,
}

struct Rk4<'a> {
    spec: &'a ChainSpec,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl<'a> Rk4<'a> {
    fn new(spec: &'a ChainSpec) -> Self {
        let d = spec.dim();
        let z = || vec![Complex64::default(); d];
        Rk4 {
            spec,
            k: [z(), z(), z(), z()],
            tmp: z(),
        }
    }

    /// `out = -i H(theta) psi`
    fn deriv(spec: &ChainSpec, theta: f64, psi: &[Complex64], out: &mut [Complex64]) {
        spec.schedule(theta).apply(spec.n_cells(), spec.detuning(), psi, out);
        out.iter_mut().for_each(|z| *z *= -I);
    }

    fn step(&mut self, psi: &mut [Complex64], theta0: f64, theta_mid: f64, theta1: f64, h: f64) {
        let spec = self.spec;
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        Self::deriv(spec, theta0, psi, k1);
        for i in 0..psi.len() {
            tmp[i] = psi[i] + k1[i] * (0.5 * h);
        }
        Self::deriv(spec, theta_mid, tmp, k2);
        for i in 0..psi.len() {
            tmp[i] = psi[i] + k2[i] * (0.5 * h);
        }
        Self::deriv(spec, theta_mid, tmp, k3);
        for i in 0..psi.len() {
            tmp[i] = psi[i] + k3[i] * h;
        }
        Self::deriv(spec, theta1, tmp, k4);
        let w = h / 6.0;
        for i in 0..psi.len() {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrate with exactly `segments * substeps` uniform RK4 steps, recording
/// a snapshot at each segment boundary when `record` is set.
fn run_fixed(
    spec: &ChainSpec,
    protocol: &RampProtocol,
    initial: &[Complex64],
    segments: usize,
    substeps: usize,
    record: bool,
) -> Run {
    let t_final = protocol.t_final();
    let total = segments * substeps;
    let h = t_final / total as f64;
    let mut psi = initial.to_vec();
    let mut rk = Rk4::new(spec);
    let mut snapshots = Vec::new();
    let mut drift = 0.0_f64;
    let snap = |step: usize, psi: &[Complex64]| {
        let t = t_final * step as f64 / total as f64;
        Snapshot {
            t,
            theta: protocol.theta_at(t),
            probabilities: psi.iter().map(|z| z.norm_sqr()).collect(),
        }
    };
    if record {
        snapshots.push(snap(0, &psi));
    }
    let time = |step: usize| t_final * step as f64 / total as f64;
    for seg in 0..segments {
        for j in 0..substeps {
            let n = seg * substeps + j;
            let t0 = time(n);
            let t1 = time(n + 1);
            rk.step(
                &mut psi,
                protocol.theta_at(t0),
                protocol.theta_at(0.5 * (t0 + t1)),
                protocol.theta_at(t1),
                h,
            );
        }
        drift = drift.max((norm(&psi) - 1.0).abs());
        if record {
            snapshots.push(snap((seg + 1) * substeps, &psi));
        }
    }
    Run {
        state: psi,
        snapshots,
        drift,
    }
}

/// Largest `|E|` of `H(theta)` sampled along the ramp.
fn spectral_radius(spec: &ChainSpec, protocol: &RampProtocol) -> f64 {
    uniform_grid(protocol.theta_start(), protocol.theta_end(), 33)
        .into_iter()
        .map(|t| {
            eigenvalues(&spec.build_hamiltonian(t))
                .into_iter()
                .fold(0.0_f64, |m, e| m.max(e.abs()))
        })
        .fold(0.0, f64::max)
}

fn check_inputs(spec: &ChainSpec, initial: &StateVector, target: Option<&StateVector>) -> Result<()> {
    let d = spec.dim();
    if initial.dim() != d {
        return Err(Error::Dimension {
            expected: d,
            actual: initial.dim(),
        });
    }
    initial.check_normalized("initial")?;
    if let Some(t) = target {
        if t.dim() != d {
            return Err(Error::Dimension {
                expected: d,
                actual: t.dim(),
            });
        }
        t.check_normalized("target")?;
    }
    Ok(())
}

pub fn evolve(
    spec: &ChainSpec,
    protocol: &RampProtocol,
    initial: &StateVector,
    target: &StateVector,
    snapshot_count: usize,
) -> Result<TransferResult> {
    evolve_with(spec, protocol, initial, target, snapshot_count, &IntegratorOptions::default())
}

/// RK4 with step halving until the Richardson error estimate and the norm
/// drift are both below `tol_per_unit_time * t_final`.
///
/// `snapshot_count` evenly spaced times including both endpoints are
/// recorded; 0 disables snapshots.
pub fn evolve_with(
    spec: &ChainSpec,
    protocol: &RampProtocol,
    initial: &StateVector,
    target: &StateVector,
    snapshot_count: usize,
    opts: &IntegratorOptions,
) -> Result<TransferResult> {
    check_inputs(spec, initial, Some(target))?;
    let t_final = protocol.t_final();
    let segments = snapshot_count.saturating_sub(1).max(1);
    let record = snapshot_count > 0;
    let rho = spectral_radius(spec, protocol).max(1e-12);
    let h0 = opts.initial_step_scale / rho;
    let mut substeps = ((t_final / segments as f64) / h0).ceil().max(1.0) as usize;
    let budget = opts.tol_per_unit_time * t_final;

    let psi0 = initial.amplitudes();
    let mut coarse = run_fixed(spec, protocol, psi0, segments, substeps, record);
    let mut last_err = f64::INFINITY;
    for _ in 0..opts.max_refinements {
        let fine = run_fixed(spec, protocol, psi0, segments, 2 * substeps, record);
        let diff = coarse
            .state
            .iter()
            .zip(&fine.state)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        // RK4: the fine solution's error is ~ diff / (2^4 - 1).
        let err = diff / 15.0;
        substeps *= 2;
        last_err = err;
        if err <= budget && fine.drift <= budget && fine.drift <= opts.max_norm_drift {
            let final_state = StateVector::new(fine.state);
            return Ok(TransferResult {
                fidelity: fidelity(target, &final_state)?,
                final_state,
                norm_drift: fine.drift,
                snapshots: record.then_some(fine.snapshots),
                steps: segments * substeps,
                error_estimate: err,
            });
        }
        coarse = fine;
    }
    Err(Error::Integration {
        reason: format!(
            "step refinement limit reached ({} steps): error estimate {last_err:e}, norm drift {:e}, budget {budget:e}",
            segments * substeps,
            coarse.drift
        ),
        context: None,
    })
}

/// Fixed-step RK4 without error control. Exposed for benchmarking and for
/// convergence studies.
pub fn integrate_fixed(
    spec: &ChainSpec,
    protocol: &RampProtocol,
    initial: &StateVector,
    steps: usize,
) -> Result<StateVector> {
    check_inputs(spec, initial, None)?;
    let run = run_fixed(spec, protocol, initial.amplitudes(), 1, steps.max(1), false);
    Ok(StateVector::new(run.state))
}

/// Product of exact slice propagators `exp(-i H(theta_mid) dt)` via
/// eigendecomposition of each frozen midpoint Hamiltonian.
pub fn propagate_piecewise(
    spec: &ChainSpec,
    protocol: &RampProtocol,
    initial: &StateVector,
    n_slices: usize,
) -> Result<StateVector> {
    check_inputs(spec, initial, None)?;
    if n_slices == 0 {
        return Err(Error::validation("n_slices", "must be at least 1"));
    }
    let d = spec.dim();
    let t_final = protocol.t_final();
    let dt = t_final / n_slices as f64;
    let mut psi = initial.clone();
    let mut coeff = vec![Complex64::default(); d];
    for k in 0..n_slices {
        let t_mid = t_final * (k as f64 + 0.5) / n_slices as f64;
        let eig = eigendecompose(&spec.build_hamiltonian(protocol.theta_at(t_mid)))?;
        let v = &eig.vectors;
        let amps = psi.amplitudes_mut();
        for (l, c) in coeff.iter_mut().enumerate() {
            let proj: Complex64 = (0..d).map(|i| amps[i] * v[(i, l)]).sum();
            *c = proj * Complex64::from_polar(1.0, -eig.energies[l] * dt);
        }
        for (i, a) in amps.iter_mut().enumerate() {
            *a = (0..d).map(|l| coeff[l] * v[(i, l)]).sum();
        }
    }
    Ok(psi)
}

/// Converts a dimensionless time (units of `1/g0'`) to nanoseconds given
/// `g0' / 2pi` in GHz.
pub fn time_in_ns(t: f64, g0_prime_over_2pi_ghz: f64) -> f64 {
    t / (2.0 * PI * g0_prime_over_2pi_ghz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SiteIndex;

    #[test]
    fn protocol_validation() {
        assert!(RampProtocol::new(0.0).is_err());
        let err = RampProtocol::new(-1.0).unwrap_err().to_string();
        assert!(err.contains("omega must be positive"), "{err}");
        assert!(RampProtocol::with_range(1.0, 1.0, 1.0).is_err());
        let p = RampProtocol::new(0.5).unwrap();
        assert!((p.t_final() - 2.0 * PI).abs() < 1e-15);
        let back = RampProtocol::with_range(0.5, PI, 0.0).unwrap();
        assert!((back.t_final() - 2.0 * PI).abs() < 1e-15);
        assert!((back.theta_at(back.t_final())).abs() < 1e-15);
    }

    #[test]
    fn frozen_decoupled_site_is_stationary() {
        // Ramp over a vanishing theta interval: the single slice sits at
        // theta ~ 0 where a1 only couples through J = 0.
        let s = ChainSpec::new(3, 1.0, 1.0, 0.0).unwrap();
        let p = RampProtocol::with_range(1.0, 0.0, 1e-300).unwrap();
        let out = propagate_piecewise(&s, &p, &s.left_edge(), 1).unwrap();
        assert_eq!(out.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(out.amplitudes()[1..].iter().all(|z| *z == Complex64::default()));
    }

    #[test]
    fn diabatic_limit_keeps_initial_state() {
        let s = ChainSpec::default();
        let p = RampProtocol::new(1e3).unwrap();
        let r = evolve(&s, &p, &s.left_edge(), &s.right_edge(), 0).unwrap();
        assert!(r.fidelity < 1e-6);
        assert!(fidelity(&s.left_edge(), &r.final_state).unwrap() > 0.99);
    }

    #[test]
    fn rejects_mismatched_or_unnormalized_states() {
        let s = ChainSpec::new(2, 1.0, 1.0, 0.0).unwrap();
        let p = RampProtocol::new(1.0).unwrap();
        let bad = StateVector::basis(3, 0);
        assert!(matches!(evolve(&s, &p, &bad, &s.right_edge(), 0), Err(Error::Dimension { .. })));
        let unnorm = StateVector::from_real(&[1.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(evolve(&s, &p, &unnorm, &s.right_edge(), 0).is_err());
        assert!(propagate_piecewise(&s, &p, &s.left_edge(), 0).is_err());
    }

    #[test]
    fn snapshots_cover_both_endpoints() {
        let s = ChainSpec::new(2, 1.0, 1.0, 0.0).unwrap();
        let p = RampProtocol::new(0.2).unwrap();
        let r = evolve(&s, &p, &s.left_edge(), &s.right_edge(), 11).unwrap();
        let snaps = r.snapshots.unwrap();
        assert_eq!(snaps.len(), 11);
        assert_eq!(snaps[0].t, 0.0);
        assert_eq!(snaps[0].probabilities[0], 1.0);
        assert!((snaps[10].t - p.t_final()).abs() < 1e-12);
        for sn in &snaps {
            assert!((sn.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn refinement_failure_is_reported() {
        let s = ChainSpec::new(2, 1.0, 1.0, 0.0).unwrap();
        let p = RampProtocol::new(0.01).unwrap();
        let opts = IntegratorOptions {
            max_refinements: 1,
            tol_per_unit_time: 1e-16,
            ..Default::default()
        };
        let target = s.basis_state(SiteIndex::cavity(3)).unwrap();
        let err = evolve_with(&s, &p, &s.left_edge(), &target, 0, &opts).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn unit_conversion() {
        // t = pi / 0.03 at g0'/2pi = 2 GHz is about 8.3 ns.
        let ns = time_in_ns(PI / 0.03, 2.0);
        assert!((ns - 8.333).abs() < 1e-3, "{ns}");
    }
}
