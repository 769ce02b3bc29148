//! Eigendecomposition over the pump parameter, gap-state tracking and the
//! closed-form zero mode of the chiral (J = 0) chain.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChainSpec, HamiltonianMatrix};
use crate::state::StateVector;

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub energies: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn vector(&self, level: usize) -> Vec<f64> {
        self.vectors.column(level).iter().copied().collect()
    }

    pub fn state(&self, level: usize) -> StateVector {
        StateVector::from_real(&self.vector(level))
    }
}

/// Rotate `v` so that its largest-magnitude entry is positive.
///
/// Near-ties resolve to the lowest index so that the choice is stable under
/// rounding noise.
pub fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn check_symmetric(h: &HamiltonianMatrix) -> Result<()> {
    let m = h.as_matrix();
    let scale = m.amax().max(1.0);
    for i in 0..h.dim() {
        for j in i + 1..h.dim() {
            let diff = (m[(i, j)] - m[(j, i)]).abs();
            if diff > 1e-12 * scale {
                return Err(Error::NotSymmetric { row: i, col: j, diff });
            }
        }
    }
    Ok(())
}

pub fn eigendecompose(h: &HamiltonianMatrix) -> Result<Eigensystem> {
    check_symmetric(h)?;
    let eig = SymmetricEigen::new(h.as_matrix().clone());
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(src).iter().copied().collect();
        fix_sign(&mut v);
        vectors.set_column(col, &nalgebra::DVector::from_vec(v));
    }
    Ok(Eigensystem { energies, vectors })
}

/// Ascending eigenvalues only.
pub fn eigenvalues(h: &HamiltonianMatrix) -> Vec<f64> {
    let mut e: Vec<f64> = h.as_matrix().clone().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Spectrum and mid-gap eigenvector along a grid of the pump parameter.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumScan {
    pub spec: ChainSpec,
    pub thetas: Vec<f64>,
    pub energies: Vec<Vec<f64>>,
    pub gap_states: Vec<Vec<f64>>,
    /// Always `N`: the middle of the `2N+1` ascending levels.
    pub gap_state_index: usize,
}

impl SpectrumScan {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn gap_energies(&self) -> Vec<f64> {
        self.energies.iter().map(|e| e[self.gap_state_index]).collect()
    }

    /// Distance of the gap level to the nearest other level at each grid point.
    pub fn band_distances(&self) -> Vec<f64> {
        let n = self.gap_state_index;
        self.energies
            .iter()
            .map(|e| (e[n] - e[n - 1]).min(e[n + 1] - e[n]))
            .collect()
    }

    /// Minimum over the grid of [`SpectrumScan::band_distances`].
    pub fn min_band_distance(&self) -> f64 {
        self.band_distances().into_iter().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn validate_grid(grid: &[f64], name: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyInput(format!("{name} grid")));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::validation(name, "grid values must be finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(name, "grid must be strictly ascending"));
    }
    Ok(())
}

/// `count` evenly spaced points on `[start, end]`, endpoints included.
pub fn uniform_grid(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

pub fn scan_spectrum(spec: &ChainSpec, thetas: &[f64]) -> Result<SpectrumScan> {
    validate_grid(thetas, "theta")?;
    let mid = spec.n_cells();
    let points: Vec<(Vec<f64>, Vec<f64>)> = thetas
        .par_iter()
        .map(|&t| {
            let eig = eigendecompose(&spec.build_hamiltonian(t))?;
            let v = eig.vector(mid);
            Ok((eig.energies, v))
        })
        .collect::<Result<_>>()?;
    let (energies, mut gap_states): (Vec<_>, Vec<_>) = points.into_iter().unzip();

    for k in 1..gap_states.len() {
        let (prev, cur) = gap_states.split_at_mut(k);
        let overlap: f64 = prev[k - 1].iter().zip(&cur[0]).map(|(a, b)| a * b).sum();
        if overlap < 0.0 {
            cur[0].iter_mut().for_each(|x| *x = -*x);
        }
    }

    Ok(SpectrumScan {
        spec: *spec,
        thetas: thetas.to_vec(),
        energies,
        gap_states,
        gap_state_index: mid,
    })
}

/// Closed-form zero mode of the J = 0 chain.
#[derive(Debug, Clone, Serialize)]
pub struct EdgeStateAnalytic {
    pub theta: f64,
    /// Full-length real amplitudes; magnon entries are zero.
    pub amplitudes: Vec<f64>,
    /// False when `g'(theta) = 0`; `amplitudes` then hold the limiting state
    /// `|a(N+1)>`.
    pub valid: bool,
    pub note: Option<String>,
}

impl EdgeStateAnalytic {
    pub fn state(&self) -> StateVector {
        StateVector::from_real(&self.amplitudes)
    }
}

pub fn analytic_zero_mode(spec: &ChainSpec, theta: f64) -> EdgeStateAnalytic {
    let c = spec.schedule(theta);
    let dim = spec.dim();
    let n = spec.n_cells();
    let mut amplitudes = vec![0.0; dim];
    if c.g_prime == 0.0 {
        amplitudes[dim - 1] = 1.0;
        return EdgeStateAnalytic {
            theta,
            amplitudes,
            valid: false,
            note: Some("g' = 0: returned the limiting state |a(N+1)>".into()),
        };
    }
    let ratio = -c.g / c.g_prime;
    // Scale by the largest power so nothing overflows for |ratio| > 1.
    if ratio.abs() <= 1.0 {
        for k in 0..=n {
            amplitudes[2 * k] = ratio.powi(k as i32);
        }
    } else {
        let inv = 1.0 / ratio.abs();
        let sign = ratio.signum();
        for k in 0..=n {
            amplitudes[2 * k] = inv.powi((n - k) as i32) * sign.powi(k as i32);
        }
    }
    let norm = amplitudes.iter().map(|x| x * x).sum::<f64>().sqrt();
    amplitudes.iter_mut().for_each(|x| *x /= norm);
    EdgeStateAnalytic {
        theta,
        amplitudes,
        valid: true,
        note: None,
    }
}

/// Minimum over the grid of the distance between the gap level and the top
/// of the lower band, `E_N - E_(N-1)`.
pub fn gap_width(spec: &ChainSpec, thetas: &[f64]) -> Result<f64> {
    if thetas.is_empty() {
        return Err(Error::EmptyInput("theta grid".into()));
    }
    let n = spec.n_cells();
    Ok(thetas
        .par_iter()
        .map(|&t| {
            let e = eigenvalues(&spec.build_hamiltonian(t));
            e[n] - e[n - 1]
        })
        .reduce(|| f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationProfile {
    pub probabilities: Vec<f64>,
    /// Probability on the first unit cell `{a1, m1}`.
    pub edge_weight_left: f64,
    /// Probability on the last unit cell `{mN, a(N+1)}`.
    pub edge_weight_right: f64,
    /// Inverse participation ratio `sum |v_i|^4`.
    pub ipr: f64,
}

pub fn localization_profile(v: &StateVector) -> Result<LocalizationProfile> {
    let d = v.dim();
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::validation("state", format!("dimension {d} is not a chain dimension 2N+1")));
    }
    let p = v.probabilities();
    Ok(LocalizationProfile {
        edge_weight_left: p[0] + p[1],
        edge_weight_right: p[d - 2] + p[d - 1],
        ipr: p.iter().map(|x| x * x).sum(),
        probabilities: p,
    })
}
