//! Chain geometry, the cosine coupling schedule and the single-excitation
//! Hamiltonian of the cavity-magnon lattice.
//!
//! Sites are ordered `a1, m1, a2, m2, ..., aN, mN, a(N+1)`, so cavity `k`
//! (1-based) sits at flat index `2(k-1)` and magnon `k` at `2k-1`. Energies
//! are in units of the intercell amplitude `g0'` and the diagonal is zero
//! (resonant frame) unless a uniform detuning is requested.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::StateVector;

/// Static description of the chain: `N` magnon sites between `N+1` cavities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainSpec {
    n_cells: usize,
    g0: f64,
    g0_prime: f64,
    j_hop: f64,
    detuning: f64,
}

impl Default for ChainSpec {
    fn default() -> Self {
        ChainSpec {
            n_cells: 10,
            g0: 1.0,
            g0_prime: 1.0,
            j_hop: 0.0,
            detuning: 0.0,
        }
    }
}

impl ChainSpec {
    pub fn new(n_cells: usize, g0: f64, g0_prime: f64, j_hop: f64) -> Result<Self> {
        let spec = ChainSpec {
            n_cells,
            g0,
            g0_prime,
            j_hop,
            detuning: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Adds a uniform on-site energy to every mode.
    pub fn with_detuning(mut self, detuning: f64) -> Result<Self> {
        if !detuning.is_finite() {
            return Err(Error::validation("detuning", "must be finite"));
        }
        self.detuning = detuning;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.n_cells < 1 {
            return Err(Error::validation("n_cells", "must be at least 1"));
        }
        if !(self.g0.is_finite() && self.g0 >= 0.0) {
            return Err(Error::validation("g0", "must be nonnegative"));
        }
        if !(self.g0_prime.is_finite() && self.g0_prime > 0.0) {
            return Err(Error::validation("g0_prime", "must be positive"));
        }
        if !(self.j_hop.is_finite() && self.j_hop >= 0.0) {
            return Err(Error::validation("j_hop", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn g0_prime(&self) -> f64 {
        self.g0_prime
    }

    pub fn j_hop(&self) -> f64 {
        self.j_hop
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    /// Hilbert-space dimension `2N+1`.
    pub fn dim(&self) -> usize {
        2 * self.n_cells + 1
    }

    /// Upper bound on the spectral radius of `H(theta)` over all `theta`
    /// (maximum absolute row sum at the schedule extremes).
    pub fn norm_bound(&self) -> f64 {
        2.0 * self.g0 + 2.0 * self.g0_prime + 2.0 * self.j_hop + self.detuning.abs()
    }

    /// Instantaneous couplings at pump parameter `theta`.
    pub fn schedule(&self, theta: f64) -> CouplingPoint {
        let c = theta.cos();
        CouplingPoint {
            theta,
            g: (self.g0 * (1.0 - c)).max(0.0),
            g_prime: (self.g0_prime * (1.0 + c)).max(0.0),
            j_hop: self.j_hop,
        }
    }

    pub fn build_hamiltonian(&self, theta: f64) -> HamiltonianMatrix {
        HamiltonianMatrix::from_couplings(self.n_cells, &self.schedule(theta), self.detuning)
    }

    pub fn basis_state(&self, site: SiteIndex) -> Result<StateVector> {
        let idx = site.flat_index(self.n_cells)?;
        Ok(StateVector::basis(self.dim(), idx))
    }

    /// Leftmost cavity `|L>`.
    pub fn left_edge(&self) -> StateVector {
        StateVector::basis(self.dim(), 0)
    }

    /// Rightmost cavity `|R>`.
    pub fn right_edge(&self) -> StateVector {
        StateVector::basis(self.dim(), self.dim() - 1)
    }
}

/// Free-function form of [`ChainSpec::schedule`].
pub fn schedule(spec: &ChainSpec, theta: f64) -> CouplingPoint {
    spec.schedule(theta)
}

/// Free-function form of [`ChainSpec::build_hamiltonian`].
pub fn build_hamiltonian(spec: &ChainSpec, theta: f64) -> HamiltonianMatrix {
    spec.build_hamiltonian(theta)
}

/// Free-function form of [`ChainSpec::basis_state`].
pub fn basis_state(spec: &ChainSpec, site: SiteIndex) -> Result<StateVector> {
    spec.basis_state(site)
}

/// Couplings `(g, g', J)` at one value of the pump parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingPoint {
    pub theta: f64,
    pub g: f64,
    pub g_prime: f64,
    pub j_hop: f64,
}

impl CouplingPoint {
    /// `out = H psi` for a chain of `n_cells` cells, without forming `H`.
    pub(crate) fn apply(&self, n_cells: usize, detuning: f64, psi: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(psi.len(), 2 * n_cells + 1);
        debug_assert_eq!(out.len(), psi.len());
        for (o, p) in out.iter_mut().zip(psi) {
            *o = p * detuning;
        }
        for k in 0..n_cells {
            let a = 2 * k;
            let m = a + 1;
            let a_next = a + 2;
            out[a] += psi[m] * self.g + psi[a_next] * self.j_hop;
            out[m] += psi[a] * self.g + psi[a_next] * self.g_prime;
            out[a_next] += psi[m] * self.g_prime + psi[a] * self.j_hop;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SiteKind {
    Cavity,
    Magnon,
}

/// A site addressed by kind and 1-based ordinal within that kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteIndex {
    pub kind: SiteKind,
    pub ordinal: usize,
}

impl SiteIndex {
    pub fn cavity(ordinal: usize) -> Self {
        SiteIndex {
            kind: SiteKind::Cavity,
            ordinal,
        }
    }

    pub fn magnon(ordinal: usize) -> Self {
        SiteIndex {
            kind: SiteKind::Magnon,
            ordinal,
        }
    }

    pub fn flat_index(&self, n_cells: usize) -> Result<usize> {
        let max = match self.kind {
            SiteKind::Cavity => n_cells + 1,
            SiteKind::Magnon => n_cells,
        };
        if self.ordinal < 1 || self.ordinal > max {
            return Err(Error::Range(format!(
                "site {self} (valid ordinals 1..={max} for N={n_cells})"
            )));
        }
        Ok(match self.kind {
            SiteKind::Cavity => 2 * (self.ordinal - 1),
            SiteKind::Magnon => 2 * self.ordinal - 1,
        })
    }

    pub fn from_flat(flat: usize) -> Self {
        if flat.is_multiple_of(2) {
            SiteIndex::cavity(flat / 2 + 1)
        } else {
            SiteIndex::magnon(flat / 2 + 1)
        }
    }
}

impl fmt::Display for SiteIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SiteKind::Cavity => write!(f, "a{}", self.ordinal),
            SiteKind::Magnon => write!(f, "m{}", self.ordinal),
        }
    }
}

impl std::str::FromStr for SiteIndex {
    type Err = Error;

    /// Accepts `a3`, `m1`, `cavity:3`, `magnon:1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::validation("site", format!("cannot parse `{s}` (expected e.g. a1, m2, cavity:3)"));
        let (kind, rest) = if let Some(r) = s.strip_prefix("cavity:") {
            (SiteKind::Cavity, r)
        } else if let Some(r) = s.strip_prefix("magnon:") {
            (SiteKind::Magnon, r)
        } else if let Some(r) = s.strip_prefix('a') {
            (SiteKind::Cavity, r)
        } else if let Some(r) = s.strip_prefix('m') {
            (SiteKind::Magnon, r)
        } else {
            return Err(bad());
        };
        let ordinal = rest.parse().map_err(|_| bad())?;
        Ok(SiteIndex { kind, ordinal })
    }
}

/// Dense real symmetric single-excitation Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    entries: DMatrix<f64>,
}

impl HamiltonianMatrix {
    pub fn from_couplings(n_cells: usize, c: &CouplingPoint, detuning: f64) -> Self {
        let dim = 2 * n_cells + 1;
        let mut h = DMatrix::from_diagonal_element(dim, dim, detuning);
        let mut set = |i: usize, j: usize, v: f64| {
            h[(i, j)] = v;
            h[(j, i)] = v;
        };
        for k in 0..n_cells {
            let a = 2 * k;
            set(a, a + 1, c.g);
            set(a + 1, a + 2, c.g_prime);
            set(a, a + 2, c.j_hop);
        }
        HamiltonianMatrix { entries: h }
    }

    /// Wraps an arbitrary square matrix. Symmetry is checked by the eigensolver,
    /// not here.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Dimension {
                expected: entries.nrows(),
                actual: entries.ncols(),
            });
        }
        Ok(HamiltonianMatrix { entries })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: r.len(),
                });
            }
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn unit() -> ChainSpec {
        ChainSpec::new(1, 1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn schedule_endpoints() {
        let s = ChainSpec::new(10, 1.0, 1.0, 0.0).unwrap();
        let c = s.schedule(0.0);
        assert_eq!((c.g, c.g_prime, c.j_hop), (0.0, 2.0, 0.0));
        let c = s.schedule(PI);
        assert_eq!((c.g, c.g_prime), (2.0, 0.0));

        let s = ChainSpec::new(10, 1.0, 1.0, 0.125).unwrap();
        let c = s.schedule(PI / 2.0);
        assert!((c.g - 1.0).abs() < 1e-15);
        assert!((c.g_prime - 1.0).abs() < 1e-15);
        assert_eq!(c.j_hop, 0.125);
    }

    #[test]
    fn three_site_matrices() {
        let h = unit().build_hamiltonian(PI / 2.0);
        let expect = [[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((h.get(i, j) - expect[i][j]).abs() < 1e-15, "({i},{j})");
            }
        }

        let s = ChainSpec::new(1, 1.0, 1.0, 0.125).unwrap();
        let h = s.build_hamiltonian(0.0);
        assert_eq!(
            h.to_rows(),
            vec![vec![0.0, 0.0, 0.125], vec![0.0, 0.0, 2.0], vec![0.125, 2.0, 0.0]]
        );
    }

    #[test]
    fn band_nonzero_count() {
        // Enumerate the coupling list (a_k,m_k), (m_k,a_k+1), (a_k,a_k+1)
        // independently of the builder and compare supports.
        let n = 10;
        let s = ChainSpec::new(n, 1.0, 1.0, 0.3).unwrap();
        let mut pairs = std::collections::BTreeSet::new();
        for k in 1..=n {
            let a = SiteIndex::cavity(k).flat_index(n).unwrap();
            let m = SiteIndex::magnon(k).flat_index(n).unwrap();
            let a2 = SiteIndex::cavity(k + 1).flat_index(n).unwrap();
            pairs.insert((a, m));
            pairs.insert((m, a2));
            pairs.insert((a, a2));
        }
        assert_eq!(pairs.len(), 3 * n);
        let h = s.build_hamiltonian(1.1);
        assert_eq!(h.dim(), 21);
        let mut count = 0;
        for i in 0..h.dim() {
            assert_eq!(h.get(i, i), 0.0);
            for j in i + 1..h.dim() {
                if h.get(i, j) != 0.0 {
                    count += 1;
                    assert!(pairs.contains(&(i, j)), "unexpected entry ({i},{j})");
                }
            }
        }
        assert_eq!(count, 30);
    }

    #[test]
    fn basis_states() {
        let s = ChainSpec::new(2, 1.0, 1.0, 0.0).unwrap();
        let amps = |v: StateVector| v.amplitudes().iter().map(|z| z.re).collect::<Vec<_>>();
        assert_eq!(amps(s.basis_state(SiteIndex::cavity(1)).unwrap()), [1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(amps(s.basis_state(SiteIndex::magnon(1)).unwrap()), [0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(amps(s.basis_state(SiteIndex::cavity(3)).unwrap()), [0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(s.basis_state(SiteIndex::cavity(4)), Err(Error::Range(_))));
        assert!(matches!(s.basis_state(SiteIndex::magnon(3)), Err(Error::Range(_))));
        assert!(matches!(s.basis_state(SiteIndex::magnon(0)), Err(Error::Range(_))));
    }

    #[test]
    fn site_parsing_and_flat_roundtrip() {
        assert_eq!("a3".parse::<SiteIndex>().unwrap(), SiteIndex::cavity(3));
        assert_eq!("magnon:2".parse::<SiteIndex>().unwrap(), SiteIndex::magnon(2));
        assert!("x1".parse::<SiteIndex>().is_err());
        for flat in 0..21 {
            assert_eq!(SiteIndex::from_flat(flat).flat_index(10).unwrap(), flat);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ChainSpec::new(0, 1.0, 1.0, 0.0).is_err());
        assert!(ChainSpec::new(1, -1.0, 1.0, 0.0).is_err());
        assert!(ChainSpec::new(1, 1.0, 0.0, 0.0).is_err());
        assert!(ChainSpec::new(1, 1.0, 1.0, -0.1).is_err());
        assert!(ChainSpec::new(1, f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn leftmost_cavity_decoupled_at_zero() {
        let s = ChainSpec::new(4, 1.0, 1.0, 0.0).unwrap();
        let h = s.build_hamiltonian(0.0);
        assert!((0..h.dim()).all(|j| h.get(0, j) == 0.0));
        let s = ChainSpec::new(4, 1.0, 1.0, 0.2).unwrap();
        let h = s.build_hamiltonian(0.0);
        for j in 0..h.dim() {
            let expect = if j == 2 { 0.2 } else { 0.0 };
            assert_eq!(h.get(0, j), expect);
        }
    }

    #[test]
    fn sparse_apply_matches_dense() {
        let s = ChainSpec::new(5, 1.3, 0.7, 0.4).unwrap().with_detuning(0.25).unwrap();
        let theta = 0.9;
        let h = s.build_hamiltonian(theta);
        let psi: Vec<Complex64> = (0..s.dim())
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut out = vec![Complex64::default(); s.dim()];
        s.schedule(theta).apply(s.n_cells(), s.detuning(), &psi, &mut out);
        for i in 0..s.dim() {
            let dense: Complex64 = (0..s.dim()).map(|j| psi[j] * h.get(i, j)).sum();
            assert!((dense - out[i]).norm() < 1e-14);
        }
    }
}
