use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex amplitudes over the ordered chain sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector(Vec<Complex64>);

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        StateVector(amplitudes)
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        StateVector(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = vec![Complex64::default(); dim];
        v[index] = Complex64::new(1.0, 0.0);
        StateVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::validation("state", "cannot normalize a zero vector"));
        }
        Ok(StateVector(self.0.iter().map(|z| z / n).collect()))
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Largest componentwise distance to `other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_normalized(&self, what: &str) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::validation(what, format!("must be normalized (norm = {n})")));
        }
        Ok(())
    }
}

impl Add for &StateVector {
    type Output = StateVector;

    fn add(self, rhs: &StateVector) -> StateVector {
        assert_eq!(self.dim(), rhs.dim());
        StateVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Mul<&StateVector> for Complex64 {
    type Output = StateVector;

    fn mul(self, rhs: &StateVector) -> StateVector {
        StateVector(rhs.0.iter().map(|z| self * z).collect())
    }
}

/// Transfer fidelity `|<a|b>|`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_cases() {
        let a = StateVector::basis(4, 0);
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &StateVector::basis(4, 2)).unwrap(), 0.0);
        let b = StateVector::from_real(&[1.0, 1.0, 0.0, 0.0]).normalized().unwrap();
        assert!((fidelity(&a, &b).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            fidelity(&a, &StateVector::basis(3, 0)),
            Err(Error::Dimension { expected: 4, actual: 3 })
        ));
    }

    #[test]
    fn fidelity_ignores_global_phase() {
        let a = StateVector::from_real(&[0.6, 0.8]);
        let b = Complex64::from_polar(1.0, 1.234) * &a;
        assert!((fidelity(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }
}
