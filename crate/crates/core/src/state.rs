//! Spectral representation of the state space: coefficients in the
//! sin(γv) basis of L²(0, π) and the diagonal Dirichlet Laplacian.

use std::f64::consts::PI;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients w_γ, γ = 1..N, of w(v) = Σ w_γ sin(γv).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectralState(Vec<f64>);

impl SpectralState {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Validation("a spectral state needs at least one mode".into()));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Validation(format!("coefficient {} is not finite", i + 1)));
        }
        Ok(SpectralState(coeffs))
    }

    pub fn zeros(modes: usize) -> Self {
        SpectralState(vec![0.0; modes])
    }

    /// First mode set to `amplitude`, all others zero.
    pub fn unit(modes: usize, amplitude: f64) -> Self {
        let mut v = vec![0.0; modes];
        v[0] = amplitude;
        SpectralState(v)
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// L²(0, π) norm: sqrt(π/2 · Σ w_γ²).
    pub fn norm(&self) -> f64 {
        (0.5 * PI * self.0.iter().map(|c| c * c).sum::<f64>()).sqrt()
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        SpectralState(self.0.iter().map(|c| c * s).collect())
    }

    /// self += s · other
    pub fn axpy(&mut self, s: f64, other: &SpectralState) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * b;
        }
    }

    /// Coefficientwise product with `factors`.
    pub fn hadamard(&self, factors: &[f64]) -> Self {
        SpectralState(self.0.iter().zip(factors).map(|(a, b)| a * b).collect())
    }

    /// Pointwise values Σ w_γ sin(γv) on `points` equally spaced nodes of [0, π]
    /// (endpoints included).
    pub fn to_physical(&self, points: usize) -> Vec<f64> {
        let n = points.max(2);
        (0..n)
            .map(|i| {
                let v = PI * i as f64 / (n - 1) as f64;
                self.0
                    .iter()
                    .enumerate()
                    .map(|(g, c)| c * ((g + 1) as f64 * v).sin())
                    .sum()
            })
            .collect()
    }

    /// Zero-pads to `modes` coefficients; fails if that would drop data.
    pub fn resized(&self, modes: usize) -> Result<Self> {
        if modes < self.0.len() && self.0[modes..].iter().any(|c| *c != 0.0) {
            return Err(Error::Validation(format!(
                "cannot truncate a state with {} nonzero modes to {modes}",
                self.0.len()
            )));
        }
        let mut v = self.0.clone();
        v.resize(modes, 0.0);
        Ok(SpectralState(v))
    }
}

impl Index<usize> for SpectralState {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for SpectralState {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &SpectralState {
    type Output = SpectralState;
    fn add(self, rhs: &SpectralState) -> SpectralState {
        SpectralState(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &SpectralState {
    type Output = SpectralState;
    fn sub(self, rhs: &SpectralState) -> SpectralState {
        SpectralState(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &SpectralState {
    type Output = SpectralState;
    fn mul(self, s: f64) -> SpectralState {
        self.scaled(s)
    }
}

/// Diagonal operator with eigenvalues λ_γ ≤ 0 on the sine basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralOperator {
    eigenvalues: Vec<f64>,
}

impl SpectralOperator {
    /// Dirichlet Laplacian on [0, π]: λ_γ = −γ², γ = 1..N.
    pub fn dirichlet(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Validation("mode count must be at least 1".into()));
        }
        Ok(SpectralOperator {
            eigenvalues: (1..=modes).map(|g| -((g * g) as f64)).collect(),
        })
    }

    /// Any diagonal operator with finite, non-positive spectrum. Used for
    /// oracle constructions such as an eigenvalue-0 mode.
    pub fn from_eigenvalues(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::Validation("mode count must be at least 1".into()));
        }
        if eigenvalues.iter().any(|l| !l.is_finite() || *l > 0.0) {
            return Err(Error::Validation("eigenvalues must be finite and non-positive".into()));
        }
        Ok(SpectralOperator { eigenvalues })
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// A w, coefficientwise λ_γ w_γ.
    pub fn apply(&self, w: &SpectralState) -> SpectralState {
        w.hadamard(&self.eigenvalues)
    }

    /// Largest |λ_γ|.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, l| m.max(-l))
    }
}
