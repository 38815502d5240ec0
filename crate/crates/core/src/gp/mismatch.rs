use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kernel::se_kernel;
use crate::error::{Error, Result};

/// Independent zero-mean GPs, one per transform dimension, over the
/// observed differences `φ_sim(x) - φ_hw(x)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MismatchData")]
pub struct MismatchModel {
    pub dim: usize,
    /// Unit-cube length scale, shared by all dimensions.
    pub length: f64,
    pub signal_var: f64,
    pub noise: f64,
    pub points: Vec<Vec<f64>>,
    pub diffs: Vec<Vec<f64>>,
    #[serde(skip)]
    alphas: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct MismatchData {
    dim: usize,
    length: f64,
    signal_var: f64,
    noise: f64,
    points: Vec<Vec<f64>>,
    diffs: Vec<Vec<f64>>,
}

impl TryFrom<MismatchData> for MismatchModel {
    type Error = Error;

    fn try_from(d: MismatchData) -> Result<Self> {
        let mut m = Self {
            dim: d.dim,
            length: d.length,
            signal_var: d.signal_var,
            noise: d.noise,
            points: d.points,
            diffs: d.diffs,
            alphas: Vec::new(),
        };
        m.refit()?;
        Ok(m)
    }
}

impl MismatchModel {
    /// `ℓ = 0.3`, `σ_k = 1`, `σ_n = 0.1`.
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            length: 0.3,
            signal_var: 1.0,
            noise: 0.1,
            points: Vec::new(),
            diffs: Vec::new(),
            alphas: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn k(&self, a: &[f64], b: &[f64]) -> f64 {
        let lengths = vec![self.length; a.len()];
        se_kernel(a, b, self.signal_var, &lengths)
    }

    /// Record `φ_sim(x) - φ_hw(x)` at `x` and refit.
    pub fn update(&mut self, x: &[f64], phi_sim: &[f64], phi_hw: &[f64]) -> Result<()> {
        if phi_sim.len() != self.dim || phi_hw.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                got: if phi_sim.len() != self.dim { phi_sim.len() } else { phi_hw.len() },
            });
        }
        if phi_sim.iter().chain(phi_hw).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteTransform { point: x.to_vec() });
        }
        self.points.push(x.to_vec());
        self.diffs
            .push(phi_sim.iter().zip(phi_hw).map(|(s, h)| s - h).collect());
        self.refit()
    }

    /// Recompute the cached weights from `points` and `diffs`.
    pub fn refit(&mut self) -> Result<()> {
        let n = self.points.len();
        self.alphas.clear();
        if n == 0 {
            return Ok(());
        }
        let mut k = DMatrix::from_fn(n, n, |i, j| self.k(&self.points[i], &self.points[j]));
        for i in 0..n {
            k[(i, i)] += self.noise * self.noise;
        }
        let chol = k.cholesky().ok_or(Error::Cholesky { jitter: 0.0 })?;
        for d in 0..self.dim {
            let y = DVector::from_fn(n, |i, _| self.diffs[i][d]);
            self.alphas.push(chol.solve(&y).iter().copied().collect());
        }
        Ok(())
    }

    /// Posterior mean `ḡ(x)`; zero without data.
    pub fn mean(&self, x: &[f64]) -> Vec<f64> {
        if self.alphas.len() != self.dim || self.points.is_empty() {
            return vec![0.0; self.dim];
        }
        let ks: Vec<f64> = self.points.iter().map(|p| self.k(p, x)).collect();
        self.alphas
            .iter()
            .map(|a| a.iter().zip(&ks).map(|(a, k)| a * k).sum())
            .collect()
    }
}
