use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::mismatch::MismatchModel;
use crate::error::{Error, Result};

/// Maps a unit-cube point to a feature vector.
pub trait Transform: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
}

/// Memoizes another transform by the exact bit pattern of its input.
pub struct CachedTransform {
    inner: Arc<dyn Transform>,
    cache: Mutex<HashMap<Vec<u64>, Vec<f64>>>,
}

impl CachedTransform {
    pub fn new(inner: Arc<dyn Transform>) -> Self {
        Self {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl Transform for CachedTransform {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(v) = self.cache.lock().expect("transform cache poisoned").get(&key) {
            return Ok(v.clone());
        }
        let v = self.inner.apply(x)?;
        self.cache
            .lock()
            .expect("transform cache poisoned")
            .insert(key, v.clone());
        Ok(v)
    }
}

/// Signal variance `σ_k²`, per-feature length scales, noise `σ_n` and the
/// constant prior mean `μ₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpHyper {
    pub signal_var: f64,
    pub lengths: Vec<f64>,
    pub noise: f64,
    pub mean: f64,
}

impl GpHyper {
    /// `μ₀ = 0`, `ℓ = 1`, `σ_k² = 1`, `σ_n = 0.1`.
    pub fn defaults(dim: usize) -> Self {
        Self {
            signal_var: 1.0,
            lengths: vec![1.0; dim],
            noise: 0.1,
            mean: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.signal_var > 0.0
            && self.noise > 0.0
            && self.lengths.iter().all(|l| *l > 0.0)
            && self.mean.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig("GP hyperparameters must be positive".into()))
        }
    }

    /// `[ln σ_k², ln ℓ_1, …, ln ℓ_d, ln σ_n]`.
    pub fn to_log(&self) -> Vec<f64> {
        let mut v = vec![self.signal_var.ln()];
        v.extend(self.lengths.iter().map(|l| l.ln()));
        v.push(self.noise.ln());
        v
    }

    pub fn from_log(theta: &[f64], mean: f64) -> Self {
        let d = theta.len() - 2;
        Self {
            signal_var: theta[0].exp(),
            lengths: theta[1..=d].iter().map(|t| t.exp()).collect(),
            noise: theta[d + 1].exp(),
            mean,
        }
    }
}

/// `σ² exp(-½ Σ ((a_k - b_k)/ℓ_k)²)`.
pub fn se_kernel(a: &[f64], b: &[f64], signal_var: f64, lengths: &[f64]) -> f64 {
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(lengths)
        .map(|((x, y), l)| {
            let t = (x - y) / l;
            t * t
        })
        .sum();
    signal_var * (-0.5 * r2).exp()
}

/// Which inputs the squared-exponential kernel compares.
#[derive(Clone)]
pub enum KernelVariant {
    /// Raw unit-cube coordinates.
    Se,
    /// `φ(x)`.
    Transform(Arc<dyn Transform>),
    /// `[φ(x); ḡ(x)]` with separate length-scale blocks.
    Adjusted {
        phi: Arc<dyn Transform>,
        mismatch: MismatchModel,
    },
    /// `φ(x) - ḡ(x)`, the mismatch-corrected transform.
    AdjustedV2 {
        phi: Arc<dyn Transform>,
        mismatch: MismatchModel,
    },
}

impl fmt::Debug for KernelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelVariant::Se => f.write_str("Se"),
            KernelVariant::Transform(p) => write!(f, "Transform(dim {})", p.dim()),
            KernelVariant::Adjusted { phi, mismatch } => {
                write!(f, "Adjusted(dim {}, {} mismatch points)", phi.dim(), mismatch.len())
            }
            KernelVariant::AdjustedV2 { phi, mismatch } => {
                write!(f, "AdjustedV2(dim {}, {} mismatch points)", phi.dim(), mismatch.len())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub variant: KernelVariant,
    pub hyper: GpHyper,
}

impl KernelSpec {
    /// Kernel over `input_dim`-dimensional points with default hyperparameters.
    pub fn new(variant: KernelVariant, input_dim: usize) -> Self {
        let dim = Self::feature_dim_of(&variant, input_dim);
        Self {
            variant,
            hyper: GpHyper::defaults(dim),
        }
    }

    fn feature_dim_of(variant: &KernelVariant, input_dim: usize) -> usize {
        match variant {
            KernelVariant::Se => input_dim,
            KernelVariant::Transform(phi) => phi.dim(),
            KernelVariant::Adjusted { phi, .. } => 2 * phi.dim(),
            KernelVariant::AdjustedV2 { phi, .. } => phi.dim(),
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.hyper.lengths.len()
    }

    pub fn mismatch(&self) -> Option<&MismatchModel> {
        match &self.variant {
            KernelVariant::Adjusted { mismatch, .. } | KernelVariant::AdjustedV2 { mismatch, .. } => {
                Some(mismatch)
            }
            _ => None,
        }
    }

    pub fn mismatch_mut(&mut self) -> Option<&mut MismatchModel> {
        match &mut self.variant {
            KernelVariant::Adjusted { mismatch, .. } | KernelVariant::AdjustedV2 { mismatch, .. } => {
                Some(mismatch)
            }
            _ => None,
        }
    }

    pub fn transform(&self) -> Option<&Arc<dyn Transform>> {
        match &self.variant {
            KernelVariant::Se => None,
            KernelVariant::Transform(phi)
            | KernelVariant::Adjusted { phi, .. }
            | KernelVariant::AdjustedV2 { phi, .. } => Some(phi),
        }
    }

    /// The vector the squared-exponential form is applied to.
    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        let out = match &self.variant {
            KernelVariant::Se => x.to_vec(),
            KernelVariant::Transform(phi) => phi.apply(x)?,
            KernelVariant::Adjusted { phi, mismatch } => {
                let mut v = phi.apply(x)?;
                v.extend(mismatch.mean(x));
                v
            }
            KernelVariant::AdjustedV2 { phi, mismatch } => {
                let g = mismatch.mean(x);
                phi.apply(x)?.iter().zip(g).map(|(p, g)| p - g).collect()
            }
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteTransform { point: x.to_vec() });
        }
        if out.len() != self.feature_dim() {
            return Err(Error::Shape {
                expected: self.feature_dim(),
                got: out.len(),
            });
        }
        Ok(out)
    }

    pub fn eval_features(&self, a: &[f64], b: &[f64]) -> f64 {
        se_kernel(a, b, self.hyper.signal_var, &self.hyper.lengths)
    }
}

/// `k(x_i, x_j)` for any kernel variant.
pub fn kernel_eval(spec: &KernelSpec, xi: &[f64], xj: &[f64]) -> Result<f64> {
    let a = spec.features(xi)?;
    let b = spec.features(xj)?;
    Ok(spec.eval_features(&a, &b))
}
