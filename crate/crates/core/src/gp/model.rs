use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kernel::{GpHyper, KernelSpec};
use crate::error::{Error, Result};

/// Diagonal jitter tried in turn when `K + σ_n² I` fails to factor.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-8, 1e-6, 1e-4];
/// Box constraint on every hyperparameter in natural units.
pub const HYPER_BOUNDS: (f64, f64) = (1e-3, 1e3);

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A non-constant prior mean.
pub trait MeanFunction: Send + Sync {
    fn mean(&self, x: &[f64]) -> f64;
}

/// Prior mean of the GP. Both forms add the constant offset `hyper.mean`.
#[derive(Clone)]
pub enum PriorMean {
    Constant,
    Function(Arc<dyn MeanFunction>),
}

impl fmt::Debug for PriorMean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorMean::Constant => f.write_str("Constant"),
            PriorMean::Function(_) => f.write_str("Function"),
        }
    }
}

/// Outcome of [`GpModel::optimize_hypers`].
#[derive(Debug, Clone, PartialEq)]
pub struct HyperFit {
    pub hyper: GpHyper,
    pub log_evidence: f64,
    /// Evidence at the defaults, for comparison.
    pub default_evidence: f64,
    /// Every start failed; the incoming hyperparameters were kept.
    pub failed: bool,
}

#[derive(Debug, Clone)]
struct Factor {
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    jitter: f64,
}

/// GP regression model with a cached factorization of `K + σ_n² I`.
#[derive(Debug, Clone)]
pub struct GpModel {
    pub kernel: KernelSpec,
    pub prior: PriorMean,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    features: Vec<Vec<f64>>,
    /// Prior mean at the inputs, offset excluded.
    prior_at_x: Vec<f64>,
    factor: Option<Factor>,
}

impl GpModel {
    pub fn new(kernel: KernelSpec, prior: PriorMean) -> Self {
        Self {
            kernel,
            prior,
            x: Vec::new(),
            y: Vec::new(),
            features: Vec::new(),
            prior_at_x: Vec::new(),
            factor: None,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn prior_mean(&self, x: &[f64]) -> f64 {
        self.base_prior(x) + self.kernel.hyper.mean
    }

    fn base_prior(&self, x: &[f64]) -> f64 {
        match &self.prior {
            PriorMean::Constant => 0.0,
            PriorMean::Function(f) => f.mean(x),
        }
    }

    /// Jitter used by the current factorization.
    pub fn jitter(&self) -> Option<f64> {
        self.factor.as_ref().map(|f| f.jitter)
    }

    /// Append an observation and refactor.
    pub fn add(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::Inconsistent(format!("non-finite target at {x:?}")));
        }
        self.prior_at_x.push(self.base_prior(&x));
        self.x.push(x);
        self.y.push(y);
        self.refit()
    }

    /// Replace all observations.
    pub fn set_data(&mut self, x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<()> {
        if x.len() != y.len() {
            return Err(Error::Shape {
                expected: x.len(),
                got: y.len(),
            });
        }
        self.prior_at_x = x.iter().map(|p| self.base_prior(p)).collect();
        self.x = x;
        self.y = y;
        self.refit()
    }

    /// Recompute features and the factorization, e.g. after the kernel's
    /// hyperparameters or mismatch data changed.
    pub fn refit(&mut self) -> Result<()> {
        self.kernel.hyper.validate()?;
        self.features = self
            .x
            .iter()
            .map(|p| self.kernel.features(p))
            .collect::<Result<_>>()?;
        self.factor = if self.x.is_empty() {
            None
        } else {
            Some(self.factorize(&self.kernel.hyper)?)
        };
        Ok(())
    }

    fn gram(&self, hyper: &GpHyper) -> DMatrix<f64> {
        let n = self.x.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = super::kernel::se_kernel(
                    &self.features[i],
                    &self.features[j],
                    hyper.signal_var,
                    &hyper.lengths,
                );
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }

    /// Noise-free Gram matrix of the training inputs.
    pub fn gram_matrix(&self) -> DMatrix<f64> {
        self.gram(&self.kernel.hyper)
    }

    fn residuals(&self, offset: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.y.len(),
            self.y.iter().zip(&self.prior_at_x).map(|(y, m)| y - m - offset),
        )
    }

    /// Offset maximizing the evidence for the given kernel factorization,
    /// `1ᵀK⁻¹r / 1ᵀK⁻¹1` with `r` the targets minus the base prior.
    fn best_offset(&self, chol: &Cholesky<f64, Dyn>) -> f64 {
        let n = self.y.len();
        let ones = DVector::from_element(n, 1.0);
        let kinv_one = chol.solve(&ones);
        let r = self.residuals(0.0);
        r.dot(&kinv_one) / ones.dot(&kinv_one)
    }

    fn factorize(&self, hyper: &GpHyper) -> Result<Factor> {
        let mut k = self.gram(hyper);
        let n = k.nrows();
        for i in 0..n {
            k[(i, i)] += hyper.noise * hyper.noise;
        }
        for &jitter in &JITTER_LADDER {
            let mut kj = k.clone();
            for i in 0..n {
                kj[(i, i)] += jitter;
            }
            if let Some(chol) = kj.cholesky() {
                let alpha = chol.solve(&self.residuals(hyper.mean));
                return Ok(Factor { chol, alpha, jitter });
            }
        }
        Err(Error::Cholesky {
            jitter: JITTER_LADDER[JITTER_LADDER.len() - 1],
        })
    }

    /// Posterior mean and variance of the latent function at `x`.
    pub fn posterior(&self, x: &[f64]) -> Result<(f64, f64)> {
        let feat = self.kernel.features(x)?;
        Ok(self.posterior_features(&feat, self.prior_mean(x)))
    }

    /// Posterior given precomputed kernel features and prior mean at the
    /// query point.
    pub fn posterior_features(&self, feat: &[f64], prior: f64) -> (f64, f64) {
        let hyper = &self.kernel.hyper;
        let Some(factor) = &self.factor else {
            return (prior, hyper.signal_var);
        };
        let n = self.x.len();
        let ks = DVector::from_iterator(
            n,
            self.features
                .iter()
                .map(|f| super::kernel::se_kernel(f, feat, hyper.signal_var, &hyper.lengths)),
        );
        let mean = prior + ks.dot(&factor.alpha);
        let v = factor
            .chol
            .l_dirty()
            .solve_lower_triangular(&ks)
            .expect("Cholesky factor has a positive diagonal");
        let var = hyper.signal_var - v.norm_squared();
        (mean, if var < 0.0 { 0.0 } else { var })
    }

    /// Log evidence and its gradient with respect to
    /// `[ln σ_k², ln ℓ_1, …, ln ℓ_d, ln σ_n]`.
    pub fn log_marginal_likelihood(&self) -> Result<(f64, Vec<f64>)> {
        self.lml_at(&self.kernel.hyper)
    }

    /// Evidence with the mean offset replaced by its optimum. The gradient
    /// is the partial one at that offset, which equals the total gradient
    /// of the profiled evidence.
    fn lml_profiled(&self, hyper: &GpHyper) -> Result<(f64, Vec<f64>, f64)> {
        let factor = self.factorize(hyper)?;
        let mut h = hyper.clone();
        h.mean = self.best_offset(&factor.chol);
        let (v, g) = self.lml_at(&h)?;
        Ok((v, g, h.mean))
    }

    fn lml_at(&self, hyper: &GpHyper) -> Result<(f64, Vec<f64>)> {
        let n = self.x.len();
        if n == 0 {
            return Err(Error::Empty("training set"));
        }
        hyper.validate()?;
        let factor = self.factorize(hyper)?;
        let r = self.residuals(hyper.mean);
        let log_det: f64 = factor.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
        let value = -0.5 * r.dot(&factor.alpha) - 0.5 * log_det - 0.5 * n as f64 * LN_2PI;

        // dL/dθ = ½ tr((ααᵀ - K⁻¹) ∂K/∂θ)
        let kinv = factor.chol.inverse();
        let a = &factor.alpha;
        let w = a * a.transpose() - kinv;
        let kf = self.gram(hyper);
        let d = hyper.lengths.len();
        let mut grad = vec![0.0; d + 2];
        grad[0] = 0.5 * w.component_mul(&kf).sum();
        for (l, len) in hyper.lengths.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let diff = (self.features[i][l] - self.features[j][l]) / len;
                    acc += w[(i, j)] * kf[(i, j)] * diff * diff;
                }
            }
            grad[1 + l] = 0.5 * acc;
        }
        grad[d + 1] = w.trace() * hyper.noise * hyper.noise;
        Ok((value, grad))
    }

    /// Multi-start projected gradient ascent on the log evidence over the
    /// log kernel hyperparameters, with the mean offset profiled out at each
    /// step. The first start is the default hyperparameters, the second the
    /// current ones, the rest random perturbations of the defaults. The model
    /// is refit with the winner.
    pub fn optimize_hypers(&mut self, restarts: usize, seed: u64) -> Result<HyperFit> {
        if self.x.len() < 2 {
            return Err(Error::Inconsistent("hyperparameter fit needs 2 points".into()));
        }
        let dim = self.kernel.feature_dim();
        let mut defaults = GpHyper::defaults(dim);
        defaults.mean = self.kernel.hyper.mean;
        let default_evidence = self.lml_at(&defaults).map(|r| r.0).unwrap_or(f64::NEG_INFINITY);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut starts = vec![defaults.to_log(), self.kernel.hyper.to_log()];
        for _ in 1..restarts.max(1) {
            let t: Vec<f64> = defaults
                .to_log()
                .iter()
                .map(|v| v + rng.random_range(-2.0..2.0))
                .collect();
            starts.push(t);
        }
        let mut best: Option<(f64, Vec<f64>, f64)> = None;
        for start in starts {
            if let Some(r) = self.ascend(start) {
                if best.as_ref().is_none_or(|b| r.0 > b.0) {
                    best = Some(r);
                }
            }
        }
        match best {
            Some((v, t, mean)) => {
                self.kernel.hyper = GpHyper::from_log(&t, mean);
                self.refit()?;
                Ok(HyperFit {
                    hyper: self.kernel.hyper.clone(),
                    log_evidence: v,
                    default_evidence,
                    failed: false,
                })
            }
            None => Ok(HyperFit {
                hyper: self.kernel.hyper.clone(),
                log_evidence: f64::NEG_INFINITY,
                default_evidence,
                failed: true,
            }),
        }
    }

    fn ascend(&self, start: Vec<f64>) -> Option<(f64, Vec<f64>, f64)> {
        let (lo, hi) = (HYPER_BOUNDS.0.ln(), HYPER_BOUNDS.1.ln());
        let project = |t: &mut Vec<f64>| t.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
        let mut theta = start;
        project(&mut theta);
        let (mut value, mut grad, mut mean) = self.lml_profiled(&GpHyper::from_log(&theta, 0.0)).ok()?;
        let mut step = 0.5;
        for _ in 0..200 {
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm < 1e-6 {
                break;
            }
            let mut improved = false;
            while step > 1e-8 {
                let mut cand: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t + step * g / gnorm).collect();
                project(&mut cand);
                if let Ok((v, g, m)) = self.lml_profiled(&GpHyper::from_log(&cand, 0.0)) {
                    if v > value {
                        let moved = cand.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                        theta = cand;
                        let gain = v - value;
                        value = v;
                        grad = g;
                        mean = m;
                        improved = moved > 1e-10 && gain > 1e-12;
                        step *= 2.0;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        Some((value, theta, mean))
    }
}
