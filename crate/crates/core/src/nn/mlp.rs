use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Architecture and output standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    /// Per-output mean and standard deviation of the training targets.
    pub out_mean: Vec<f64>,
    pub out_std: Vec<f64>,
}

impl MlpSpec {
    /// Two tanh layers of 128 units, identity standardization.
    pub fn new(input_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden: vec![128, 128],
            output_dim,
            out_mean: vec![0.0; output_dim],
            out_std: vec![1.0; output_dim],
        }
    }

    fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim];
        w.extend(&self.hidden);
        w.push(self.output_dim);
        w
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() || self.hidden.contains(&0) || self.input_dim == 0 || self.output_dim == 0
        {
            return Err(Error::InvalidConfig("network needs non-empty layers".into()));
        }
        if self.out_mean.len() != self.output_dim || self.out_std.len() != self.output_dim {
            return Err(Error::Shape {
                expected: self.output_dim,
                got: self.out_mean.len().min(self.out_std.len()),
            });
        }
        Ok(())
    }
}

/// One affine layer, `weights` stored row-major as `out × in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.weights)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub epochs: usize,
    pub final_loss: f64,
    pub validation_loss: f64,
    pub learning_rate: f64,
    pub dataset_fingerprint: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpWeights {
    pub spec: MlpSpec,
    pub layers: Vec<Layer>,
    pub meta: TrainMeta,
}

/// Gradient with the same layout as [`MlpWeights::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<DMatrix<f64>>,
    pub bias: Vec<DVector<f64>>,
}

impl Gradient {
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.bias) {
            for r in 0..w.nrows() {
                for c in 0..w.ncols() {
                    out.push(w[(r, c)]);
                }
            }
            out.extend(b.iter());
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.flat().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn batch_matrix(rows: &[&[f64]], width: usize) -> Result<DMatrix<f64>> {
    for r in rows {
        if r.len() != width {
            return Err(Error::Shape {
                expected: width,
                got: r.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]))
}

impl MlpWeights {
    /// Glorot-uniform weights and zero biases.
    pub fn init(spec: MlpSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let widths = spec.widths();
        let layers = widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
                Layer {
                    rows: fan_out,
                    cols: fan_in,
                    weights: (0..fan_in * fan_out).map(|_| rng.random_range(-a..a)).collect(),
                    bias: vec![0.0; fan_out],
                }
            })
            .collect();
        Ok(Self {
            spec,
            layers,
            meta: TrainMeta::default(),
        })
    }

    /// All weights and biases set to zero.
    pub fn zeros(spec: MlpSpec) -> Result<Self> {
        let mut w = Self::init(spec, 0)?;
        for l in &mut w.layers {
            l.weights.iter_mut().for_each(|v| *v = 0.0);
        }
        Ok(w)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Weights then biases, layer by layer; matches [`Gradient::flat`].
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(&l.weights);
            out.extend(&l.bias);
        }
        out
    }

    pub fn set_params_flat(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.param_count() {
            return Err(Error::Shape {
                expected: self.param_count(),
                got: p.len(),
            });
        }
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&p[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&p[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    /// Standardized outputs for a batch, plus every layer's activations.
    fn forward_batch(&self, x: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let mut acts = vec![x.clone()];
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = acts[i].clone() * l.matrix().transpose();
            for mut row in z.row_iter_mut() {
                for (v, b) in row.iter_mut().zip(&l.bias) {
                    *v += b;
                }
            }
            if i < last {
                z.apply(|v| *v = v.tanh());
            }
            acts.push(z);
        }
        acts
    }

    /// Network output in standardized units.
    pub fn forward_standardized(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = batch_matrix(&[x], self.spec.input_dim)?;
        let out = self.forward_batch(&m).pop().expect("at least one layer");
        Ok(out.row(0).iter().copied().collect())
    }

    /// Predicted summary in physical units.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.forward_standardized(x)?;
        Ok(z.iter()
            .zip(&self.spec.out_mean)
            .zip(&self.spec.out_std)
            .map(|((z, m), s)| z * s + m)
            .collect())
    }

    /// Physical targets to standardized units.
    pub fn standardize(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.spec.out_mean)
            .zip(&self.spec.out_std)
            .map(|((y, m), s)| (y - m) / s)
            .collect()
    }

    /// `½ Σ‖ŷ - y‖² / |batch|` with `y` already standardized.
    pub fn loss(&self, xs: &[&[f64]], ys: &[&[f64]]) -> Result<f64> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::Empty("batch"));
        }
        let x = batch_matrix(xs, self.spec.input_dim)?;
        let y = batch_matrix(ys, self.spec.output_dim)?;
        let out = self.forward_batch(&x).pop().expect("at least one layer");
        Ok(0.5 * (out - y).norm_squared() / xs.len() as f64)
    }

    /// Exact gradient of [`MlpWeights::loss`].
    pub fn grad(&self, xs: &[&[f64]], ys: &[&[f64]]) -> Result<(f64, Gradient)> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::Empty("batch"));
        }
        let n = xs.len() as f64;
        let x = batch_matrix(xs, self.spec.input_dim)?;
        let y = batch_matrix(ys, self.spec.output_dim)?;
        let acts = self.forward_batch(&x);
        let out = acts.last().expect("at least one layer");
        let diff = out - y;
        let loss = 0.5 * diff.norm_squared() / n;
        let mut delta = diff / n;
        let nl = self.layers.len();
        let mut gw = vec![DMatrix::zeros(0, 0); nl];
        let mut gb = vec![DVector::zeros(0); nl];
        for i in (0..nl).rev() {
            gw[i] = delta.transpose() * &acts[i];
            gb[i] = DVector::from_iterator(delta.ncols(), delta.column_iter().map(|c| c.sum()));
            if i > 0 {
                let mut back = &delta * self.layers[i].matrix();
                // tanh' = 1 - a²
                back.zip_apply(&acts[i], |d, a| *d *= 1.0 - a * a);
                delta = back;
            }
        }
        Ok((loss, Gradient { weights: gw, bias: gb }))
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    /// Largest singular value of each weight matrix, by power iteration.
    pub fn spectral_norms(&self, iterations: usize) -> Vec<f64> {
        self.layers
            .iter()
            .map(|l| {
                let m = l.matrix();
                let mut v = DVector::from_element(m.ncols(), 1.0 / (m.ncols() as f64).sqrt());
                let mut sigma = 0.0;
                for _ in 0..iterations {
                    let u = &m * &v;
                    let w = m.transpose() * &u;
                    let nw = w.norm();
                    if nw == 0.0 {
                        return 0.0;
                    }
                    sigma = nw.sqrt();
                    v = w / nw;
                }
                sigma
            })
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::parse("weights", e))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let w: Self = serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))?;
        w.spec.validate()?;
        let widths = w.spec.widths();
        if w.layers.len() + 1 != widths.len()
            || w.layers.iter().zip(widths.windows(2)).any(|(l, s)| {
                l.cols != s[0] || l.rows != s[1] || l.weights.len() != s[0] * s[1] || l.bias.len() != s[1]
            })
        {
            return Err(Error::parse(path.display().to_string(), "layer shapes do not match spec"));
        }
        Ok(w)
    }
}
