use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{MlpSpec, MlpWeights};
use crate::error::{Error, Result};
use crate::gp::Transform;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
    pub hidden: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 64,
            learning_rate: 1e-2,
            momentum: 0.9,
            seed: 0,
            hidden: vec![128, 128],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub weights: MlpWeights,
    /// Mean training loss per epoch, index 0 being the initial weights.
    pub train_loss: Vec<f64>,
    pub validation_loss: Vec<f64>,
    pub restarts: usize,
}

/// Rows whose Sobol index ends in 9 are held out, a tenth of any prefix.
pub fn validation_row(index: usize) -> bool {
    index % 10 == 9
}

const MAX_RESTARTS: usize = 3;

/// Mini-batch SGD with momentum on standardized targets. Returns the weights
/// with the lowest validation loss seen (the initial weights included).
///
/// Only points and summaries are accepted, so the learned map cannot depend
/// on any cost. `indices` are the rows' Sobol indices, used for the split.
pub fn train(
    points: &[Vec<f64>],
    targets: &[Vec<f64>],
    indices: &[usize],
    config: &TrainConfig,
    fingerprint: &str,
) -> Result<TrainReport> {
    let n = points.len();
    if n == 0 || targets.len() != n || indices.len() != n {
        return Err(Error::Training("points, targets and indices must be non-empty and aligned".into()));
    }
    let in_dim = points[0].len();
    let out_dim = targets[0].len();
    if n < 10 * out_dim {
        return Err(Error::Training(format!(
            "{n} rows is fewer than 10x the {out_dim} outputs"
        )));
    }
    let (train_idx, val_idx): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| !validation_row(indices[i]));
    if train_idx.is_empty() {
        return Err(Error::Training("no training rows after the split".into()));
    }
    // With very small sets every row may be held out; validate on training.
    let val_idx = if val_idx.is_empty() { train_idx.clone() } else { val_idx };

    let mut spec = MlpSpec::new(in_dim, out_dim);
    spec.hidden = config.hidden.clone();
    for d in 0..out_dim {
        let m = train_idx.iter().map(|&i| targets[i][d]).sum::<f64>() / train_idx.len() as f64;
        let v = train_idx.iter().map(|&i| (targets[i][d] - m).powi(2)).sum::<f64>() / train_idx.len() as f64;
        spec.out_mean[d] = m;
        spec.out_std[d] = if v.sqrt() > 1e-12 { v.sqrt() } else { 1.0 };
    }
    let init = MlpWeights::init(spec, config.seed)?;
    let ys: Vec<Vec<f64>> = targets.iter().map(|t| init.standardize(t)).collect();

    let mut lr = config.learning_rate;
    for restart in 0..=MAX_RESTARTS {
        match run_sgd(&init, points, &ys, &train_idx, &val_idx, config, lr) {
            Some((mut weights, train_loss, validation_loss)) => {
                weights.meta.epochs = config.epochs;
                weights.meta.final_loss = *train_loss.last().expect("epoch 0 recorded");
                weights.meta.validation_loss =
                    validation_loss.iter().copied().fold(f64::INFINITY, f64::min);
                weights.meta.learning_rate = lr;
                weights.meta.dataset_fingerprint = fingerprint.to_string();
                weights.meta.seed = config.seed;
                return Ok(TrainReport {
                    weights,
                    train_loss,
                    validation_loss,
                    restarts: restart,
                });
            }
            None => lr *= 0.5,
        }
    }
    Err(Error::Training(format!(
        "loss diverged after {MAX_RESTARTS} step-size halvings"
    )))
}

type SgdResult = (MlpWeights, Vec<f64>, Vec<f64>);

fn run_sgd(
    init: &MlpWeights,
    points: &[Vec<f64>],
    ys: &[Vec<f64>],
    train_idx: &[usize],
    val_idx: &[usize],
    config: &TrainConfig,
    lr: f64,
) -> Option<SgdResult> {
    let eval = |w: &MlpWeights, idx: &[usize]| -> f64 {
        let xs: Vec<&[f64]> = idx.iter().map(|&i| points[i].as_slice()).collect();
        let ts: Vec<&[f64]> = idx.iter().map(|&i| ys[i].as_slice()).collect();
        w.loss(&xs, &ts).unwrap_or(f64::NAN)
    };
    let mut w = init.clone();
    let mut params = w.params_flat();
    let mut velocity = vec![0.0; params.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
    let mut order = train_idx.to_vec();
    let mut train_loss = vec![eval(&w, train_idx)];
    let mut validation_loss = vec![eval(&w, val_idx)];
    let mut best = (validation_loss[0], w.clone());
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size.max(1)) {
            let xs: Vec<&[f64]> = chunk.iter().map(|&i| points[i].as_slice()).collect();
            let ts: Vec<&[f64]> = chunk.iter().map(|&i| ys[i].as_slice()).collect();
            let (_, g) = w.grad(&xs, &ts).ok()?;
            for ((p, v), g) in params.iter_mut().zip(&mut velocity).zip(g.flat()) {
                *v = config.momentum * *v - lr * g;
                *p += *v;
            }
            w.set_params_flat(&params).ok()?;
        }
        let tl = eval(&w, train_idx);
        let vl = eval(&w, val_idx);
        if !tl.is_finite() || !vl.is_finite() {
            return None;
        }
        train_loss.push(tl);
        validation_loss.push(vl);
        if vl < best.0 {
            best = (vl, w.clone());
        }
    }
    Some((best.1, train_loss, validation_loss))
}

/// Trained network as a kernel transform. Outputs are in standardized
/// units so unit length scales are comparable across summary columns.
#[derive(Debug, Clone)]
pub struct NnTransform {
    pub weights: MlpWeights,
}

impl Transform for NnTransform {
    fn dim(&self) -> usize {
        self.weights.spec.output_dim
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.weights.forward_standardized(x)
    }
}
