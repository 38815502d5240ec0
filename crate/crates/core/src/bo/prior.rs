use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::control::CostId;
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::gp::MeanFunction;

/// Nearest-neighbor lookup of simulated costs over a random subset of a
/// dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct CostPrior {
    pub points: Vec<Vec<f64>>,
    pub costs: Vec<f64>,
}

impl CostPrior {
    pub fn new(points: Vec<Vec<f64>>, costs: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("cost prior subset"));
        }
        if points.len() != costs.len() {
            return Err(Error::Shape {
                expected: points.len(),
                got: costs.len(),
            });
        }
        Ok(Self { points, costs })
    }

    /// Index of the closest stored point; the first one on ties.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, p) in self.points.iter().enumerate() {
            let d: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }
}

impl MeanFunction for CostPrior {
    fn mean(&self, x: &[f64]) -> f64 {
        self.costs[self.nearest(x)]
    }
}

/// Prior mean from `subset` randomly chosen rows of `dataset` under `cost`.
pub fn build_cost_prior(dataset: &Dataset, cost: CostId, subset: usize, seed: u64) -> Result<CostPrior> {
    let col = dataset.cost_column(cost)?;
    let n = dataset.len();
    let k = subset.min(n);
    if k == 0 {
        return Err(Error::Empty("cost prior subset"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = sample(&mut rng, n, k).into_vec();
    picked.sort_unstable();
    CostPrior::new(
        picked.iter().map(|&i| dataset.rows[i].point.clone()).collect(),
        picked.iter().map(|&i| dataset.rows[i].costs[col]).collect(),
    )
}

/// Memoizes another mean function by the exact bits of its input.
pub struct CachedMean {
    inner: Arc<dyn MeanFunction>,
    cache: Mutex<HashMap<Vec<u64>, f64>>,
}

impl CachedMean {
    pub fn new(inner: Arc<dyn MeanFunction>) -> Self {
        Self {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl MeanFunction for CachedMean {
    fn mean(&self, x: &[f64]) -> f64 {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(v) = self.cache.lock().expect("mean cache poisoned").get(&key) {
            return *v;
        }
        let v = self.inner.mean(x);
        self.cache.lock().expect("mean cache poisoned").insert(key, v);
        v
    }
}
