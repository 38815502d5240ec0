use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::acquisition::Acquisition;
use super::run::{propose_next, Evaluation, RunHistory, TrialRecord};
use crate::control::CostId;
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::gp::{GpHyper, GpModel, KernelSpec, KernelVariant, MeanFunction, PriorMean};

/// Cells per duty-factor axis (0.05 increments, with 1.0 in the last cell).
pub const GRID_CELLS: usize = 21;
/// Controllers kept per cell.
const CELL_CAPACITY: usize = 5;

/// Cell index of a duty factor.
pub fn duty_cell(duty: f64) -> usize {
    // The epsilon keeps exact multiples of 0.05 out of the cell below.
    (((duty.clamp(0.0, 1.0) * 20.0) + 1e-9).floor() as usize).min(GRID_CELLS - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub point: Vec<f64>,
    pub cost: f64,
    /// Sobol index of the source dataset row.
    pub row: usize,
}

/// Best simulated controllers binned by left/right duty factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorMap {
    /// Row-major `[left][right]`, each sorted by ascending cost.
    pub cells: Vec<Vec<MapEntry>>,
    pub dataset_fingerprint: String,
    pub fidelity: String,
}

impl BehaviorMap {
    pub fn empty(fingerprint: impl Into<String>, fidelity: impl Into<String>) -> Self {
        Self {
            cells: vec![Vec::new(); GRID_CELLS * GRID_CELLS],
            dataset_fingerprint: fingerprint.into(),
            fidelity: fidelity.into(),
        }
    }

    pub fn cell(&self, left: usize, right: usize) -> &[MapEntry] {
        &self.cells[left * GRID_CELLS + right]
    }

    /// Insert keeping the cell sorted and capped; returns whether kept.
    pub fn insert(&mut self, duty: [f64; 2], entry: MapEntry) -> bool {
        let cell = &mut self.cells[duty_cell(duty[0]) * GRID_CELLS + duty_cell(duty[1])];
        let pos = cell.partition_point(|e| e.cost <= entry.cost);
        if pos >= CELL_CAPACITY {
            return false;
        }
        cell.insert(pos, entry);
        cell.truncate(CELL_CAPACITY);
        true
    }

    /// `(left, right)` indices of non-empty cells in row-major order.
    pub fn occupied(&self) -> Vec<(usize, usize)> {
        (0..self.cells.len())
            .filter(|&i| !self.cells[i].is_empty())
            .map(|i| (i / GRID_CELLS, i % GRID_CELLS))
            .collect()
    }

    pub fn occupancy(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_empty()).count()
    }
}

/// Bin every dataset row by its duty factors and keep the cheapest five
/// per cell under `cost`.
pub fn build_behavior_map(dataset: &Dataset, cost: CostId, fingerprint: &str) -> Result<BehaviorMap> {
    let col = dataset.cost_column(cost)?;
    let mut map = BehaviorMap::empty(fingerprint, dataset.meta.spec.fidelity.tag());
    for r in &dataset.rows {
        map.insert(
            r.duty,
            MapEntry {
                point: r.point.clone(),
                cost: r.costs[col],
                row: r.index,
            },
        );
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItneConfig {
    pub budget: usize,
    pub use_prior: bool,
    pub acquisition: Acquisition,
    /// Length scale over duty-factor coordinates.
    pub length: f64,
    pub signal_var: f64,
    pub noise: f64,
}

impl Default for ItneConfig {
    fn default() -> Self {
        Self {
            budget: 50,
            use_prior: true,
            acquisition: Acquisition::Ei,
            length: 0.1,
            signal_var: 1.0,
            noise: 0.1,
        }
    }
}

struct CellPrior {
    centers: Vec<Vec<f64>>,
    costs: Vec<f64>,
}

impl MeanFunction for CellPrior {
    fn mean(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .position(|c| c.as_slice() == x)
            .map_or(0.0, |i| self.costs[i])
    }
}

/// BO over occupied cells of a behavior map. One stored controller per
/// cell is drawn with `variant_seed`; the search only ever evaluates those.
pub fn itne_run(
    map: &BehaviorMap,
    variant_seed: u64,
    config: &ItneConfig,
    objective: &mut dyn FnMut(&[f64]) -> Result<Evaluation>,
    history: RunHistory,
) -> Result<RunHistory> {
    let cells = map.occupied();
    if cells.is_empty() {
        return Err(Error::Empty("behavior map"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(variant_seed);
    let chosen: Vec<&MapEntry> = cells
        .iter()
        .map(|&(l, r)| {
            let c = map.cell(l, r);
            &c[rng.random_range(0..c.len())]
        })
        .collect();
    let centers: Vec<Vec<f64>> = cells
        .iter()
        .map(|&(l, r)| vec![l as f64 * 0.05, r as f64 * 0.05])
        .collect();
    let prior = if config.use_prior {
        PriorMean::Function(std::sync::Arc::new(CellPrior {
            centers: centers.clone(),
            costs: chosen.iter().map(|e| e.cost).collect(),
        }))
    } else {
        PriorMean::Constant
    };
    let mut kernel = KernelSpec::new(KernelVariant::Se, 2);
    kernel.hyper = GpHyper {
        signal_var: config.signal_var,
        lengths: vec![config.length; 2],
        noise: config.noise,
        mean: 0.0,
    };
    let mut model = GpModel::new(kernel, prior);
    let mut history = history;
    let mut skip = vec![false; cells.len()];
    for _ in 0..config.budget {
        let start = Instant::now();
        let idx = match propose_next(&model, &centers, &skip, config.acquisition) {
            Ok(i) => i,
            Err(Error::CandidatesExhausted(_)) => {
                history.exhausted = true;
                break;
            }
            Err(e) => {
                history.valid = false;
                history.error = Some(e.to_string());
                break;
            }
        };
        skip[idx] = true;
        let entry = chosen[idx];
        let eval = objective(&entry.point)?;
        if let Err(e) = model.add(centers[idx].clone(), eval.cost) {
            history.valid = false;
            history.error = Some(e.to_string());
        }
        history.record(TrialRecord {
            trial: 0,
            point: entry.point.clone(),
            candidate: Some(idx),
            cost: eval.cost,
            walked: eval.walked,
            phi_sim: None,
            phi_hw: None,
            wall_time: start.elapsed().as_secs_f64(),
        });
        if !history.valid {
            break;
        }
    }
    if history.trials.len() < config.budget && !history.exhausted && history.valid {
        history.exhausted = true;
    }
    Ok(history)
}
