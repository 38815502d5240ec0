use std::collections::HashSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::acquisition::Acquisition;
use crate::error::{Error, Result};
use crate::features::sobol_points;
use crate::gp::{GpModel, HyperFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoConfig {
    pub budget: usize,
    pub acquisition: Acquisition,
    /// Refit period, in trials, after the first fit. The first fit follows
    /// the first walking trial.
    pub hyperopt_every: usize,
    pub hyper_restarts: usize,
    pub seed: u64,
    /// Random points around the incumbent added to the candidates each trial.
    pub local_perturbations: usize,
    pub perturbation_radius: f64,
}

impl Default for BoConfig {
    fn default() -> Self {
        Self {
            budget: 50,
            acquisition: Acquisition::Ei,
            hyperopt_every: 5,
            hyper_restarts: 3,
            seed: 0,
            local_perturbations: 100,
            perturbation_radius: 0.02,
        }
    }
}

/// Result of one objective call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub cost: f64,
    pub walked: bool,
    /// Transform value measured on the objective's own rollout, used to
    /// update mismatch models.
    pub phi_hw: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// One-based trial number.
    pub trial: usize,
    pub point: Vec<f64>,
    /// Position in the run's candidate set; `None` for local perturbations.
    pub candidate: Option<usize>,
    pub cost: f64,
    pub walked: bool,
    pub phi_sim: Option<Vec<f64>>,
    pub phi_hw: Option<Vec<f64>>,
    /// Seconds spent on the trial.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHistory {
    pub method: String,
    pub seed: u64,
    pub fingerprint: String,
    pub trials: Vec<TrialRecord>,
    pub best_so_far: Vec<f64>,
    /// Trial number of the first walking trial.
    pub first_walk: Option<usize>,
    /// False when the surrogate failed and the run stopped early.
    pub valid: bool,
    /// The search domain ran out before the budget.
    pub exhausted: bool,
    pub error: Option<String>,
    /// Trial numbers at which hyperparameters were refit.
    pub hyperopt_trials: Vec<usize>,
}

impl RunHistory {
    pub fn new(method: impl Into<String>, seed: u64, fingerprint: impl Into<String>) -> Self {
        Self {
            method: method.into(),
            seed,
            fingerprint: fingerprint.into(),
            trials: Vec::new(),
            best_so_far: Vec::new(),
            first_walk: None,
            valid: true,
            exhausted: false,
            error: None,
            hyperopt_trials: Vec::new(),
        }
    }

    pub fn record(&mut self, mut rec: TrialRecord) {
        rec.trial = self.trials.len() + 1;
        let best = self.best_so_far.last().copied().unwrap_or(f64::INFINITY).min(rec.cost);
        self.best_so_far.push(best);
        if rec.walked && self.first_walk.is_none() {
            self.first_walk = Some(rec.trial);
        }
        self.trials.push(rec);
    }

    pub fn best(&self) -> Option<f64> {
        self.best_so_far.last().copied()
    }

    /// Whether any trial up to and including `trial` walked.
    pub fn walked_by(&self, trial: usize) -> bool {
        self.first_walk.is_some_and(|t| t <= trial)
    }

    /// Copy with wall times zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        let mut h = self.clone();
        h.trials.iter_mut().for_each(|t| t.wall_time = 0.0);
        h
    }
}

/// The first `size` points of the seeded Sobol sequence.
pub fn sobol_candidates(size: usize, dim: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    sobol_points(size, dim, seed)
}

/// Candidate maximizing the acquisition, skipping those flagged in `skip`.
/// Ties go to the lowest index. Without data the incumbent is the smallest
/// prior mean over the candidates.
pub fn propose_next(
    model: &GpModel,
    candidates: &[Vec<f64>],
    skip: &[bool],
    acquisition: Acquisition,
) -> Result<usize> {
    let mut scored = Vec::with_capacity(candidates.len());
    for (i, x) in candidates.iter().enumerate() {
        if skip.get(i).copied().unwrap_or(false) {
            continue;
        }
        let feat = model.kernel.features(x)?;
        let prior = model.prior_mean(x);
        scored.push((i, model.posterior_features(&feat, prior)));
    }
    if scored.is_empty() {
        return Err(Error::CandidatesExhausted(candidates.len()));
    }
    let best = if model.is_empty() {
        scored.iter().map(|(_, (m, _))| *m).fold(f64::INFINITY, f64::min)
    } else {
        model.targets().iter().copied().fold(f64::INFINITY, f64::min)
    };
    let mut arg = (f64::NEG_INFINITY, scored[0].0);
    for (i, (m, v)) in scored {
        let a = acquisition.eval(m, v, best);
        if a > arg.0 {
            arg = (a, i);
        }
    }
    Ok(arg.1)
}

fn key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Sequential BO: propose, evaluate, record, update any mismatch model,
/// refit hyperparameters when triggered. A surrogate failure ends the run
/// with the partial history flagged invalid.
pub fn bo_run(
    config: &BoConfig,
    mut model: GpModel,
    candidates: &[Vec<f64>],
    objective: &mut dyn FnMut(&[f64]) -> Result<Evaluation>,
    history: RunHistory,
) -> RunHistory {
    let mut history = history;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xb0);
    let mut evaluated: HashSet<Vec<u64>> = HashSet::new();
    let mut skip = vec![false; candidates.len()];
    let mut schedule = HyperSchedule::default();

    for t in 1..=config.budget {
        let start = Instant::now();
        let mut pool: Vec<Vec<f64>> = candidates.to_vec();
        let mut pool_skip = skip.clone();
        if config.local_perturbations > 0 {
            if let Some(inc) = incumbent(&history) {
                for _ in 0..config.local_perturbations {
                    let p: Vec<f64> = inc
                        .iter()
                        .map(|v| {
                            (v + rng.random_range(-config.perturbation_radius..=config.perturbation_radius))
                                .clamp(0.0, 1.0)
                        })
                        .collect();
                    pool_skip.push(evaluated.contains(&key(&p)));
                    pool.push(p);
                }
            }
        }
        let idx = match propose_next(&model, &pool, &pool_skip, config.acquisition) {
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
        let x = pool[idx].clone();
        let candidate = (idx < candidates.len()).then_some(idx);
        if let Some(c) = candidate {
            skip[c] = true;
        }
        evaluated.insert(key(&x));

        let eval = match objective(&x) {
            Ok(e) => e,
            Err(e) => {
                history.valid = false;
                history.error = Some(format!("objective: {e}"));
                break;
            }
        };
        let phi_sim = match model.kernel.transform().map(|phi| phi.apply(&x)).transpose() {
            Ok(p) => p,
            Err(e) => {
                history.valid = false;
                history.error = Some(e.to_string());
                break;
            }
        };
        let outcome = update_model(config, &mut model, &x, &eval, phi_sim.as_deref(), t, &mut schedule);
        history.record(TrialRecord {
            trial: t,
            point: x,
            candidate,
            cost: eval.cost,
            walked: eval.walked,
            phi_sim,
            phi_hw: eval.phi_hw,
            wall_time: start.elapsed().as_secs_f64(),
        });
        match outcome {
            Ok(Some(_)) => history.hyperopt_trials.push(t),
            Ok(None) => {}
            Err(e) => {
                history.valid = false;
                history.error = Some(e.to_string());
                break;
            }
        }
    }
    history
}

fn incumbent(history: &RunHistory) -> Option<&[f64]> {
    history
        .trials
        .iter()
        .min_by(|a, b| a.cost.total_cmp(&b.cost))
        .map(|r| r.point.as_slice())
}

#[derive(Default)]
struct HyperSchedule {
    triggered: bool,
    first_fit: Option<usize>,
}

fn update_model(
    config: &BoConfig,
    model: &mut GpModel,
    x: &[f64],
    eval: &Evaluation,
    phi_sim: Option<&[f64]>,
    t: usize,
    schedule: &mut HyperSchedule,
) -> Result<Option<HyperFit>> {
    if let (Some(mm), Some(sim), Some(hw)) = (model.kernel.mismatch_mut(), phi_sim, eval.phi_hw.as_deref()) {
        mm.update(x, sim, hw)?;
    }
    model.add(x.to_vec(), eval.cost)?;
    schedule.triggered |= eval.walked;
    let due = match schedule.first_fit {
        // A trigger on the very first trial defers the fit to the second.
        None if schedule.triggered && model.len() >= 2 => {
            schedule.first_fit = Some(t);
            true
        }
        None => false,
        Some(t0) => config.hyperopt_every > 0 && (t - t0) % config.hyperopt_every == 0,
    };
    if due {
        let fit = model.optimize_hypers(config.hyper_restarts, config.seed.wrapping_add(t as u64))?;
        return Ok(Some(fit));
    }
    Ok(None)
}
