//! Bayesian optimization over candidate sets, plus the cost-prior and
//! behavior-map baselines.

mod acquisition;
mod itne;
mod prior;
mod run;

pub use acquisition::{expected_improvement, upper_confidence_bound, Acquisition};
pub use itne::{build_behavior_map, duty_cell, itne_run, BehaviorMap, ItneConfig, MapEntry, GRID_CELLS};
pub use prior::{build_cost_prior, CachedMean, CostPrior};
pub use run::{
    bo_run, propose_next, sobol_candidates, BoConfig, Evaluation, RunHistory, TrialRecord,
};

pub use crate::features::duty_factor;
