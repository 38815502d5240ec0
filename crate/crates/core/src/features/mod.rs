//! Gait features extracted from rollouts and Sobol-grid data collection.

mod dataset;
mod dog;
mod sobol;
mod summary;

pub use dataset::{collect_dataset, CollectSpec, Dataset, DatasetMeta, DatasetRow};
pub use dog::{dog_score, dog_score_within, dog_step_features, DogScore, DogThresholds};
pub use sobol::{sobol_points, MAX_SOBOL_DIM, MAX_SOBOL_POINTS};
pub use summary::{duty_factor, summarize, SummarySchema};
