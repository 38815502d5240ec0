//! Feed-forward network mapping controller parameters to trajectory
//! summaries.

mod mlp;
mod train;

pub use mlp::{Gradient, Layer, MlpSpec, MlpWeights, TrainMeta};
pub use train::{train, validation_row, NnTransform, TrainConfig, TrainReport};
