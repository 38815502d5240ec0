//! Gaussian-process regression with squared-exponential kernels over raw
//! inputs, simulation-informed transforms, and mismatch-adjusted transforms.

mod kernel;
mod mismatch;
mod model;

pub use kernel::{kernel_eval, se_kernel, CachedTransform, GpHyper, KernelSpec, KernelVariant, Transform};
pub use mismatch::MismatchModel;
pub use model::{GpModel, HyperFit, MeanFunction, PriorMean, HYPER_BOUNDS, JITTER_LADDER};
