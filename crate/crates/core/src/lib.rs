//! Simulation-informed Bayesian optimization for planar biped walking
//! controllers.
//!
//! The crate is organized bottom-up:
//!
//! * [`sim`] - deterministic planar five-link biped with fidelity-degraded
//!   variants that stand in for "simulator" and "hardware".
//! * [`control`] - the reactive stepping policy and the three walking costs.
//! * [`features`] - gait scores, trajectory summaries, Sobol sampling and
//!   dataset collection.
//! * [`gp`] - Gaussian-process surrogate with squared-exponential, transform
//!   and mismatch-adjusted kernels.
//! * [`nn`] - the feedforward network that learns trajectory summaries.
//! * [`bo`] - the optimization loop and the cost-prior and behavior-map
//!   baselines.
//! * [`exp`] - campaign orchestration and reporting used by the CLI.

pub mod bo;
pub mod control;
pub mod error;
pub mod exp;
pub mod features;
pub mod gp;
pub mod nn;
pub mod sim;

pub use error::{Error, Result};
