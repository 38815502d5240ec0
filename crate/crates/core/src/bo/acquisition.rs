use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

/// Acquisition functions for minimization; larger is better.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acquisition {
    Ei,
    Ucb { beta: f64 },
}

impl Default for Acquisition {
    fn default() -> Self {
        Acquisition::Ei
    }
}

impl Acquisition {
    pub fn eval(self, mean: f64, variance: f64, best: f64) -> f64 {
        match self {
            Acquisition::Ei => expected_improvement(mean, variance, best),
            Acquisition::Ucb { beta } => upper_confidence_bound(mean, variance, beta),
        }
    }
}

fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// `E[max(best - Y, 0)]` for `Y ~ N(mean, variance)`.
pub fn expected_improvement(mean: f64, variance: f64, best: f64) -> f64 {
    let sigma = variance.max(0.0).sqrt();
    let gap = best - mean;
    if sigma == 0.0 {
        return gap.max(0.0);
    }
    let z = gap / sigma;
    (gap * norm_cdf(z) + sigma * norm_pdf(z)).max(0.0)
}

/// Negated lower confidence bound `-(mean - √β σ)`, so that larger is
/// better like EI.
pub fn upper_confidence_bound(mean: f64, variance: f64, beta: f64) -> f64 {
    -(mean - beta.sqrt() * variance.max(0.0).sqrt())
}
