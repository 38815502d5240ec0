use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{StepEvent, Trajectory};

/// Pass/fail thresholds for the binary per-step gait features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DogThresholds {
    /// Minimum swing-foot apex height, m.
    pub clearance: f64,
    /// Allowed CoM height change across a step, m.
    pub height_tolerance: f64,
    /// Allowed trunk pitch change across a step, rad.
    pub pitch_tolerance: f64,
}

impl Default for DogThresholds {
    fn default() -> Self {
        Self {
            clearance: 0.02,
            height_tolerance: 0.02,
            pitch_tolerance: 0.087,
        }
    }
}

impl DogThresholds {
    pub fn validate(&self) -> Result<()> {
        if self.clearance > 0.0 && self.height_tolerance > 0.0 && self.pitch_tolerance > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig("gait thresholds must be positive".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DogScore {
    pub score: f64,
    /// `[M1, M2, M3, M4]` per step.
    pub features: Vec<[f64; 4]>,
}

fn event_features(e: &StepEvent, th: &DogThresholds) -> [f64; 4] {
    let m1 = (e.apex_clearance > th.clearance) as u8 as f64;
    let m2 = ((e.com_height_start - e.com_height_end).abs() <= th.height_tolerance) as u8 as f64;
    let m3 = ((e.pitch_start - e.pitch_end).abs() <= th.pitch_tolerance) as u8 as f64;
    // Backward steps earn nothing rather than a negative score.
    let m4 = e.mean_speed.max(0.0);
    [m1, m2, m3, m4]
}

/// Features of step `step`: swing clearance, height consistency, pitch
/// consistency (binary) and the step's mean forward speed.
pub fn dog_step_features(traj: &Trajectory, step: usize, th: &DogThresholds) -> Result<[f64; 4]> {
    let e = traj
        .events()
        .get(step)
        .ok_or_else(|| Error::Inconsistent(format!("step {step} of {}", traj.step_count())))?;
    Ok(event_features(e, th))
}

/// Sum of all step features scaled by the fraction of the horizon survived.
pub fn dog_score(traj: &Trajectory, th: &DogThresholds) -> DogScore {
    dog_score_within(traj, th, traj.t_max())
}

/// [`dog_score`] restricted to the first `horizon` seconds, as if the
/// rollout had been stopped there.
pub fn dog_score_within(traj: &Trajectory, th: &DogThresholds, horizon: f64) -> DogScore {
    let horizon = horizon.min(traj.t_max());
    let features: Vec<[f64; 4]> = traj
        .events()
        .iter()
        .filter(|e| e.time <= horizon)
        .map(|e| event_features(e, th))
        .collect();
    let total: f64 = features.iter().flatten().sum();
    let scale = traj.t_sim().min(horizon) / horizon;
    DogScore {
        score: scale * total,
        features,
    }
}
