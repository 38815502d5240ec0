use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::profile::SpeedProfile;
use crate::error::{Error, Result};
use crate::sim::{Trajectory, GRAVITY};

/// Base penalty of a fall under [`cost_hardware`].
pub const FALL_COST_HARDWARE: f64 = 100.0;
/// Base penalty of a fall under [`cost_nonsmooth`].
pub const FALL_COST_NONSMOOTH: f64 = 300.0;
/// Hardware costs below this value indicate a walking controller.
pub const WALK_THRESHOLD: f64 = 100.0;
/// Cap on the cost of transport when the robot made no forward progress.
const MAX_COST_OF_TRANSPORT: f64 = 100.0;

/// Fall penalty minus distance, or the mean per-step speed-tracking error.
///
/// Step `i` is compared against the profile target for step `i`. A walking
/// trajectory without recorded steps falls back to its overall mean speed.
pub fn cost_hardware(traj: &Trajectory, profile: &SpeedProfile) -> f64 {
    if let Some(x_fall) = traj.header.x_fall {
        return FALL_COST_HARDWARE - x_fall;
    }
    let events = traj.events();
    if events.is_empty() {
        return (traj.distance() / traj.t_sim() - profile.target(0)).abs();
    }
    events
        .iter()
        .enumerate()
        .map(|(i, e)| (e.mean_speed - profile.target(i)).abs())
        .sum::<f64>()
        / events.len() as f64
}

/// Smooth shaping cost rewarding time walked, distance and speed. Backward
/// displacement counts as zero distance.
pub fn cost_smooth(traj: &Trajectory, s_tgt: f64) -> f64 {
    let t = traj.t_sim();
    let d = traj.distance();
    let s = if t > 0.0 { d / t } else { 0.0 };
    1.0 / (1.0 + t) + 0.3 / (1.0 + d.max(0.0)) + 0.01 * (s - s_tgt)
}

/// Integrated squared torque over weight times distance, capped when the
/// robot did not move forward.
pub fn cost_of_transport(traj: &Trajectory) -> f64 {
    let distance = traj.distance();
    if distance <= 0.0 {
        return MAX_COST_OF_TRANSPORT;
    }
    let ctr = traj.header.torque_sq_integral / (traj.header.total_mass * GRAVITY * distance);
    ctr.min(MAX_COST_OF_TRANSPORT)
}

/// Large fall penalty, else speed error plus cost of transport. The target
/// is the profile mean over the steps taken.
pub fn cost_nonsmooth(traj: &Trajectory, profile: &SpeedProfile) -> f64 {
    if let Some(x_fall) = traj.header.x_fall {
        return FALL_COST_NONSMOOTH - x_fall;
    }
    let v_avg = traj.distance() / traj.t_sim();
    let v_tgt = profile.mean_target(traj.step_count());
    100.0 * (v_avg - v_tgt).abs() + cost_of_transport(traj)
}

/// Registered trial costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostId {
    Hardware,
    Smooth,
    Nonsmooth,
}

impl CostId {
    pub const ALL: [CostId; 3] = [CostId::Hardware, CostId::Smooth, CostId::Nonsmooth];

    pub fn name(self) -> &'static str {
        match self {
            CostId::Hardware => "hardware",
            CostId::Smooth => "smooth",
            CostId::Nonsmooth => "nonsmooth",
        }
    }

    /// Evaluate on a trajectory. The smooth cost targets the profile's
    /// initial speed.
    pub fn eval(self, traj: &Trajectory, profile: &SpeedProfile) -> f64 {
        match self {
            CostId::Hardware => cost_hardware(traj, profile),
            CostId::Smooth => cost_smooth(traj, profile.target(0)),
            CostId::Nonsmooth => cost_nonsmooth(traj, profile),
        }
    }
}

impl fmt::Display for CostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CostId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown cost {s:?}")))
    }
}
