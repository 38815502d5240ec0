use serde::{Deserialize, Serialize};

use super::actuator::ActuatorState;

/// Number of generalized coordinates.
pub const NQ: usize = 7;
/// Number of actuated joints, ordered `[hip_l, knee_l, hip_r, knee_r]`.
pub const NJ: usize = 4;

pub const PITCH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Leg {
    Left,
    Right,
}

impl Leg {
    pub fn index(self) -> usize {
        match self {
            Leg::Left => 0,
            Leg::Right => 1,
        }
    }

    pub fn other(self) -> Leg {
        match self {
            Leg::Left => Leg::Right,
            Leg::Right => Leg::Left,
        }
    }

    /// Generalized-coordinate index of this leg's hip joint; the knee follows.
    pub fn hip_coord(self) -> usize {
        3 + 2 * self.index()
    }

    pub const BOTH: [Leg; 2] = [Leg::Left, Leg::Right];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub q: [f64; NQ],
    pub qd: [f64; NQ],
    pub actuators: [ActuatorState; NJ],
    /// True iff the foot is at or below the ground plane.
    pub contact: [bool; 2],
    /// Tangential spring anchor of each foot while in contact.
    pub anchor: [Option<f64>; 2],
    pub time: f64,
}

impl SimState {
    pub fn pitch(&self) -> f64 {
        self.q[PITCH]
    }

    pub fn pitch_rate(&self) -> f64 {
        self.qd[PITCH]
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.qd.iter()).all(|v| v.is_finite())
            && self
                .actuators
                .iter()
                .all(|a| a.rotor_angle.is_finite() && a.rotor_velocity.is_finite())
    }

    /// Joint angles `[hip_l, knee_l, hip_r, knee_r]`.
    pub fn joints(&self) -> [f64; NJ] {
        [self.q[3], self.q[4], self.q[5], self.q[6]]
    }

    pub fn joint_rates(&self) -> [f64; NJ] {
        [self.qd[3], self.qd[4], self.qd[5], self.qd[6]]
    }
}
