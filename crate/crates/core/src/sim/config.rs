use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simulator fidelity. `L0` is the reference ("hardware") model; the others
/// progressively simplify it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Fidelity {
    /// Series-elastic actuators with rotor inertia and gear friction, boom support.
    #[serde(rename = "L0")]
    L0Hardware,
    /// Ideal torque sources (command times gear ratio), boom support.
    #[serde(rename = "L1")]
    L1SimpleGear,
    /// Ideal torque sources, no boom.
    #[serde(rename = "L2")]
    L2NoBoom,
}

impl Fidelity {
    pub fn has_boom(self) -> bool {
        !matches!(self, Fidelity::L2NoBoom)
    }

    pub fn has_actuator_dynamics(self) -> bool {
        matches!(self, Fidelity::L0Hardware)
    }

    pub fn tag(self) -> &'static str {
        match self {
            Fidelity::L0Hardware => "L0",
            Fidelity::L1SimpleGear => "L1",
            Fidelity::L2NoBoom => "L2",
        }
    }
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Fidelity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "L0" | "L0_HARDWARE" => Ok(Fidelity::L0Hardware),
            "L1" | "L1_SIMPLE_GEAR" => Ok(Fidelity::L1SimpleGear),
            "L2" | "L2_NO_BOOM" => Ok(Fidelity::L2NoBoom),
            _ => Err(Error::parse("fidelity", format!("unknown level `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub fidelity: Fidelity,
    pub dt: f64,
    pub t_max: f64,
    pub ground_stiffness: f64,
    pub ground_damping: f64,
    pub friction: f64,
    /// Fraction of body weight carried by the boom. Zero detaches the boom.
    pub boom_support: f64,
    /// Horizontal viscous drag of the boom, N·s/m.
    pub boom_drag: f64,
    /// Age of the state the controller observes at L0, s. Ignored at L1 and L2.
    pub sensor_delay: f64,
    /// Forward hip speed at t = 0, m/s.
    pub initial_speed: f64,
    /// Uniform perturbation amplitude applied to `initial_speed`, drawn from `seed`.
    pub initial_speed_jitter: f64,
    /// Rate at which states are stored in the trajectory, Hz.
    pub record_hz: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            fidelity: Fidelity::L0Hardware,
            dt: 1e-3,
            t_max: 10.0,
            ground_stiffness: 5e4,
            ground_damping: 500.0,
            friction: 0.9,
            boom_support: 0.05,
            boom_drag: 5.0,
            sensor_delay: 0.004,
            initial_speed: 0.4,
            initial_speed_jitter: 0.0,
            record_hz: 100.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn with_fidelity(mut self, fidelity: Fidelity) -> Self {
        self.fidelity = fidelity;
        self
    }

    pub fn with_horizon(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    /// Whether boom forces act for this configuration.
    pub fn boom_active(&self) -> bool {
        self.fidelity.has_boom() && self.boom_support > 0.0
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    /// Integration steps between stored samples.
    pub fn record_stride(&self) -> usize {
        ((1.0 / (self.record_hz * self.dt)).round() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        if !(self.t_max >= self.dt) {
            return Err(Error::InvalidConfig("t_max must be at least dt".into()));
        }
        if !(self.ground_stiffness > 0.0 && self.ground_damping >= 0.0 && self.friction >= 0.0) {
            return Err(Error::InvalidConfig("ground parameters out of range".into()));
        }
        if !(self.record_hz > 0.0) {
            return Err(Error::InvalidConfig("record_hz must be positive".into()));
        }
        if self.boom_support < 0.0 || self.boom_drag < 0.0 || self.sensor_delay < 0.0 {
            return Err(Error::InvalidConfig("boom and delay parameters must be non-negative".into()));
        }
        Ok(())
    }
}
