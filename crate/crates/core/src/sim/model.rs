use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One rigid segment. `com_offset` is measured from the proximal joint
/// (the hip for the torso and thighs, the knee for the shanks).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub length: f64,
    pub com_offset: f64,
    pub mass: f64,
    /// Rotational inertia about the link's own center of mass, kg·m².
    pub inertia: f64,
}

impl Link {
    fn uniform_rod(length: f64, com_offset: f64, mass: f64) -> Self {
        Self {
            length,
            com_offset,
            mass,
            inertia: mass * length * length / 12.0,
        }
    }
}

/// Inertial, geometric and actuator description of the biped. Both legs
/// share the same thigh and shank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobotModel {
    pub torso: Link,
    pub thigh: Link,
    pub shank: Link,
    pub hip_torque_limit: f64,
    pub knee_torque_limit: f64,
    pub gear_ratio: f64,
    /// Motor-side rotor inertia; reflected through `gear_ratio²`.
    pub rotor_inertia: f64,
    pub spring_stiffness: f64,
    /// Viscous friction of the gear train, output side.
    pub gear_friction: f64,
    /// Proportional gain of the actuator's inner spring-torque loop.
    pub torque_loop_gain: f64,
    /// Damping on spring deflection rate in the inner loop, N·m·s/rad.
    pub torque_loop_damping: f64,
    /// Nominal CoM height z₀ (upright, straight legs).
    pub nominal_com_height: f64,
    pub leg_length: f64,
}

impl Default for RobotModel {
    /// 60 kg human-proportioned biped with 0.9 m legs.
    fn default() -> Self {
        let torso = Link::uniform_rod(0.6, 0.25, 38.0);
        let thigh = Link::uniform_rod(0.45, 0.2, 7.0);
        let shank = Link::uniform_rod(0.45, 0.2, 4.0);
        let mut model = Self {
            torso,
            thigh,
            shank,
            hip_torque_limit: 200.0,
            knee_torque_limit: 200.0,
            gear_ratio: 50.0,
            rotor_inertia: 6.0e-5,
            spring_stiffness: 1500.0,
            gear_friction: 3.0,
            torque_loop_gain: 8.0,
            torque_loop_damping: 30.0,
            nominal_com_height: 0.0,
            leg_length: thigh.length + shank.length,
        };
        model.nominal_com_height = model.upright_com_height();
        model
    }
}

impl RobotModel {
    pub fn total_mass(&self) -> f64 {
        self.torso.mass + 2.0 * (self.thigh.mass + self.shank.mass)
    }

    pub fn weight(&self) -> f64 {
        self.total_mass() * super::GRAVITY
    }

    /// Rotor inertia seen at the joint.
    pub fn reflected_inertia(&self) -> f64 {
        self.rotor_inertia * self.gear_ratio * self.gear_ratio
    }

    /// Torque limit for joint index `j` in `[hip_l, knee_l, hip_r, knee_r]`.
    pub fn torque_limit(&self, j: usize) -> f64 {
        if j % 2 == 0 {
            self.hip_torque_limit
        } else {
            self.knee_torque_limit
        }
    }

    /// CoM height with the trunk upright and both legs straight below the
    /// hip, feet on the ground.
    pub fn upright_com_height(&self) -> f64 {
        let hip = self.leg_length;
        let m = &self;
        let torso = m.torso.mass * (hip + m.torso.com_offset);
        let thigh = m.thigh.mass * (hip - m.thigh.com_offset);
        let shank = m.shank.mass * (m.shank.length - m.shank.com_offset);
        (torso + 2.0 * (thigh + shank)) / m.total_mass()
    }

    pub fn validate(&self) -> Result<()> {
        let links = [("torso", &self.torso), ("thigh", &self.thigh), ("shank", &self.shank)];
        for (name, l) in links {
            if !(l.length > 0.0 && l.mass > 0.0 && l.inertia > 0.0 && l.com_offset > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} length, mass, inertia and CoM offset must be positive"
                )));
            }
        }
        let positive = [
            ("hip torque limit", self.hip_torque_limit),
            ("knee torque limit", self.knee_torque_limit),
            ("gear ratio", self.gear_ratio),
            ("rotor inertia", self.rotor_inertia),
            ("spring stiffness", self.spring_stiffness),
            ("nominal CoM height", self.nominal_com_height),
            ("leg length", self.leg_length),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        let non_negative = [
            ("gear friction", self.gear_friction),
            ("torque loop gain", self.torque_loop_gain),
            ("torque loop damping", self.torque_loop_damping),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be non-negative")));
            }
        }
        Ok(())
    }
}
