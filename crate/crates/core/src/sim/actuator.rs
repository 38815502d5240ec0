use serde::{Deserialize, Serialize};

use super::config::Fidelity;
use super::model::RobotModel;

/// Internal state of one series-elastic actuator, expressed on the output
/// side of the gearbox. Only evolves at [`Fidelity::L0Hardware`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ActuatorState {
    pub rotor_angle: f64,
    pub rotor_velocity: f64,
}

impl ActuatorState {
    /// Rotor aligned with the joint: zero spring torque.
    pub fn relaxed(joint_angle: f64, joint_rate: f64) -> Self {
        Self {
            rotor_angle: joint_angle,
            rotor_velocity: joint_rate,
        }
    }
}

/// Torque delivered to joint `joint` for a commanded output torque.
///
/// At `L0` the joint sees the series-spring torque. The motor runs an inner
/// loop on spring torque and deflection rate and drives the reflected rotor
/// inertia through a gear with viscous friction; the rotor is advanced by
/// `dt`. `joint` is the joint's `[angle, rate]`. Lower fidelities multiply the rotor torque by
/// the gear ratio, which makes the output the saturated command itself.
pub fn actuator_torque(
    command: f64,
    state: &mut ActuatorState,
    joint: [f64; 2],
    model: &RobotModel,
    fidelity: Fidelity,
    index: usize,
    dt: f64,
) -> f64 {
    let limit = model.torque_limit(index);
    let command = command.clamp(-limit, limit);
    if !fidelity.has_actuator_dynamics() {
        return command;
    }
    let spring = model.spring_stiffness * (state.rotor_angle - joint[0]);
    let motor = command + model.torque_loop_gain * (command - spring)
        - model.torque_loop_damping * (state.rotor_velocity - joint[1]);
    let accel = (motor - spring - model.gear_friction * state.rotor_velocity)
        / model.reflected_inertia();
    state.rotor_velocity += dt * accel;
    state.rotor_angle += dt * state.rotor_velocity;
    spring
}
