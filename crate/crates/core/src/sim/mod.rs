//! Planar five-link biped: torso plus two thigh/shank legs with point feet.
//!
//! Generalized coordinates are `[x, z, θ, hip_l, knee_l, hip_r, knee_r]`
//! where `(x, z)` is the hip joint, `θ` the trunk pitch (counter-clockwise
//! positive, so positive values lean the trunk backward) and the four joint
//! angles are relative. Joint torques therefore enter the equations of motion
//! directly as generalized forces.

mod actuator;
mod config;
mod dynamics;
mod episode;
mod model;
mod state;
mod trajectory;

pub use actuator::{actuator_torque, ActuatorState};
pub use config::{Fidelity, SimConfig};
pub use dynamics::{
    boom_force, contact_force, mechanical_energy, step_dynamics, step_dynamics_detailed,
    synchronized_velocity, Kinematics, StepInfo,
};
pub use episode::{
    initial_state, leg_ik, run_episode, FALL_HEIGHT_FRACTION, FALL_PITCH, TOUCHDOWN_FORCE,
    TOUCHDOWN_HOLD,
};
pub use model::{Link, RobotModel};
pub use state::{Leg, SimState, NJ, NQ};
pub use trajectory::{Sample, StepEvent, Termination, Trajectory, TrajectoryHeader};

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;
