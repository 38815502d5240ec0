use std::f64::consts::PI;

use super::params::ReactiveParams;
use super::profile::SpeedProfile;
use crate::error::Result;
use crate::sim::{
    leg_ik, run_episode, Kinematics, Leg, RobotModel, SimConfig, SimState, Trajectory, NJ,
};

/// Peak swing-foot height above the liftoff height, m.
pub const SWING_CLEARANCE: f64 = 0.06;
/// Swing joint PD gains, `[hip, knee]`.
const SWING_KP: [f64; 2] = [400.0, 300.0];
const SWING_KD: [f64; 2] = [20.0, 15.0];
/// Touchdowns are ignored during the first part of swing.
const MIN_SWING_PHASE: f64 = 0.5;
/// Depth below the ground the swing target keeps descending to once the
/// planned swing time is over.
const LATE_SWING_DEPTH: f64 = 0.05;

/// Desired ground reaction force `(F_x, F_z)` from torso and height errors.
pub fn grf_targets(theta: f64, theta_dot: f64, z: f64, z_dot: f64, p: &ReactiveParams) -> (f64, f64) {
    let fx = p.k_pt * (p.theta_des - theta) - p.k_dt * theta_dot;
    let fz = p.k_pz * (p.z_des - z) - p.k_dz * z_dot;
    (fx, fz)
}

/// Landing offset of the swing foot ahead of the CoM, m. `d` is the
/// horizontal distance from the stance foot to the CoM.
pub fn foot_placement(v: f64, v_tgt: f64, d: f64, p: &ReactiveParams) -> f64 {
    p.k * (v - v_tgt) + p.c * d + 0.5 * v * p.t_swing
}

/// Swing-foot target at `phase ∈ [0, 1]`: cubic blend from the liftoff
/// position to `(x_p, 0)` horizontally, sine arch of height `clearance`
/// vertically.
pub fn swing_reference(liftoff: [f64; 2], x_p: f64, clearance: f64, phase: f64) -> [f64; 2] {
    let p = phase.clamp(0.0, 1.0);
    if p == 0.0 {
        return liftoff;
    }
    if p == 1.0 {
        return [x_p, 0.0];
    }
    let s = p * p * (3.0 - 2.0 * p);
    let x = liftoff[0] + (x_p - liftoff[0]) * s;
    let z = liftoff[1] * (1.0 - s) + clearance * (PI * p).sin();
    [x, z]
}

/// Per-rollout controller state.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerMemory {
    pub stance: Leg,
    pub step: usize,
    pub swing_start: f64,
    pub liftoff: [f64; 2],
    initialized: bool,
}

impl Default for ControllerMemory {
    fn default() -> Self {
        Self {
            stance: Leg::Left,
            step: 0,
            swing_start: 0.0,
            liftoff: [0.0; 2],
            initialized: false,
        }
    }
}

/// One control tick: stance-leg force control through the leg Jacobian
/// transpose and joint-space tracking of the swing-foot reference.
///
/// The vertical force command carries body-weight feedforward on top of
/// the height PD term.
pub fn policy_step(
    state: &SimState,
    params: &ReactiveParams,
    profile: &SpeedProfile,
    model: &RobotModel,
    memory: &mut ControllerMemory,
) -> [f64; NJ] {
    let kin = Kinematics::new(model, &state.q, &state.qd);
    if !memory.initialized {
        // Start on whichever foot is further forward.
        let lead = if kin.foot(Leg::Left)[0] >= kin.foot(Leg::Right)[0] {
            Leg::Left
        } else {
            Leg::Right
        };
        memory.stance = lead;
        memory.swing_start = state.time;
        memory.liftoff = kin.foot(lead.other());
        memory.initialized = true;
    }

    let mut phase = (state.time - memory.swing_start) / params.t_swing;
    let swing = memory.stance.other();
    if phase >= MIN_SWING_PHASE && state.contact[swing.index()] {
        memory.stance = swing;
        memory.step += 1;
        memory.swing_start = state.time;
        memory.liftoff = kin.foot(swing.other());
        phase = 0.0;
    }
    let stance = memory.stance;
    let swing = stance.other();

    let com = kin.com();
    let com_vel = kin.com_velocity();
    let (fx, fz) = grf_targets(state.pitch(), state.pitch_rate(), com[1], com_vel[1], params);
    let force = [fx, fz + model.weight()];

    let mut torques = [0.0; NJ];
    let js = kin.leg_jacobian(stance);
    let hs = stance.hip_coord() - 3;
    for c in 0..2 {
        torques[hs + c] = -(js[0][c] * force[0] + js[1][c] * force[1]);
    }

    let v_tgt = profile.target(memory.step);
    let d = com[0] - kin.foot(stance)[0];
    let x_land = com[0] + foot_placement(com_vel[0], v_tgt, d, params);
    let target = if phase < 1.0 {
        swing_reference(memory.liftoff, x_land, SWING_CLEARANCE, phase)
    } else {
        [x_land, -LATE_SWING_DEPTH * ((phase - 1.0) * 4.0).min(1.0)]
    };
    let hip = kin.hip();
    let (a, b, _) = leg_ik(model, [target[0] - hip[0], target[1] - hip[1]]);
    let desired = [a - state.pitch(), b - a];
    let hw = swing.hip_coord();
    for c in 0..2 {
        let q = state.q[hw + c];
        let qd = state.qd[hw + c];
        torques[hw - 3 + c] = SWING_KP[c] * (desired[c] - q) - SWING_KD[c] * qd;
    }
    torques
}

/// A reactive stepping controller bound to its gains and speed profile.
#[derive(Debug, Clone)]
pub struct ReactivePolicy {
    pub params: ReactiveParams,
    pub profile: SpeedProfile,
    pub model: RobotModel,
    pub memory: ControllerMemory,
}

impl ReactivePolicy {
    pub fn new(params: ReactiveParams, profile: SpeedProfile, model: RobotModel) -> Self {
        Self {
            params,
            profile,
            model,
            memory: ControllerMemory::default(),
        }
    }

    pub fn torques(&mut self, state: &SimState) -> [f64; NJ] {
        policy_step(state, &self.params, &self.profile, &self.model, &mut self.memory)
    }
}


/// Roll out the reactive controller with gains `params` from the standard
/// initial state.
pub fn rollout(
    params: &ReactiveParams,
    profile: &SpeedProfile,
    model: &RobotModel,
    config: &SimConfig,
) -> Result<Trajectory> {
    let mut policy = ReactivePolicy::new(*params, profile.clone(), model.clone());
    run_episode(|s| policy.torques(s), model, config)
}
