use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::actuator::ActuatorState;
use super::config::SimConfig;
use super::dynamics::{contact_force, step_dynamics_detailed, Kinematics, StepInfo};
use super::model::RobotModel;
use super::state::{Leg, SimState, NJ, NQ};
use super::trajectory::{Sample, StepEvent, Termination, Trajectory, TrajectoryHeader};
use crate::error::Result;

/// Vertical force a touchdown must exceed, N. A foot only becomes eligible
/// for a new touchdown after it has left the ground.
pub const TOUCHDOWN_FORCE: f64 = 50.0;
/// How long the force must stay above [`TOUCHDOWN_FORCE`], s.
pub const TOUCHDOWN_HOLD: f64 = 0.010;
/// Fall when the CoM drops below this fraction of the nominal height.
pub const FALL_HEIGHT_FRACTION: f64 = 0.5;
/// Fall when |trunk pitch| exceeds this, rad.
pub const FALL_PITCH: f64 = 1.0;

const INITIAL_HIP_HEIGHT: f64 = 0.85;
const INITIAL_HALF_STRIDE: f64 = 0.12;

/// Two-link inverse kinematics for a foot target relative to the hip with
/// the knee bent forward. Returns absolute `(thigh, shank)` angles measured
/// counter-clockwise from straight down, and whether the target had to be
/// pulled back into the reachable annulus.
pub fn leg_ik(model: &RobotModel, rel: [f64; 2]) -> (f64, f64, bool) {
    let (l1, l2) = (model.thigh.length, model.shank.length);
    let dist = rel[0].hypot(rel[1]);
    let min = (l1 - l2).abs() + 0.05;
    let max = 0.999 * (l1 + l2);
    let clamped = dist > max || dist < min;
    let d = dist.clamp(min, max);
    let dir = if dist > 1e-12 { [rel[0] / dist, rel[1] / dist] } else { [0.0, -1.0] };
    let gamma = dir[0].atan2(-dir[1]);
    let cos_alpha = ((l1 * l1 + d * d - l2 * l2) / (2.0 * l1 * d)).clamp(-1.0, 1.0);
    let thigh = gamma + cos_alpha.acos();
    let knee = [l1 * thigh.sin(), -l1 * thigh.cos()];
    let foot = [d * dir[0], d * dir[1]];
    let shank = (foot[0] - knee[0]).atan2(-(foot[1] - knee[1]));
    (thigh, shank, clamped)
}

/// Double-stance start: trunk upright, feet straddling the hip and loaded to
/// static equilibrium, hip moving forward at the configured speed with both
/// feet at rest. The CoM starts at x = 0.
pub fn initial_state(model: &RobotModel, config: &SimConfig) -> SimState {
    let mut speed = config.initial_speed;
    if config.initial_speed_jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        speed += config.initial_speed_jitter * rng.random_range(-1.0..=1.0);
    }
    let sink = 0.5 * model.weight() / config.ground_stiffness;
    let mut q = [0.0; NQ];
    q[1] = INITIAL_HIP_HEIGHT - sink;
    // Left foot leads.
    for (leg, dx) in [(Leg::Left, INITIAL_HALF_STRIDE), (Leg::Right, -INITIAL_HALF_STRIDE)] {
        let (a, b, _) = leg_ik(model, [dx, -INITIAL_HIP_HEIGHT]);
        let h = leg.hip_coord();
        q[h] = a - q[2];
        q[h + 1] = b - a;
    }
    let mut qd = [0.0; NQ];
    qd[0] = speed;
    let kin = Kinematics::new(model, &q, &[0.0; NQ]);
    for leg in Leg::BOTH {
        // Solve J_leg · [ḣ, k̇] = -v_hip so the foot stays put.
        let j = kin.leg_jacobian(leg);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let rhs = [-speed, 0.0];
        let hd = (rhs[0] * j[1][1] - j[0][1] * rhs[1]) / det;
        let kd = (j[0][0] * rhs[1] - j[1][0] * rhs[0]) / det;
        let h = leg.hip_coord();
        qd[h] = hd;
        qd[h + 1] = kd;
    }
    q[0] -= kin.com()[0];
    let kin = Kinematics::new(model, &q, &qd);
    let joints = [q[3], q[4], q[5], q[6]];
    let rates = [qd[3], qd[4], qd[5], qd[6]];
    let mut actuators = [ActuatorState::default(); NJ];
    for j in 0..NJ {
        actuators[j] = ActuatorState::relaxed(joints[j], rates[j]);
    }
    let feet = [kin.foot(Leg::Left), kin.foot(Leg::Right)];
    SimState {
        q,
        qd,
        actuators,
        contact: [feet[0][1] <= 0.0, feet[1][1] <= 0.0],
        anchor: [Some(feet[0][0]), Some(feet[1][0])],
        time: 0.0,
    }
}

#[derive(Debug, Clone, Copy)]
struct Boundary {
    time: f64,
    com_x: f64,
    com_z: f64,
    pitch: f64,
}

#[derive(Debug, Clone, Copy)]
struct FootTracker {
    loaded: bool,
    held_steps: usize,
    onset: Option<Boundary>,
    apex: f64,
}

fn sample_of(state: &SimState, kin: &Kinematics, info: &StepInfo) -> Sample {
    Sample {
        state: state.clone(),
        com: kin.com(),
        com_vel: kin.com_velocity(),
        foot_height: [kin.foot(Leg::Left)[1], kin.foot(Leg::Right)[1]],
        normal_force: [info.normal_force(Leg::Left), info.normal_force(Leg::Right)],
        torques: info.torques,
    }
}

/// Integrate the closed loop until `t_max` or a fall.
///
/// At L0 the policy sees the state delayed by `config.sensor_delay`; the
/// simulators observe it immediately. Numerical
/// divergence terminates the rollout as a fall at the last finite state.
pub fn run_episode<P>(mut policy: P, model: &RobotModel, config: &SimConfig) -> Result<Trajectory>
where
    P: FnMut(&SimState) -> [f64; NJ],
{
    model.validate()?;
    config.validate()?;
    let dt = config.dt;
    let n_steps = config.steps();
    let stride = config.record_stride();
    let hold_steps = ((TOUCHDOWN_HOLD / dt) - 1e-9).ceil().max(1.0) as usize;
    let delay_steps = if config.fidelity.has_actuator_dynamics() {
        (config.sensor_delay / dt).round() as usize
    } else {
        0
    };
    let fall_height = FALL_HEIGHT_FRACTION * model.nominal_com_height;

    let mut state = initial_state(model, config);
    let mut history: VecDeque<SimState> = VecDeque::with_capacity(delay_steps + 1);
    let mut samples = Vec::with_capacity(n_steps / stride + 2);
    let mut events = Vec::new();
    let mut stance_steps = [0usize; 2];
    let mut torque_sq = 0.0;
    let mut last_info = StepInfo::default();

    let kin0 = Kinematics::new(model, &state.q, &state.qd);
    let mut boundary = Boundary {
        time: 0.0,
        com_x: kin0.com()[0],
        com_z: kin0.com()[1],
        pitch: state.pitch(),
    };
    let mut feet = [FootTracker {
        loaded: true,
        held_steps: 0,
        onset: None,
        apex: 0.0,
    }; 2];
    for leg in Leg::BOTH {
        let force = contact_force(kin0.foot(leg), kin0.foot_velocity(leg), state.anchor[leg.index()], config).0;
        feet[leg.index()].loaded = force[1] > TOUCHDOWN_FORCE;
        feet[leg.index()].apex = kin0.foot(leg)[1];
    }

    let mut termination = Termination::Completed;
    let mut steps_taken = n_steps;
    for k in 0..n_steps {
        let kin = Kinematics::new(model, &state.q, &state.qd);
        let com = kin.com();
        if com[1] < fall_height || state.pitch().abs() > FALL_PITCH {
            termination = Termination::Fell;
            steps_taken = k;
            break;
        }
        if history.len() > delay_steps {
            history.pop_front();
        }
        history.push_back(state.clone());
        let commands = policy(&history[0]);
        if k == 0 && config.fidelity.has_actuator_dynamics() {
            // Springs start wound to the first command.
            for j in 0..NJ {
                let limit = model.torque_limit(j);
                state.actuators[j].rotor_angle += commands[j].clamp(-limit, limit) / model.spring_stiffness;
            }
        }
        let (next, info) = match step_dynamics_detailed(&state, &commands, model, config) {
            Ok(v) => v,
            Err(_) => {
                termination = Termination::Fell;
                steps_taken = k;
                break;
            }
        };
        if k % stride == 0 {
            samples.push(sample_of(&state, &kin, &info));
        }

        for leg in Leg::BOTH {
            let i = leg.index();
            if state.contact[i] {
                stance_steps[i] += 1;
            }
            let foot_z = kin.foot(leg)[1];
            let tracker = &mut feet[i];
            if info.normal_force(leg) > TOUCHDOWN_FORCE {
                if !tracker.loaded {
                    let onset = *tracker.onset.get_or_insert(Boundary {
                        time: state.time,
                        com_x: com[0],
                        com_z: com[1],
                        pitch: state.pitch(),
                    });
                    tracker.held_steps += 1;
                    if tracker.held_steps >= hold_steps {
                        tracker.loaded = true;
                        if onset.time > boundary.time {
                            events.push(StepEvent {
                                time: onset.time,
                                leg,
                                apex_clearance: tracker.apex,
                                mean_speed: (onset.com_x - boundary.com_x) / (onset.time - boundary.time),
                                com_height_start: boundary.com_z,
                                com_height_end: onset.com_z,
                                pitch_start: boundary.pitch,
                                pitch_end: onset.pitch,
                            });
                            boundary = onset;
                        }
                        tracker.onset = None;
                        tracker.held_steps = 0;
                    }
                }
            } else {
                tracker.onset = None;
                tracker.held_steps = 0;
                if tracker.loaded && !state.contact[i] {
                    tracker.loaded = false;
                    tracker.apex = foot_z;
                }
            }
            if !tracker.loaded {
                tracker.apex = tracker.apex.max(foot_z);
            }
        }
        torque_sq += info.torques.iter().map(|t| t * t).sum::<f64>() * dt;
        last_info = info;
        state = next;
        state.time = (k + 1) as f64 * dt;
    }

    let kin = Kinematics::new(model, &state.q, &state.qd);
    let needs_final = samples
        .last()
        .map_or(true, |s: &Sample| s.state.time != state.time);
    if needs_final {
        let mut info = last_info;
        for leg in Leg::BOTH {
            info.ground_force[leg.index()] =
                contact_force(kin.foot(leg), kin.foot_velocity(leg), state.anchor[leg.index()], config).0;
        }
        samples.push(sample_of(&state, &kin, &info));
    }

    let (t_sim, x_fall) = match termination {
        Termination::Completed => (config.t_max, None),
        Termination::Fell => (state.time, Some(kin.com()[0])),
    };
    let denom = steps_taken.max(1) as f64;
    Ok(Trajectory {
        header: TrajectoryHeader {
            fidelity: config.fidelity,
            dt,
            t_max: config.t_max,
            t_sim,
            termination,
            x_fall,
            events,
            stance_fraction: [stance_steps[0] as f64 / denom, stance_steps[1] as f64 / denom],
            torque_sq_integral: torque_sq,
            total_mass: model.total_mass(),
            nominal_com_height: model.nominal_com_height,
        },
        samples,
    })
}
