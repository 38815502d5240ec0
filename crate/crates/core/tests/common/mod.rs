#![allow(dead_code)]

use simbo::sim::*;

pub fn sample_at(x: f64, time: f64) -> Sample {
    let model = RobotModel::default();
    let mut state = initial_state(&model, &SimConfig::default());
    state.time = time;
    Sample {
        state,
        com: [x, 0.85],
        com_vel: [0.0; 2],
        foot_height: [0.0; 2],
        normal_force: [0.0; 2],
        torques: [0.0; NJ],
    }
}

pub fn event(time: f64, speed: f64) -> StepEvent {
    StepEvent {
        time,
        leg: Leg::Left,
        apex_clearance: 0.05,
        mean_speed: speed,
        com_height_start: 0.85,
        com_height_end: 0.85,
        pitch_start: 0.0,
        pitch_end: 0.0,
    }
}

/// Hand-built trajectory: `distance` covered in `t_sim` seconds, a fall at
/// `x_fall` when given.
pub fn synthetic(t_sim: f64, t_max: f64, distance: f64, x_fall: Option<f64>, speeds: &[f64]) -> Trajectory {
    let events = speeds
        .iter()
        .enumerate()
        .map(|(i, v)| event(0.4 * (i + 1) as f64, *v))
        .collect();
    Trajectory {
        header: TrajectoryHeader {
            fidelity: Fidelity::L0Hardware,
            dt: 1e-3,
            t_max,
            t_sim,
            termination: if x_fall.is_some() { Termination::Fell } else { Termination::Completed },
            x_fall,
            events,
            stance_fraction: [0.5, 0.5],
            torque_sq_integral: 0.0,
            total_mass: 60.0,
            nominal_com_height: 0.925,
        },
        samples: vec![sample_at(0.0, 0.0), sample_at(distance, t_sim)],
    }
}
