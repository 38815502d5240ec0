use proptest::prelude::*;
use simbo::control::{rollout, ControllerDims, ParamSpace, ReactiveParams, SpeedProfile};
use simbo::sim::*;

fn airborne(lift: f64) -> (RobotModel, SimState) {
    let model = RobotModel::default();
    let mut s = initial_state(&model, &SimConfig::default());
    s.q[1] += lift;
    s.qd = [0.0; NQ];
    s.anchor = [None, None];
    s.contact = [false, false];
    (model, s)
}

fn l2() -> SimConfig {
    SimConfig::default().with_fidelity(Fidelity::L2NoBoom)
}

fn random_params(u: &[f64]) -> ReactiveParams {
    let model = RobotModel::default();
    ParamSpace::new(ControllerDims::Nine, 0, model.nominal_com_height)
        .params(u)
        .unwrap()
}

#[test]
fn ballistic_energy_is_conserved() {
    let (model, mut s) = airborne(2.0);
    s.qd = [0.3, 0.5, 0.8, 1.5, -2.0, -1.0, 2.5];
    let config = l2();
    let zero = [0.0; NJ];
    let energy = |s: &SimState| {
        let v = synchronized_velocity(s, &zero, &model, &config).unwrap();
        mechanical_energy(&model, &s.q, &v)
    };
    let e0 = energy(&s);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        s = step_dynamics(&s, &zero, &model, &config).unwrap();
        let kin = Kinematics::new(&model, &s.q, &s.qd);
        assert!(kin.foot(Leg::Left)[1] > 0.0 && kin.foot(Leg::Right)[1] > 0.0);
        worst = worst.max((energy(&s) - e0).abs() / e0);
    }
    assert!(worst <= 1e-3, "relative drift {worst}");
}

#[test]
fn resting_free_fall_first_step() {
    let (model, s) = airborne(1.0);
    let config = l2();
    let next = step_dynamics(&s, &[0.0; NJ], &model, &config).unwrap();
    let dt = config.dt;
    assert!((next.qd[1] + GRAVITY * dt).abs() < 1e-12, "{}", next.qd[1]);
    assert!((next.q[1] - (s.q[1] + next.qd[1] * dt)).abs() < 1e-12);
    for i in [0, 2, 3, 4, 5, 6] {
        assert!(next.qd[i].abs() < 1e-12, "coordinate {i} moved");
        assert!((next.q[i] - s.q[i]).abs() < 1e-14);
    }
}

#[test]
fn step_is_deterministic() {
    let model = RobotModel::default();
    for fidelity in [Fidelity::L0Hardware, Fidelity::L1SimpleGear, Fidelity::L2NoBoom] {
        let config = SimConfig::default().with_fidelity(fidelity);
        let s = initial_state(&model, &config);
        let cmd = [12.0, -4.0, 30.0, 7.5];
        let a = step_dynamics_detailed(&s, &cmd, &model, &config).unwrap();
        let b = step_dynamics_detailed(&s, &cmd, &model, &config).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn simple_gear_actuator_examples() {
    let model = RobotModel::default();
    let limit = model.torque_limit(0);
    let mut st = ActuatorState::default();
    let out = actuator_torque(0.3 * limit, &mut st, [0.1, 0.2], &model, Fidelity::L1SimpleGear, 0, 1e-3);
    assert_eq!(out, 0.3 * limit);
    let out = actuator_torque(2.0 * limit, &mut st, [0.1, 0.2], &model, Fidelity::L2NoBoom, 0, 1e-3);
    assert_eq!(out, limit);
    assert_eq!(st, ActuatorState::default());
}

#[test]
fn hardware_actuator_settles_to_simple_gear_output() {
    let model = RobotModel::default();
    let cmd = 0.4 * model.torque_limit(1);
    let mut st = ActuatorState::relaxed(0.2, 0.0);
    let mut out = 0.0;
    for _ in 0..20_000 {
        out = actuator_torque(cmd, &mut st, [0.2, 0.0], &model, Fidelity::L0Hardware, 1, 1e-4);
    }
    let mut st1 = ActuatorState::default();
    let simple = actuator_torque(cmd, &mut st1, [0.2, 0.0], &model, Fidelity::L1SimpleGear, 1, 1e-4);
    assert!((out - simple).abs() <= 0.01 * simple.abs(), "{out} vs {simple}");
}

#[test]
fn boom_force_examples() {
    let model = RobotModel::default();
    let (_, mut s) = airborne(0.0);
    s.qd[0] = 1.3;
    assert_eq!(boom_force(&s, &l2(), &model), [0.0, 0.0]);

    let config = SimConfig {
        boom_support: 0.05,
        ..SimConfig::default().with_fidelity(Fidelity::L0Hardware)
    };
    assert!((model.total_mass() - 60.0).abs() < 1e-9);
    let f = boom_force(&s, &config, &model);
    assert!((f[1] - 29.43).abs() < 1e-9, "{}", f[1]);
    assert!((f[0] + config.boom_drag * 1.3).abs() < 1e-12);
}

#[test]
fn boom_changes_the_rollout() {
    let model = RobotModel::default();
    let profile = SpeedProfile::constant(0.4);
    let p = ReactiveParams::reference();
    let a = rollout(&p, &profile, &model, &SimConfig::default().with_fidelity(Fidelity::L0Hardware)).unwrap();
    let b = rollout(&p, &profile, &model, &l2()).unwrap();
    assert_ne!(a.last().com[0], b.last().com[0]);
}

#[test]
fn zero_torque_falls_quickly() {
    let model = RobotModel::default();
    for fidelity in [Fidelity::L0Hardware, Fidelity::L1SimpleGear, Fidelity::L2NoBoom] {
        let config = SimConfig::default().with_fidelity(fidelity);
        let t = run_episode(|_| [0.0; NJ], &model, &config).unwrap();
        assert!(t.fell());
        assert!(t.t_sim() < 1.0, "{fidelity}: {}", t.t_sim());
        assert_eq!(t.step_count(), 0);
        assert!(t.header.x_fall.is_some());
    }
}

#[test]
fn reference_controller_walks_at_l0() {
    let model = RobotModel::default();
    let config = SimConfig::default().with_fidelity(Fidelity::L0Hardware);
    let t = rollout(&ReactiveParams::reference(), &SpeedProfile::constant(0.4), &model, &config).unwrap();
    assert!(t.walked());
    assert_eq!(t.t_sim(), t.t_max());
    assert!(t.step_count() >= 10, "{} steps", t.step_count());
    assert!(t.header.x_fall.is_none());
}

/// Offline replay of touchdown detection over the contact flags and normal
/// forces of a full-rate trajectory.
fn offline_touchdowns(t: &Trajectory) -> Vec<f64> {
    let hold = (TOUCHDOWN_HOLD / t.header.dt - 1e-9).ceil().max(1.0) as usize;
    let body = &t.samples[..t.samples.len() - 1];
    let mut loaded = [body[0].normal_force[0] > TOUCHDOWN_FORCE, body[0].normal_force[1] > TOUCHDOWN_FORCE];
    let mut run = [0usize; 2];
    let mut onset = [0.0f64; 2];
    let mut last = 0.0;
    let mut times = Vec::new();
    for s in body {
        for leg in 0..2 {
            if s.normal_force[leg] > TOUCHDOWN_FORCE {
                if !loaded[leg] {
                    if run[leg] == 0 {
                        onset[leg] = s.time();
                    }
                    run[leg] += 1;
                    if run[leg] >= hold {
                        loaded[leg] = true;
                        run[leg] = 0;
                        if onset[leg] > last {
                            times.push(onset[leg]);
                            last = onset[leg];
                        }
                    }
                }
            } else {
                run[leg] = 0;
                if !s.state.contact[leg] {
                    loaded[leg] = false;
                }
            }
        }
    }
    times
}

#[test]
fn step_events_match_offline_recount() {
    let model = RobotModel::default();
    let config = SimConfig {
        record_hz: 1000.0,
        ..SimConfig::default().with_fidelity(Fidelity::L1SimpleGear).with_horizon(5.0)
    };
    let mut controllers: Vec<ReactiveParams> = simbo::features::sobol_points(40, 9, 3)
        .unwrap()
        .iter()
        .map(|u| random_params(u))
        .collect();
    controllers.push(ReactiveParams::reference());
    let mut walked = 0;
    let mut checked = 0;
    for p in controllers {
        let t = rollout(&p, &SpeedProfile::constant(0.4), &model, &config).unwrap();
        walked += t.walked() as usize;
        let times: Vec<f64> = t.events().iter().map(|e| e.time).collect();
        assert_eq!(times, offline_touchdowns(&t));
        checked += t.step_count();
    }
    assert!(walked >= 1 && checked >= 20, "fixture too easy: {walked} walkers, {checked} steps");
}

#[test]
fn l1_and_l2_coincide_without_boom() {
    let model = RobotModel::default();
    let base = SimConfig {
        boom_support: 0.0,
        ..SimConfig::default().with_horizon(3.0)
    };
    for u in simbo::features::sobol_points(8, 9, 11).unwrap() {
        let p = random_params(&u);
        let profile = SpeedProfile::constant(0.5);
        let a = rollout(&p, &profile, &model, &base.clone().with_fidelity(Fidelity::L1SimpleGear)).unwrap();
        let b = rollout(&p, &profile, &model, &base.clone().with_fidelity(Fidelity::L2NoBoom)).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.header.events, b.header.events);
        assert_eq!(a.header.t_sim, b.header.t_sim);
    }
}

#[test]
fn trajectory_round_trips_through_text() {
    let model = RobotModel::default();
    let config = SimConfig::default().with_horizon(2.0);
    let t = rollout(&ReactiveParams::reference(), &SpeedProfile::constant(0.4), &model, &config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.jsonl");
    t.save(&path).unwrap();
    assert_eq!(Trajectory::load(&path).unwrap(), t);
}

#[test]
fn invalid_configs_are_rejected() {
    let model = RobotModel::default();
    for bad in [
        SimConfig { dt: 0.0, ..SimConfig::default() },
        SimConfig { t_max: 1e-4, ..SimConfig::default() },
        SimConfig { sensor_delay: -0.1, ..SimConfig::default() },
    ] {
        assert!(run_episode(|_| [0.0; NJ], &model, &bad).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn contact_force_stays_in_friction_cone(
        z in -0.02f64..0.02,
        vx in -2.0f64..2.0,
        vz in -2.0f64..2.0,
        offset in proptest::option::of(-0.05f64..0.05),
    ) {
        let config = SimConfig::default();
        let (f, anchor) = contact_force([0.3, z], [vx, vz], offset.map(|o| 0.3 + o), &config);
        prop_assert!(f[1] >= 0.0);
        prop_assert!(f[0].abs() <= config.friction * f[1] + 1e-9);
        prop_assert_eq!(anchor.is_some(), z <= 0.0);
        if z > 0.0 {
            prop_assert_eq!(f, [0.0, 0.0]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rollout_invariants(u in proptest::collection::vec(0.0f64..=1.0, 9), fid in 0usize..3) {
        let fidelity = [Fidelity::L0Hardware, Fidelity::L1SimpleGear, Fidelity::L2NoBoom][fid];
        let model = RobotModel::default();
        let config = SimConfig::default().with_fidelity(fidelity).with_horizon(3.0);
        let p = random_params(&u);
        let profile = SpeedProfile::constant(0.4);
        let t = rollout(&p, &profile, &model, &config).unwrap();
        prop_assert!(t.t_sim() <= t.t_max());
        prop_assert_eq!(t.fell(), t.t_sim() < t.t_max());
        prop_assert_eq!(t.header.x_fall.is_some(), t.fell());
        for w in t.events().windows(2) {
            prop_assert!(w[0].time < w[1].time);
        }
        for s in &t.samples {
            prop_assert!(s.normal_force.iter().all(|f| *f >= 0.0));
            prop_assert!(s.state.is_finite());
            for leg in 0..2 {
                prop_assert_eq!(s.state.contact[leg], s.foot_height[leg] <= 0.0);
            }
        }
        let again = rollout(&p, &profile, &model, &config).unwrap();
        prop_assert_eq!(t, again);
    }
}
