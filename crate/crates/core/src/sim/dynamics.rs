use nalgebra::{SMatrix, SVector};

use super::actuator::actuator_torque;
use super::config::SimConfig;
use super::model::RobotModel;
use super::state::{Leg, SimState, NJ, NQ};
use super::GRAVITY;
use crate::error::{Error, Result};

type Vec7 = SVector<f64, NQ>;
type Mat7 = SMatrix<f64, NQ, NQ>;

const TORSO: usize = 0;
/// Link order: torso, thigh_l, shank_l, thigh_r, shank_r.
const NLINK: usize = 5;

/// Which generalized coordinates contribute to each link's absolute angle.
const ANGLE_COEF: [[f64; NQ]; NLINK] = [
    [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0],
];

fn thigh_link(leg: Leg) -> usize {
    1 + 2 * leg.index()
}

/// Position, Jacobian and velocity-product acceleration of a body point.
#[derive(Debug, Clone, Copy)]
struct PointKin {
    pos: [f64; 2],
    jac: [[f64; NQ]; 2],
    bias: [f64; 2],
}

impl PointKin {
    fn velocity(&self, qd: &[f64; NQ]) -> [f64; 2] {
        let mut v = [0.0; 2];
        for (r, row) in self.jac.iter().enumerate() {
            v[r] = row.iter().zip(qd).map(|(a, b)| a * b).sum();
        }
        v
    }

    /// Generalized force of a planar force applied at this point.
    fn add_force(&self, force: [f64; 2], q_out: &mut Vec7) {
        for i in 0..NQ {
            q_out[i] += self.jac[0][i] * force[0] + self.jac[1][i] * force[1];
        }
    }
}

/// Forward kinematics of every link and both feet for one configuration.
#[derive(Debug, Clone)]
pub struct Kinematics {
    unit: [[f64; 2]; NLINK],
    dunit: [[f64; 2]; NLINK],
    omega: [f64; NLINK],
    links: [PointKin; NLINK],
    feet: [PointKin; 2],
    knees: [PointKin; 2],
    q: [f64; NQ],
    qd: [f64; NQ],
    total_mass: f64,
    masses: [f64; NLINK],
}

impl Kinematics {
    pub fn new(model: &RobotModel, q: &[f64; NQ], qd: &[f64; NQ]) -> Self {
        let mut unit = [[0.0; 2]; NLINK];
        let mut dunit = [[0.0; 2]; NLINK];
        let mut omega = [0.0; NLINK];
        for l in 0..NLINK {
            let angle: f64 = ANGLE_COEF[l].iter().zip(q).map(|(c, v)| c * v).sum();
            omega[l] = ANGLE_COEF[l].iter().zip(qd).map(|(c, v)| c * v).sum();
            let (s, c) = angle.sin_cos();
            if l == TORSO {
                unit[l] = [-s, c];
                dunit[l] = [-c, -s];
            } else {
                unit[l] = [s, -c];
                dunit[l] = [c, s];
            }
        }
        let mut kin = Self {
            unit,
            dunit,
            omega,
            links: [PointKin {
                pos: [0.0; 2],
                jac: [[0.0; NQ]; 2],
                bias: [0.0; 2],
            }; NLINK],
            feet: [PointKin {
                pos: [0.0; 2],
                jac: [[0.0; NQ]; 2],
                bias: [0.0; 2],
            }; 2],
            knees: [PointKin {
                pos: [0.0; 2],
                jac: [[0.0; NQ]; 2],
                bias: [0.0; 2],
            }; 2],
            q: *q,
            qd: *qd,
            total_mass: model.total_mass(),
            masses: [
                model.torso.mass,
                model.thigh.mass,
                model.shank.mass,
                model.thigh.mass,
                model.shank.mass,
            ],
        };
        kin.links[TORSO] = kin.point(&[(model.torso.com_offset, TORSO)]);
        for leg in Leg::BOTH {
            let th = thigh_link(leg);
            let sh = th + 1;
            kin.links[th] = kin.point(&[(model.thigh.com_offset, th)]);
            kin.links[sh] = kin.point(&[(model.thigh.length, th), (model.shank.com_offset, sh)]);
            kin.knees[leg.index()] = kin.point(&[(model.thigh.length, th)]);
            kin.feet[leg.index()] = kin.point(&[(model.thigh.length, th), (model.shank.length, sh)]);
        }
        kin
    }

    fn point(&self, terms: &[(f64, usize)]) -> PointKin {
        let mut pos = [self.q[0], self.q[1]];
        let mut jac = [[0.0; NQ]; 2];
        jac[0][0] = 1.0;
        jac[1][1] = 1.0;
        let mut bias = [0.0; 2];
        for &(rho, l) in terms {
            for r in 0..2 {
                pos[r] += rho * self.unit[l][r];
                bias[r] -= rho * self.unit[l][r] * self.omega[l] * self.omega[l];
                for (i, c) in ANGLE_COEF[l].iter().enumerate() {
                    if *c != 0.0 {
                        jac[r][i] += rho * self.dunit[l][r] * c;
                    }
                }
            }
        }
        PointKin { pos, jac, bias }
    }

    pub fn hip(&self) -> [f64; 2] {
        [self.q[0], self.q[1]]
    }

    pub fn foot(&self, leg: Leg) -> [f64; 2] {
        self.feet[leg.index()].pos
    }

    pub fn foot_velocity(&self, leg: Leg) -> [f64; 2] {
        self.feet[leg.index()].velocity(&self.qd)
    }

    pub fn knee(&self, leg: Leg) -> [f64; 2] {
        self.knees[leg.index()].pos
    }

    pub fn com(&self) -> [f64; 2] {
        let mut c = [0.0; 2];
        for (l, m) in self.links.iter().zip(self.masses) {
            c[0] += m * l.pos[0];
            c[1] += m * l.pos[1];
        }
        [c[0] / self.total_mass, c[1] / self.total_mass]
    }

    pub fn com_velocity(&self) -> [f64; 2] {
        let mut c = [0.0; 2];
        for (l, m) in self.links.iter().zip(self.masses) {
            let v = l.velocity(&self.qd);
            c[0] += m * v[0];
            c[1] += m * v[1];
        }
        [c[0] / self.total_mass, c[1] / self.total_mass]
    }

    /// Jacobian of the foot position relative to the hip with respect to
    /// that leg's `(hip, knee)` joint angles, row-major.
    pub fn leg_jacobian(&self, leg: Leg) -> [[f64; 2]; 2] {
        let h = leg.hip_coord();
        let j = &self.feet[leg.index()].jac;
        [[j[0][h], j[0][h + 1]], [j[1][h], j[1][h + 1]]]
    }

    /// Absolute (world) angle of the thigh and shank, counter-clockwise from
    /// straight down.
    pub fn leg_angles(&self, leg: Leg) -> (f64, f64) {
        let th = thigh_link(leg);
        let a = ANGLE_COEF[th].iter().zip(&self.q).map(|(c, v)| c * v).sum();
        let b = ANGLE_COEF[th + 1].iter().zip(&self.q).map(|(c, v)| c * v).sum();
        (a, b)
    }

    fn mass_matrix(&self, model: &RobotModel) -> Mat7 {
        let inertias = [
            model.torso.inertia,
            model.thigh.inertia,
            model.shank.inertia,
            model.thigh.inertia,
            model.shank.inertia,
        ];
        let mut m = Mat7::zeros();
        for l in 0..NLINK {
            let jac = &self.links[l].jac;
            let mass = self.masses[l];
            let coef = &ANGLE_COEF[l];
            for i in 0..NQ {
                for k in i..NQ {
                    let v = mass * (jac[0][i] * jac[0][k] + jac[1][i] * jac[1][k])
                        + inertias[l] * coef[i] * coef[k];
                    m[(i, k)] += v;
                }
            }
        }
        for i in 0..NQ {
            for k in 0..i {
                m[(i, k)] = m[(k, i)];
            }
        }
        m
    }

    /// Gravity and velocity-product terms as generalized forces.
    fn passive_forces(&self) -> Vec7 {
        let mut f = Vec7::zeros();
        for (l, m) in self.links.iter().zip(self.masses) {
            let force = [-m * l.bias[0], -m * l.bias[1] - m * GRAVITY];
            l.add_force(force, &mut f);
        }
        f
    }

    pub fn kinetic_energy(&self, model: &RobotModel) -> f64 {
        let qd = Vec7::from_row_slice(&self.qd);
        0.5 * (qd.transpose() * self.mass_matrix(model) * qd)[(0, 0)]
    }

    pub fn potential_energy(&self) -> f64 {
        self.links
            .iter()
            .zip(self.masses)
            .map(|(l, m)| m * GRAVITY * l.pos[1])
            .sum()
    }
}

/// Forces and torques applied during one integration step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepInfo {
    /// Ground reaction `[tangential, normal]` per foot.
    pub ground_force: [[f64; 2]; 2],
    pub boom_force: [f64; 2],
    /// Torque delivered to each joint after the actuator model.
    pub torques: [f64; NJ],
}

impl StepInfo {
    pub fn normal_force(&self, leg: Leg) -> f64 {
        self.ground_force[leg.index()][1]
    }
}

/// Penalty contact: spring-damper normal force and a tangential anchor
/// spring limited by the friction cone. Returns `([f_x, f_z], anchor)`.
pub fn contact_force(
    foot: [f64; 2],
    foot_vel: [f64; 2],
    anchor: Option<f64>,
    config: &SimConfig,
) -> ([f64; 2], Option<f64>) {
    if foot[1] > 0.0 {
        return ([0.0, 0.0], None);
    }
    let normal = (-config.ground_stiffness * foot[1] - config.ground_damping * foot_vel[1]).max(0.0);
    let anchor = anchor.unwrap_or(foot[0]);
    let trial =
        -config.ground_stiffness * (foot[0] - anchor) - config.ground_damping * foot_vel[0];
    let limit = config.friction * normal;
    if trial.abs() <= limit {
        ([trial, normal], Some(anchor))
    } else {
        let tangential = limit.copysign(trial);
        // Slide the anchor so the spring alone carries the limiting force.
        let anchor = foot[0] + tangential / config.ground_stiffness;
        ([tangential, normal], Some(anchor))
    }
}

/// Boom force on the hip: partial weight support plus horizontal drag while
/// the boom is attached, nothing otherwise.
pub fn boom_force(state: &SimState, config: &SimConfig, model: &RobotModel) -> [f64; 2] {
    if !config.boom_active() {
        return [0.0, 0.0];
    }
    [
        -config.boom_drag * state.qd[0],
        config.boom_support * model.weight(),
    ]
}

fn accelerations(
    kin: &Kinematics,
    model: &RobotModel,
    torques: &[f64; NJ],
    ground: &[[f64; 2]; 2],
    boom: [f64; 2],
    time: f64,
) -> Result<Vec7> {
    let mut rhs = kin.passive_forces();
    for (j, t) in torques.iter().enumerate() {
        rhs[3 + j] += t;
    }
    for leg in Leg::BOTH {
        kin.feet[leg.index()].add_force(ground[leg.index()], &mut rhs);
    }
    rhs[0] += boom[0];
    rhs[1] += boom[1];
    let chol = kin
        .mass_matrix(model)
        .cholesky()
        .ok_or(Error::Divergence { time })?;
    Ok(chol.solve(&rhs))
}

/// Advance one `dt` with semi-implicit Euler.
pub fn step_dynamics(
    state: &SimState,
    commands: &[f64; NJ],
    model: &RobotModel,
    config: &SimConfig,
) -> Result<SimState> {
    step_dynamics_detailed(state, commands, model, config).map(|(s, _)| s)
}

pub fn step_dynamics_detailed(
    state: &SimState,
    commands: &[f64; NJ],
    model: &RobotModel,
    config: &SimConfig,
) -> Result<(SimState, StepInfo)> {
    let dt = config.dt;
    let kin = Kinematics::new(model, &state.q, &state.qd);
    let mut next = state.clone();

    let mut info = StepInfo::default();
    for leg in Leg::BOTH {
        let i = leg.index();
        let (force, anchor) =
            contact_force(kin.foot(leg), kin.foot_velocity(leg), state.anchor[i], config);
        info.ground_force[i] = force;
        next.anchor[i] = anchor;
    }
    info.boom_force = boom_force(state, config, model);
    let joints = state.joints();
    let rates = state.joint_rates();
    for j in 0..NJ {
        info.torques[j] = actuator_torque(
            commands[j],
            &mut next.actuators[j],
            [joints[j], rates[j]],
            model,
            config.fidelity,
            j,
            dt,
        );
    }

    let qdd = accelerations(&kin, model, &info.torques, &info.ground_force, info.boom_force, state.time)?;
    for i in 0..NQ {
        next.qd[i] += dt * qdd[i];
        next.q[i] += dt * next.qd[i];
    }
    next.time = state.time + dt;
    if !next.is_finite() {
        return Err(Error::Divergence { time: next.time });
    }
    let after = Kinematics::new(model, &next.q, &next.qd);
    for leg in Leg::BOTH {
        next.contact[leg.index()] = after.foot(leg)[1] <= 0.0;
    }
    Ok((next, info))
}

/// Kinetic plus gravitational potential energy (ground at z = 0).
pub fn mechanical_energy(model: &RobotModel, q: &[f64; NQ], qd: &[f64; NQ]) -> f64 {
    let kin = Kinematics::new(model, q, qd);
    kin.kinetic_energy(model) + kin.potential_energy()
}

/// Velocity time-aligned with the positions of `state`.
///
/// Semi-implicit Euler is a kick-drift leapfrog: the stored velocity lags the
/// positions by half a step. Energy bookkeeping should use the average of the
/// stored velocity and the next one, `qd + dt/2 · qdd`.
pub fn synchronized_velocity(
    state: &SimState,
    torques: &[f64; NJ],
    model: &RobotModel,
    config: &SimConfig,
) -> Result<[f64; NQ]> {
    let kin = Kinematics::new(model, &state.q, &state.qd);
    let mut ground = [[0.0; 2]; 2];
    for leg in Leg::BOTH {
        ground[leg.index()] =
            contact_force(kin.foot(leg), kin.foot_velocity(leg), state.anchor[leg.index()], config).0;
    }
    let boom = boom_force(state, config, model);
    let qdd = accelerations(&kin, model, torques, &ground, boom, state.time)?;
    let mut v = state.qd;
    for i in 0..NQ {
        v[i] += 0.5 * config.dt * qdd[i];
    }
    Ok(v)
}
