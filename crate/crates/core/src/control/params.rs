use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gains of the reactive stepping controller in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactiveParams {
    /// Torso PD gains, N/rad and N·s/rad (they scale a horizontal force).
    pub k_pt: f64,
    pub k_dt: f64,
    pub theta_des: f64,
    /// CoM height PD gains, N/m and N·s/m.
    pub k_pz: f64,
    pub k_dz: f64,
    pub z_des: f64,
    /// Foot-placement velocity gain, s.
    pub k: f64,
    /// CoM-offset gain.
    pub c: f64,
    /// Swing duration, s.
    pub t_swing: f64,
}

impl ReactiveParams {
    /// Smoke-test controller for the default model, picked by random search
    /// over the first 1000 points of the seed-0 Sobol sequence (9D) as the
    /// lowest hardware cost among points that walk 10 s at every fidelity
    /// under the constant profile and at L0 under the varying one.
    pub fn reference() -> Self {
        Self {
            k_pt: 470.0,
            k_dt: 43.0,
            theta_des: -0.055,
            k_pz: 3960.0,
            k_dz: 430.0,
            z_des: 0.80,
            k: 0.17,
            c: 0.95,
            t_swing: 0.315,
        }
    }

    /// Values of the four gains that the 5D parameterization holds fixed.
    pub fn five_d_defaults(nominal_com_height: f64) -> (f64, f64, f64, f64) {
        (0.0, 1500.0, 150.0, 0.93 * nominal_com_height)
    }

    pub fn as_array(&self) -> [f64; 9] {
        [
            self.k_pt,
            self.k_dt,
            self.theta_des,
            self.k_pz,
            self.k_dz,
            self.z_des,
            self.k,
            self.c,
            self.t_swing,
        ]
    }

    pub fn from_array(a: [f64; 9]) -> Self {
        Self {
            k_pt: a[0],
            k_dt: a[1],
            theta_des: a[2],
            k_pz: a[3],
            k_dz: a[4],
            z_des: a[5],
            k: a[6],
            c: a[7],
            t_swing: a[8],
        }
    }
}

/// Which reactive gains are optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ControllerDims {
    /// `[K_pt, K_dt, k, C, T]`.
    #[serde(rename = "5")]
    Five,
    /// `[K_pt, K_dt, θ_des, K_pz, K_dz, z_des, k, C, T]`.
    #[serde(rename = "9")]
    Nine,
}

impl ControllerDims {
    pub fn count(self) -> usize {
        match self {
            ControllerDims::Five => 5,
            ControllerDims::Nine => 9,
        }
    }

    /// Positions in [`ReactiveParams::as_array`] that are optimized.
    fn active(self) -> &'static [usize] {
        match self {
            ControllerDims::Five => &[0, 1, 6, 7, 8],
            ControllerDims::Nine => &[0, 1, 2, 3, 4, 5, 6, 7, 8],
        }
    }
}

impl fmt::Display for ControllerDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count())
    }
}

impl FromStr for ControllerDims {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "5" => Ok(ControllerDims::Five),
            "9" => Ok(ControllerDims::Nine),
            other => Err(Error::InvalidConfig(format!("controller dims must be 5 or 9, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBound {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

const NAMES: [&str; 9] = ["k_pt", "k_dt", "theta_des", "k_pz", "k_dz", "z_des", "k", "c", "t_swing"];

/// Affine map between the unit cube and physical controller gains.
///
/// Optional padding appends inert coordinates to the cube; they are carried
/// through unchanged and never reach the controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub dims: ControllerDims,
    pub padding: usize,
    pub nominal_com_height: f64,
    pub bounds: Vec<ParamBound>,
}

impl ParamSpace {
    pub fn new(dims: ControllerDims, padding: usize, nominal_com_height: f64) -> Self {
        let z0 = nominal_com_height;
        let all = [
            (10.0, 500.0),
            (1.0, 50.0),
            (-0.2, 0.2),
            (100.0, 5000.0),
            (10.0, 500.0),
            (0.85 * z0, 1.0 * z0),
            (0.05, 0.5),
            (0.0, 1.0),
            (0.2, 0.6),
        ];
        let bounds = dims
            .active()
            .iter()
            .map(|&i| ParamBound {
                name: NAMES[i].to_string(),
                lo: all[i].0,
                hi: all[i].1,
            })
            .collect();
        Self {
            dims,
            padding,
            nominal_com_height,
            bounds,
        }
    }

    /// Total unit-cube dimension including padding.
    pub fn dim(&self) -> usize {
        self.dims.count() + self.padding
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Unit cube to physical values; padding coordinates pass through.
    pub fn physical(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u)?;
        let mut out = u.to_vec();
        for (x, b) in out.iter_mut().zip(&self.bounds) {
            *x = b.lo + *x * (b.hi - b.lo);
        }
        Ok(out)
    }

    /// Physical values back to the unit cube.
    pub fn unit(&self, physical: &[f64]) -> Result<Vec<f64>> {
        self.check(physical)?;
        let mut out = physical.to_vec();
        for (x, b) in out.iter_mut().zip(&self.bounds) {
            *x = (*x - b.lo) / (b.hi - b.lo);
        }
        Ok(out)
    }

    /// Controller gains for a unit-cube point. Coordinates are clamped to
    /// the cube first.
    pub fn params(&self, u: &[f64]) -> Result<ReactiveParams> {
        self.check(u)?;
        let clamped: Vec<f64> = u.iter().map(|x| x.clamp(0.0, 1.0)).collect();
        let phys = self.physical(&clamped)?;
        let (theta, kpz, kdz, z) = ReactiveParams::five_d_defaults(self.nominal_com_height);
        let mut all = [0.0, 0.0, theta, kpz, kdz, z, 0.0, 0.0, 0.0];
        for (slot, v) in self.dims.active().iter().zip(&phys) {
            all[*slot] = *v;
        }
        Ok(ReactiveParams::from_array(all))
    }

    /// Unit-cube coordinates of the active gains of `p`, padding set to 0.5.
    pub fn encode(&self, p: &ReactiveParams) -> Vec<f64> {
        let all = p.as_array();
        let mut phys: Vec<f64> = self.dims.active().iter().map(|&i| all[i]).collect();
        phys.extend(std::iter::repeat_n(0.5, self.padding));
        self.unit(&phys).expect("length matches by construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_d_fixes_height_gains() {
        let space = ParamSpace::new(ControllerDims::Five, 0, 0.9);
        let p = space.params(&[0.5; 5]).unwrap();
        let (theta, kpz, kdz, z) = ReactiveParams::five_d_defaults(0.9);
        assert_eq!((p.theta_des, p.k_pz, p.k_dz, p.z_des), (theta, kpz, kdz, z));
        assert!((p.k_pt - 255.0).abs() < 1e-12);
        assert!((p.t_swing - 0.4).abs() < 1e-12);
    }

    #[test]
    fn padding_is_inert() {
        let space = ParamSpace::new(ControllerDims::Nine, 3, 0.9);
        assert_eq!(space.dim(), 12);
        let mut u = vec![0.3; 12];
        let a = space.params(&u).unwrap();
        u[10] = 0.9;
        assert_eq!(a, space.params(&u).unwrap());
    }

    #[test]
    fn wrong_length_rejected() {
        let space = ParamSpace::new(ControllerDims::Five, 0, 0.9);
        assert!(matches!(space.physical(&[0.1; 4]), Err(Error::Shape { expected: 5, got: 4 })));
    }
}
