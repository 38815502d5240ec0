use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Trajectory;

/// Fixed-length trajectory summaries used as regression targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummarySchema {
    /// `t_walk, x_end, θ_avg, v_x,avg`.
    Reactive9,
    /// `t_walk, x_end, θ_end, v_x,end, c_τ, z_end, v_z,end, θ̇_end`.
    Extended16,
    /// `t_walk, x_end, c_τ`, then per-second mean CoM x and pitch over the
    /// first five seconds.
    PerSecond50,
}

const PER_SECOND_WINDOWS: usize = 5;

impl SummarySchema {
    pub const ALL: [SummarySchema; 3] = [
        SummarySchema::Reactive9,
        SummarySchema::Extended16,
        SummarySchema::PerSecond50,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SummarySchema::Reactive9 => "reactive9",
            SummarySchema::Extended16 => "extended16",
            SummarySchema::PerSecond50 => "per_second50",
        }
    }

    pub fn columns(self) -> Vec<String> {
        let fixed: &[&str] = match self {
            SummarySchema::Reactive9 => &["t_walk", "x_end", "theta_avg", "vx_avg"],
            SummarySchema::Extended16 => &[
                "t_walk", "x_end", "theta_end", "vx_end", "c_tau", "z_end", "vz_end", "theta_dot_end",
            ],
            SummarySchema::PerSecond50 => &["t_walk", "x_end", "c_tau"],
        };
        let mut cols: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
        if self == SummarySchema::PerSecond50 {
            cols.extend((0..PER_SECOND_WINDOWS).map(|i| format!("x_s{i}")));
            cols.extend((0..PER_SECOND_WINDOWS).map(|i| format!("theta_s{i}")));
        }
        cols
    }

    pub fn len(self) -> usize {
        self.columns().len()
    }
}

impl fmt::Display for SummarySchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SummarySchema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SummarySchema::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown summary schema {s:?}")))
    }
}

/// Extract a summary vector. Averages run over the stored samples, which
/// end at termination; end values come from the terminal sample.
pub fn summarize(traj: &Trajectory, schema: SummarySchema) -> Vec<f64> {
    let last = traj.last();
    let t_walk = traj.t_sim();
    let x_end = last.com[0];
    match schema {
        SummarySchema::Reactive9 => {
            let n = traj.samples.len() as f64;
            let theta_avg = traj.samples.iter().map(|s| s.state.pitch()).sum::<f64>() / n;
            let vx_avg = if t_walk > 0.0 { traj.distance() / t_walk } else { 0.0 };
            vec![t_walk, x_end, theta_avg, vx_avg]
        }
        SummarySchema::Extended16 => vec![
            t_walk,
            x_end,
            last.state.pitch(),
            last.com_vel[0],
            traj.header.torque_sq_integral,
            last.com[1],
            last.com_vel[1],
            last.state.pitch_rate(),
        ],
        SummarySchema::PerSecond50 => {
            let mut out = vec![t_walk, x_end, traj.header.torque_sq_integral];
            let mut xs = Vec::with_capacity(PER_SECOND_WINDOWS);
            let mut thetas = Vec::with_capacity(PER_SECOND_WINDOWS);
            let mut held = (traj.first().com[0], traj.first().state.pitch());
            for w in 0..PER_SECOND_WINDOWS {
                let (lo, hi) = (w as f64, (w + 1) as f64);
                let window: Vec<_> = traj
                    .samples
                    .iter()
                    .filter(|s| s.time() >= lo && s.time() < hi)
                    .collect();
                if !window.is_empty() {
                    let n = window.len() as f64;
                    held = (
                        window.iter().map(|s| s.com[0]).sum::<f64>() / n,
                        window.iter().map(|s| s.state.pitch()).sum::<f64>() / n,
                    );
                }
                // Windows after a fall repeat the last observed means.
                xs.push(held.0);
                thetas.push(held.1);
            }
            out.extend(xs);
            out.extend(thetas);
            out
        }
    }
}

/// Per-leg fraction of stored samples with the foot in contact.
pub fn duty_factor(traj: &Trajectory) -> (f64, f64) {
    let n = traj.samples.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mut counts = [0usize; 2];
    for s in &traj.samples {
        for (c, flag) in counts.iter_mut().zip(s.state.contact) {
            *c += flag as usize;
        }
    }
    (counts[0] as f64 / n as f64, counts[1] as f64 / n as f64)
}
