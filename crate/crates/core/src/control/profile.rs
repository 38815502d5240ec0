use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-constant target speed indexed by step count. The last segment
/// extends indefinitely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedProfile {
    pub segments: Vec<(usize, f64)>,
}

impl SpeedProfile {
    pub fn new(segments: Vec<(usize, f64)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidConfig("speed profile has no segments".into()));
        }
        for &(steps, speed) in &segments {
            if steps == 0 || !(speed >= 0.0) || !speed.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "invalid speed segment {speed}({steps})"
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn constant(speed: f64) -> Self {
        Self {
            segments: vec![(1, speed)],
        }
    }

    /// Named presets: `constant` (0.4 m/s) and `varying`
    /// (0.4 for 15 steps, 1.0 for 15, 0.2 for 15, then 0 for 5).
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "constant" => Ok(Self::constant(0.4)),
            "varying" => "0.4(15)-1.0(15)-0.2(15)-0(5)".parse(),
            other => other.parse(),
        }
    }

    /// Target speed during step `step` (zero-based).
    pub fn target(&self, step: usize) -> f64 {
        let mut end = 0;
        for &(steps, speed) in &self.segments {
            end += steps;
            if step < end {
                return speed;
            }
        }
        self.segments.last().map_or(0.0, |s| s.1)
    }

    /// Mean target over the first `steps` steps, or the initial target.
    pub fn mean_target(&self, steps: usize) -> f64 {
        if steps == 0 {
            return self.target(0);
        }
        (0..steps).map(|s| self.target(s)).sum::<f64>() / steps as f64
    }
}

impl fmt::Display for SpeedProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .segments
            .iter()
            .map(|(n, v)| format!("{v}({n})"))
            .collect();
        write!(f, "{}", parts.join("-"))
    }
}

impl FromStr for SpeedProfile {
    type Err = Error;

    /// Parses `speed(steps)-speed(steps)-...`.
    fn from_str(s: &str) -> Result<Self> {
        let mut segments = Vec::new();
        for part in s.split('-') {
            let part = part.trim();
            let (speed, rest) = part
                .split_once('(')
                .ok_or_else(|| Error::parse("speed profile", format!("missing '(' in {part:?}")))?;
            let steps = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::parse("speed profile", format!("missing ')' in {part:?}")))?;
            let speed: f64 = speed
                .trim()
                .parse()
                .map_err(|e| Error::parse("speed profile", format!("{part:?}: {e}")))?;
            let steps: usize = steps
                .trim()
                .parse()
                .map_err(|e| Error::parse("speed profile", format!("{part:?}: {e}")))?;
            segments.push((steps, speed));
        }
        Self::new(segments)
    }
}
