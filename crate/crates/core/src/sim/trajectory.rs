use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::Fidelity;
use super::state::{Leg, SimState, NJ};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Fell,
}

/// One confirmed swing-foot touchdown and the step that it closes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepEvent {
    pub time: f64,
    pub leg: Leg,
    /// Highest foot point reached while the foot was unloaded.
    pub apex_clearance: f64,
    /// CoM forward displacement over the step divided by its duration.
    pub mean_speed: f64,
    pub com_height_start: f64,
    pub com_height_end: f64,
    pub pitch_start: f64,
    pub pitch_end: f64,
}

/// A decimated state record. Forces and torques are those acting over the
/// integration step that starts at `state`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub state: SimState,
    pub com: [f64; 2],
    pub com_vel: [f64; 2],
    pub foot_height: [f64; 2],
    pub normal_force: [f64; 2],
    pub torques: [f64; NJ],
}

impl Sample {
    pub fn time(&self) -> f64 {
        self.state.time
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub fidelity: Fidelity,
    pub dt: f64,
    pub t_max: f64,
    pub t_sim: f64,
    pub termination: Termination,
    pub x_fall: Option<f64>,
    pub events: Vec<StepEvent>,
    /// Per-leg fraction of integration steps in ground contact.
    pub stance_fraction: [f64; 2],
    /// ∫ Σ τ² dt over the rollout, N²·m²·s.
    pub torque_sq_integral: f64,
    pub total_mass: f64,
    pub nominal_com_height: f64,
}

/// A closed-loop rollout: header plus decimated samples. The last sample is
/// always the terminal state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub header: TrajectoryHeader,
    pub samples: Vec<Sample>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Record {
    Header(TrajectoryHeader),
    Sample(Sample),
}

impl Trajectory {
    pub fn fell(&self) -> bool {
        self.header.termination == Termination::Fell
    }

    pub fn walked(&self) -> bool {
        self.header.termination == Termination::Completed
    }

    pub fn t_sim(&self) -> f64 {
        self.header.t_sim
    }

    pub fn t_max(&self) -> f64 {
        self.header.t_max
    }

    pub fn events(&self) -> &[StepEvent] {
        &self.header.events
    }

    pub fn step_count(&self) -> usize {
        self.header.events.len()
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    /// CoM forward displacement from the initial state.
    pub fn distance(&self) -> f64 {
        self.last().com[0] - self.first().com[0]
    }

    /// Line-delimited JSON: one header record followed by one record per sample.
    pub fn write_jsonl(&self, w: &mut impl Write) -> std::io::Result<()> {
        serde_json::to_writer(&mut *w, &Record::Header(self.header.clone()))?;
        writeln!(w)?;
        for s in &self.samples {
            serde_json::to_writer(&mut *w, &Record::Sample(s.clone()))?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<Self> {
        let mut header = None;
        let mut samples = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::parse("trajectory", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record = serde_json::from_str(&line)
                .map_err(|e| Error::parse(format!("trajectory line {}", n + 1), e))?;
            match rec {
                Record::Header(h) if header.is_none() => header = Some(h),
                Record::Header(_) => return Err(Error::parse("trajectory", "duplicate header")),
                Record::Sample(s) => samples.push(s),
            }
        }
        let header = header.ok_or_else(|| Error::parse("trajectory", "missing header"))?;
        if samples.is_empty() {
            return Err(Error::parse("trajectory", "no samples"));
        }
        Ok(Self { header, samples })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.write_jsonl(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_jsonl(BufReader::new(f))
    }
}
