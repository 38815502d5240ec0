use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dog::{dog_score, DogThresholds};
use super::sobol::sobol_points;
use super::summary::{duty_factor, summarize, SummarySchema};
use crate::control::{rollout, CostId, ParamSpace, SpeedProfile};
use crate::error::{Error, Result};
use crate::sim::{Fidelity, RobotModel, SimConfig, Trajectory};

/// Everything needed to reproduce a collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectSpec {
    pub n: usize,
    pub space: ParamSpace,
    pub fidelity: Fidelity,
    pub costs: Vec<CostId>,
    pub schema: SummarySchema,
    pub seed: u64,
    /// Episode length, s.
    pub horizon: f64,
    pub profile: SpeedProfile,
    pub thresholds: DogThresholds,
    pub model: RobotModel,
    /// Base simulator settings; fidelity and horizon are overridden.
    pub sim: SimConfig,
}

impl CollectSpec {
    pub fn sim_config(&self) -> SimConfig {
        self.sim
            .clone()
            .with_fidelity(self.fidelity)
            .with_horizon(self.horizon)
    }

    pub fn rollout(&self, point: &[f64]) -> Result<Trajectory> {
        let params = self.space.params(point)?;
        rollout(&params, &self.profile, &self.model, &self.sim_config())
    }

    /// Simulate one point and extract every recorded column.
    pub fn evaluate(&self, index: usize, point: &[f64]) -> Result<DatasetRow> {
        let traj = self.rollout(point)?;
        let (dl, dr) = duty_factor(&traj);
        Ok(DatasetRow {
            index,
            point: point.to_vec(),
            summary: summarize(&traj, self.schema),
            dog: dog_score(&traj, &self.thresholds).score,
            costs: self.costs.iter().map(|c| c.eval(&traj, &self.profile)).collect(),
            walked: traj.walked(),
            duty: [dl, dr],
        })
    }
}

/// Schema header stored alongside the rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub spec: CollectSpec,
    pub summary_columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    /// Position in the Sobol sequence.
    pub index: usize,
    pub point: Vec<f64>,
    pub summary: Vec<f64>,
    pub dog: f64,
    /// One entry per cost in [`CollectSpec::costs`].
    pub costs: Vec<f64>,
    pub walked: bool,
    pub duty: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub rows: Vec<DatasetRow>,
}

/// Roll out the first `spec.n` Sobol points in parallel. Rows come back in
/// Sobol order regardless of `workers`.
pub fn collect_dataset(spec: &CollectSpec, workers: usize) -> Result<Dataset> {
    spec.model.validate()?;
    spec.sim_config().validate()?;
    spec.thresholds.validate()?;
    let points = sobol_points(spec.n, spec.space.dim(), spec.seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let rows = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, p)| spec.evaluate(i, p))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(Dataset {
        meta: DatasetMeta {
            spec: spec.clone(),
            summary_columns: spec.schema.columns(),
        },
        rows,
    })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.meta.spec.space.dim()
    }

    /// Column position of `cost` in each row's `costs`.
    pub fn cost_column(&self, cost: CostId) -> Result<usize> {
        self.meta
            .spec
            .costs
            .iter()
            .position(|c| *c == cost)
            .ok_or_else(|| Error::InvalidConfig(format!("dataset has no {cost} column")))
    }

    pub fn walking_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.walked).count() as f64 / self.rows.len() as f64
    }

    fn column_names(&self) -> Vec<String> {
        let mut cols = vec!["index".to_string()];
        cols.extend((0..self.dim()).map(|i| format!("u{i}")));
        cols.extend(self.meta.summary_columns.iter().cloned());
        cols.push("dog".into());
        cols.extend(self.meta.spec.costs.iter().map(|c| format!("cost_{c}")));
        cols.extend(["walked", "duty_left", "duty_right"].map(String::from));
        cols
    }

    /// CSV preceded by a `#`-prefixed JSON metadata line.
    pub fn write(&self, w: &mut impl Write) -> Result<()> {
        let meta = serde_json::to_string(&self.meta).map_err(|e| Error::parse("dataset header", e))?;
        let io = |e: std::io::Error| Error::parse("dataset", e);
        writeln!(w, "# {meta}").map_err(io)?;
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::parse("dataset", e);
        out.write_record(self.column_names()).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![r.index.to_string()];
            rec.extend(r.point.iter().map(f64::to_string));
            rec.extend(r.summary.iter().map(f64::to_string));
            rec.push(r.dog.to_string());
            rec.extend(r.costs.iter().map(f64::to_string));
            rec.push((r.walked as u8).to_string());
            rec.push(r.duty[0].to_string());
            rec.push(r.duty[1].to_string());
            out.write_record(&rec).map_err(csv_err)?;
        }
        out.flush().map_err(io)?;
        Ok(())
    }

    pub fn read(r: impl BufRead) -> Result<Self> {
        let mut r = r;
        let mut first = String::new();
        r.read_line(&mut first).map_err(|e| Error::parse("dataset", e))?;
        let json = first
            .trim_end()
            .strip_prefix("# ")
            .ok_or_else(|| Error::parse("dataset", "missing metadata line"))?;
        let meta: DatasetMeta = serde_json::from_str(json).map_err(|e| Error::parse("dataset header", e))?;
        let d = meta.spec.space.dim();
        let s = meta.summary_columns.len();
        let c = meta.spec.costs.len();
        let width = 1 + d + s + 1 + c + 3;
        let mut reader = csv::Reader::from_reader(r);
        let mut rows = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse("dataset", e))?;
            if rec.len() != width {
                return Err(Error::parse(
                    "dataset",
                    format!("row {line} has {} fields, expected {width}", rec.len()),
                ));
            }
            let num = |i: usize| -> Result<f64> {
                rec[i]
                    .parse::<f64>()
                    .map_err(|e| Error::parse("dataset", format!("row {line} field {i}: {e}")))
            };
            let vals = (0..width).map(num).collect::<Result<Vec<f64>>>()?;
            let mut at = 1;
            let mut take = |k: usize| {
                let v = vals[at..at + k].to_vec();
                at += k;
                v
            };
            let point = take(d);
            let summary = take(s);
            let dog = take(1)[0];
            let costs = take(c);
            let tail = take(3);
            rows.push(DatasetRow {
                index: vals[0] as usize,
                point,
                summary,
                dog,
                costs,
                walked: tail[0] != 0.0,
                duty: [tail[1], tail[2]],
            });
        }
        Ok(Self { meta, rows })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file))
    }

    /// Mean and population standard deviation of the DoG scores.
    pub fn dog_stats(&self) -> (f64, f64) {
        let n = self.rows.len().max(1) as f64;
        let mean = self.rows.iter().map(|r| r.dog).sum::<f64>() / n;
        let var = self.rows.iter().map(|r| (r.dog - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt().max(1e-12))
    }
}
