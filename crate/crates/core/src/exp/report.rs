use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::campaign::{RunFile, MANIFEST_FILE};
use super::config::Method;
use super::stats::{mean, median, std_dev};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub trial: usize,
    pub mean_best: f64,
    /// 1.96 standard errors.
    pub ci_half_width: f64,
    pub walking_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCurve {
    pub method: Method,
    pub runs: usize,
    pub points: Vec<CurvePoint>,
    pub final_best: Vec<f64>,
    /// First walking trial per run, in seed order.
    pub first_walk: Vec<Option<usize>>,
}

impl MethodCurve {
    pub fn median_final_best(&self) -> f64 {
        median(&self.final_best)
    }

    /// Runs that never walked count as later than any trial.
    pub fn median_first_walk(&self) -> f64 {
        let v: Vec<f64> = self
            .first_walk
            .iter()
            .map(|f| f.map_or(f64::INFINITY, |t| t as f64))
            .collect();
        median(&v)
    }

    pub fn final_walking_fraction(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.walking_fraction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub fingerprint: String,
    pub budget: usize,
    pub methods: Vec<MethodCurve>,
}

impl CurveReport {
    pub fn method(&self, m: Method) -> Option<&MethodCurve> {
        self.methods.iter().find(|c| c.method == m)
    }
}

/// Load every run file in `dir` (the manifest excluded), sorted by method
/// then seed.
pub fn load_runs(dir: &Path) -> Result<Vec<RunFile>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut runs = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_json = path.extension().is_some_and(|e| e == "json");
        if is_json && path.file_name().is_some_and(|n| n != MANIFEST_FILE) {
            runs.push(RunFile::load(&path)?);
        }
    }
    runs.sort_by_key(|r| (r.method, r.seed));
    Ok(runs)
}

/// Best-so-far curve padded to `budget` with its last value, for runs that
/// exhausted their search domain.
fn padded_curve(run: &RunFile, budget: usize) -> Vec<f64> {
    let mut c = run.history.best_so_far.clone();
    let last = c.last().copied().unwrap_or(f64::INFINITY);
    c.resize(budget, last);
    c
}

pub fn build_report(runs: &[RunFile]) -> Result<CurveReport> {
    let first = runs.first().ok_or(Error::Empty("run files"))?;
    let mixed: Vec<String> = runs
        .iter()
        .filter(|r| r.fingerprint != first.fingerprint)
        .map(|r| format!("{} seed {}", r.method, r.seed))
        .collect();
    if !mixed.is_empty() {
        return Err(Error::Inconsistent(format!(
            "fingerprints differ from {} seed {}: {}",
            first.method,
            first.seed,
            mixed.join(", ")
        )));
    }
    let odd: Vec<String> = runs
        .iter()
        .filter(|r| r.budget != first.budget)
        .map(|r| format!("{} seed {} (budget {})", r.method, r.seed, r.budget))
        .collect();
    if !odd.is_empty() {
        return Err(Error::Inconsistent(format!(
            "budgets differ from {}: {}",
            first.budget,
            odd.join(", ")
        )));
    }
    let budget = first.budget;
    let mut by_method: BTreeMap<Method, Vec<&RunFile>> = BTreeMap::new();
    for r in runs {
        by_method.entry(r.method).or_default().push(r);
    }
    let mut methods = Vec::new();
    for (method, rs) in by_method {
        if rs.len() < 2 {
            return Err(Error::Inconsistent(format!("{method} has {} run; at least 2 needed", rs.len())));
        }
        let curves: Vec<Vec<f64>> = rs.iter().map(|r| padded_curve(r, budget)).collect();
        let n = rs.len() as f64;
        let points = (0..budget)
            .map(|t| {
                let col: Vec<f64> = curves.iter().map(|c| c[t]).collect();
                CurvePoint {
                    trial: t + 1,
                    mean_best: mean(&col),
                    ci_half_width: 1.96 * std_dev(&col) / n.sqrt(),
                    walking_fraction: rs.iter().filter(|r| r.history.walked_by(t + 1)).count() as f64 / n,
                }
            })
            .collect();
        methods.push(MethodCurve {
            method,
            runs: rs.len(),
            points,
            final_best: curves.iter().map(|c| c[budget - 1]).collect(),
            first_walk: rs.iter().map(|r| r.history.first_walk).collect(),
        });
    }
    Ok(CurveReport {
        fingerprint: first.fingerprint.clone(),
        budget,
        methods,
    })
}

pub const CURVE_HEADER: &str = "method,trial,mean_best,ci_half_width,walking_fraction,runs";

fn write_rows(w: &mut impl Write, curve: &MethodCurve) -> std::io::Result<()> {
    for p in &curve.points {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            curve.method, p.trial, p.mean_best, p.ci_half_width, p.walking_fraction, curve.runs
        )?;
    }
    Ok(())
}

/// Write `curve_<method>.csv` per method and `curves.csv` with all of them.
/// Each file starts with a `# fingerprint=` comment line.
pub fn write_report(report: &CurveReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut write = |path: PathBuf, curves: &[&MethodCurve]| -> Result<()> {
        let mut buf = Vec::new();
        let io = (|| {
            writeln!(buf, "# fingerprint={}", report.fingerprint)?;
            writeln!(buf, "{CURVE_HEADER}")?;
            for c in curves {
                write_rows(&mut buf, c)?;
            }
            Ok::<_, std::io::Error>(())
        })();
        io.map_err(|e| Error::io(&path, e))?;
        fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    for c in &report.methods {
        write(dir.join(format!("curve_{}.csv", c.method)), &[c])?;
    }
    let all: Vec<&MethodCurve> = report.methods.iter().collect();
    write(dir.join("curves.csv"), &all)?;
    Ok(written)
}
