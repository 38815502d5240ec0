use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Config, Method};
use super::fingerprint::{file_fingerprint, fingerprint};
use crate::bo::{
    bo_run, build_behavior_map, build_cost_prior, itne_run, BehaviorMap, BoConfig, CachedMean, Evaluation,
    ItneConfig, RunHistory,
};
use crate::control::{rollout, CostId, SpeedProfile};
use crate::error::{Error, Result};
use crate::features::{dog_score, dog_score_within, CollectSpec, Dataset};
use crate::gp::{CachedTransform, GpModel, KernelSpec, KernelVariant, MismatchModel, PriorMean, Transform};
use crate::nn::{MlpWeights, NnTransform};
use crate::sim::Fidelity;

/// Environment variable bounding concurrent runs and collection threads.
pub const WORKERS_ENV: &str = "SIMBO_WORKERS";

pub fn workers_from_env() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn bits(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// DoG score standardized over a dataset. Dataset points are looked up;
/// anything else is simulated with the dataset's own collection settings.
pub struct DogTransform {
    table: HashMap<Vec<u64>, f64>,
    mean: f64,
    std: f64,
    spec: CollectSpec,
}

impl DogTransform {
    pub fn from_dataset(dataset: &Dataset) -> Self {
        let (mean, std) = dataset.dog_stats();
        Self {
            table: dataset.rows.iter().map(|r| (bits(&r.point), r.dog)).collect(),
            mean,
            std,
            spec: dataset.meta.spec.clone(),
        }
    }

    pub fn standardize(&self, raw: f64) -> f64 {
        (raw - self.mean) / self.std
    }
}

impl Transform for DogTransform {
    fn dim(&self) -> usize {
        1
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let raw = match self.table.get(&bits(x)) {
            Some(&v) => v,
            None => dog_score(&self.spec.rollout(x)?, &self.spec.thresholds).score,
        };
        Ok(vec![self.standardize(raw)])
    }
}

/// Everything loaded from disk that runs share read-only.
pub struct Artifacts {
    pub dataset: Arc<Dataset>,
    pub dataset_fingerprint: String,
    pub dog: Arc<DogTransform>,
    pub nn: Option<Arc<dyn Transform>>,
    pub weights_fingerprint: Option<String>,
    pub map: Option<Arc<BehaviorMap>>,
}

impl Artifacts {
    /// Load what the selected methods need; fails before any run starts if
    /// something is missing.
    pub fn load(config: &Config) -> Result<Self> {
        let c = &config.campaign;
        if !c.dataset.exists() {
            return Err(Error::MissingArtifact(c.dataset.clone()));
        }
        let dataset = Dataset::load(&c.dataset)?;
        let dataset_fingerprint = file_fingerprint(&c.dataset)?;
        let mut nn = None;
        let mut weights_fingerprint = None;
        if c.methods.iter().any(|m| m.needs_weights()) {
            let path = c
                .weights
                .clone()
                .ok_or_else(|| Error::InvalidConfig("traj_nn selected but no weights path".into()))?;
            if !path.exists() {
                return Err(Error::MissingArtifact(path));
            }
            let w = MlpWeights::load(&path)?;
            if w.spec.input_dim != dataset.dim() {
                return Err(Error::Shape {
                    expected: dataset.dim(),
                    got: w.spec.input_dim,
                });
            }
            weights_fingerprint = Some(file_fingerprint(&path)?);
            let t: Arc<dyn Transform> = Arc::new(NnTransform { weights: w });
            nn = Some(Arc::new(CachedTransform::new(t)) as Arc<dyn Transform>);
        }
        let mut map = None;
        if c.methods.iter().any(|m| m.is_itne()) {
            let m = match &c.behavior_map {
                Some(path) => {
                    if !path.exists() {
                        return Err(Error::MissingArtifact(path.clone()));
                    }
                    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                    let m: BehaviorMap =
                        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))?;
                    if m.dataset_fingerprint != dataset_fingerprint {
                        return Err(Error::Inconsistent(format!(
                            "behavior map {} was built from a different dataset",
                            path.display()
                        )));
                    }
                    m
                }
                None => build_behavior_map(&dataset, c.cost, &dataset_fingerprint)?,
            };
            map = Some(Arc::new(m));
        }
        Ok(Self {
            dog: Arc::new(DogTransform::from_dataset(&dataset)),
            dataset: Arc::new(dataset),
            dataset_fingerprint,
            nn,
            weights_fingerprint,
            map,
        })
    }

    pub fn source(&self) -> Fidelity {
        self.dataset.meta.spec.fidelity
    }
}

#[derive(Serialize)]
struct FingerprintInput<'a> {
    config: &'a Config,
    dataset: &'a str,
    weights: Option<&'a str>,
}

/// Hash of everything that shapes a single run. The seed list, method list
/// and output directory are left out so a run file does not depend on which
/// other runs share its campaign.
pub fn campaign_fingerprint(config: &Config, artifacts: &Artifacts) -> Result<String> {
    let mut c = config.clone();
    c.campaign.seeds.clear();
    c.campaign.methods.clear();
    c.campaign.output = PathBuf::new();
    c.campaign.name.clear();
    c.collect = Default::default();
    c.train = Default::default();
    c.campaign.dataset = PathBuf::new();
    c.campaign.weights = None;
    c.campaign.behavior_map = None;
    fingerprint(&FingerprintInput {
        config: &c,
        dataset: &artifacts.dataset_fingerprint,
        weights: artifacts.weights_fingerprint.as_deref(),
    })
}

/// One method/seed run as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFile {
    pub fingerprint: String,
    pub method: Method,
    pub seed: u64,
    pub budget: usize,
    pub source: Fidelity,
    pub objective: Fidelity,
    pub cost: CostId,
    pub history: RunHistory,
}

impl RunFile {
    pub fn file_name(method: Method, seed: u64) -> String {
        format!("{}_seed{seed}.json", method.name())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::parse("run file", e))?;
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }
}

/// Candidate set for a seed: a seeded subset of dataset rows, kept in Sobol
/// order so ties resolve to the lowest Sobol index.
pub fn candidate_rows(dataset: &Dataset, size: usize, seed: u64) -> Vec<usize> {
    let n = dataset.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xca4d);
    let mut idx = sample(&mut rng, n, size.min(n)).into_vec();
    idx.sort_unstable_by_key(|&i| dataset.rows[i].index);
    idx
}

/// Execute one (method, seed) run.
pub fn run_one(config: &Config, artifacts: &Artifacts, method: Method, seed: u64, fp: &str) -> Result<RunFile> {
    let c = &config.campaign;
    let dataset = &artifacts.dataset;
    let spec = &dataset.meta.spec;
    let space = spec.space.clone();
    let profile = SpeedProfile::preset(&c.profile)?;
    let sim = config.sim.clone().with_fidelity(c.objective).with_horizon(c.horizon);
    let dog = artifacts.dog.clone();
    let dog_horizon = spec.horizon;
    let thresholds = config.dog;
    let adjusted = matches!(method, Method::AdjustedDog | Method::AdjustedV2Dog);
    let mut objective = |x: &[f64]| -> Result<Evaluation> {
        let params = space.params(x)?;
        let traj = rollout(&params, &profile, &config.model, &sim)?;
        let phi_hw = adjusted.then(|| vec![dog.standardize(dog_score_within(&traj, &thresholds, dog_horizon).score)]);
        Ok(Evaluation {
            cost: c.cost.eval(&traj, &profile),
            walked: traj.walked(),
            phi_hw,
        })
    };
    let history = RunHistory::new(method.name(), seed, fp);
    let history = if method.is_itne() {
        let map = artifacts
            .map
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("behavior map not loaded".into()))?;
        let itne = ItneConfig {
            budget: c.budget,
            use_prior: method == Method::ItneWithPrior,
            acquisition: c.acquisition,
            ..ItneConfig::default()
        };
        itne_run(map, seed, &itne, &mut objective, history)?
    } else {
        let dim = dataset.dim();
        let dog_t: Arc<dyn Transform> = artifacts.dog.clone();
        let (variant, prior) = match method {
            Method::Se => (KernelVariant::Se, PriorMean::Constant),
            Method::Dog => (KernelVariant::Transform(dog_t), PriorMean::Constant),
            Method::TrajNn => {
                let nn = artifacts
                    .nn
                    .clone()
                    .ok_or_else(|| Error::InvalidConfig("network weights not loaded".into()))?;
                (KernelVariant::Transform(nn), PriorMean::Constant)
            }
            Method::AdjustedDog => (
                KernelVariant::Adjusted {
                    phi: dog_t,
                    mismatch: MismatchModel::new(1),
                },
                PriorMean::Constant,
            ),
            Method::AdjustedV2Dog => (
                KernelVariant::AdjustedV2 {
                    phi: dog_t,
                    mismatch: MismatchModel::new(1),
                },
                PriorMean::Constant,
            ),
            Method::CostPrior => {
                let p = build_cost_prior(dataset, c.cost, c.prior_subset, seed)?;
                (KernelVariant::Se, PriorMean::Function(Arc::new(CachedMean::new(Arc::new(p)))))
            }
            Method::ItneWithPrior | Method::ItneNoPrior => unreachable!(),
        };
        let model = GpModel::new(KernelSpec::new(variant, dim), prior);
        let candidates: Vec<Vec<f64>> = candidate_rows(dataset, c.candidates, seed)
            .into_iter()
            .map(|i| dataset.rows[i].point.clone())
            .collect();
        let bo = BoConfig {
            budget: c.budget,
            acquisition: c.acquisition,
            hyper_restarts: c.hyper_restarts,
            seed,
            local_perturbations: c.local_perturbations,
            perturbation_radius: c.perturbation_radius,
            ..BoConfig::default()
        };
        bo_run(&bo, model, &candidates, &mut objective, history)
    };
    Ok(RunFile {
        fingerprint: fp.to_string(),
        method,
        seed,
        budget: c.budget,
        source: artifacts.source(),
        objective: c.objective,
        cost: c.cost,
        history,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub fingerprint: String,
    pub dataset_fingerprint: String,
    pub weights_fingerprint: Option<String>,
    pub runs: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Run every (method, seed) pair not already on disk with the same
/// fingerprint, on up to `workers` threads. Returns all run file paths.
pub fn run_campaign(config: &Config, workers: usize) -> Result<Vec<PathBuf>> {
    let artifacts = Artifacts::load(config)?;
    let c = &config.campaign;
    c.validate(artifacts.source())?;
    if artifacts.dataset.len() < c.budget {
        return Err(Error::InvalidConfig(format!(
            "dataset has {} rows, fewer than the budget {}",
            artifacts.dataset.len(),
            c.budget
        )));
    }
    let fp = campaign_fingerprint(config, &artifacts)?;
    fs::create_dir_all(&c.output).map_err(|e| Error::io(&c.output, e))?;

    let jobs: Vec<(Method, u64, PathBuf)> = c
        .methods
        .iter()
        .flat_map(|&m| c.seeds.iter().map(move |&s| (m, s)))
        .map(|(m, s)| (m, s, c.output.join(RunFile::file_name(m, s))))
        .collect();
    let pending: Vec<&(Method, u64, PathBuf)> = jobs
        .iter()
        .filter(|(_, _, path)| !RunFile::load(path).is_ok_and(|r| r.fingerprint == fp))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| {
        pending.par_iter().try_for_each(|(m, s, path)| {
            let run = run_one(config, &artifacts, *m, *s, &fp)?;
            run.save(path)
        })
    })?;

    let manifest = Manifest {
        name: c.name.clone(),
        fingerprint: fp,
        dataset_fingerprint: artifacts.dataset_fingerprint.clone(),
        weights_fingerprint: artifacts.weights_fingerprint.clone(),
        runs: jobs.iter().map(|(m, s, _)| RunFile::file_name(*m, *s)).collect(),
    };
    let path = c.output.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::parse("manifest", e))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(jobs.into_iter().map(|(_, _, p)| p).collect())
}
