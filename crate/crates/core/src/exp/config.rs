use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bo::Acquisition;
use crate::control::{ControllerDims, CostId, ParamSpace, SpeedProfile};
use crate::error::{Error, Result};
use crate::features::{CollectSpec, DogThresholds, SummarySchema};
use crate::nn::TrainConfig;
use crate::sim::{Fidelity, RobotModel, SimConfig};

/// Optimization strategies a campaign can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Squared-exponential kernel on raw parameters.
    Se,
    /// Standardized DoG score as the kernel transform.
    Dog,
    /// Learned trajectory summary as the kernel transform.
    TrajNn,
    /// DoG transform augmented with the modeled mismatch.
    AdjustedDog,
    /// DoG transform corrected by the modeled mismatch.
    AdjustedV2Dog,
    /// SE kernel with the nearest simulated cost as prior mean.
    CostPrior,
    ItneWithPrior,
    ItneNoPrior,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Se,
        Method::Dog,
        Method::TrajNn,
        Method::AdjustedDog,
        Method::AdjustedV2Dog,
        Method::CostPrior,
        Method::ItneWithPrior,
        Method::ItneNoPrior,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Se => "se",
            Method::Dog => "dog",
            Method::TrajNn => "traj_nn",
            Method::AdjustedDog => "adjusted_dog",
            Method::AdjustedV2Dog => "adjusted_v2_dog",
            Method::CostPrior => "cost_prior",
            Method::ItneWithPrior => "itne_with_prior",
            Method::ItneNoPrior => "itne_no_prior",
        }
    }

    pub fn needs_weights(self) -> bool {
        self == Method::TrajNn
    }

    pub fn is_itne(self) -> bool {
        matches!(self, Method::ItneWithPrior | Method::ItneNoPrior)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::parse("method", format!("unknown method `{s}`")))
    }
}

/// Sobol data collection at one fidelity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollectConfig {
    pub n: usize,
    pub dims: ControllerDims,
    pub padding: usize,
    pub fidelity: Fidelity,
    pub schema: SummarySchema,
    pub seed: u64,
    /// Episode length, s.
    pub horizon: f64,
    pub profile: String,
    pub output: PathBuf,
}

impl Default for CollectConfig {
    fn default() -> Self {
        Self {
            n: 20_000,
            dims: ControllerDims::Nine,
            padding: 0,
            fidelity: Fidelity::L1SimpleGear,
            schema: SummarySchema::Reactive9,
            seed: 0,
            horizon: 5.0,
            profile: "constant".into(),
            output: PathBuf::from("data/dataset.csv"),
        }
    }
}

/// One comparison of methods on an objective fidelity, with transforms and
/// priors built from data collected at the kernel-source fidelity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub name: String,
    pub objective: Fidelity,
    /// Allow the objective to share the kernel-source fidelity.
    pub no_mismatch: bool,
    pub methods: Vec<Method>,
    pub cost: CostId,
    pub profile: String,
    pub seeds: Vec<u64>,
    pub budget: usize,
    /// Size of each run's candidate set, drawn from the dataset rows.
    pub candidates: usize,
    /// Objective episode length, s.
    pub horizon: f64,
    pub acquisition: Acquisition,
    pub hyper_restarts: usize,
    pub local_perturbations: usize,
    pub perturbation_radius: f64,
    /// Dataset rows backing each cost-prior run.
    pub prior_subset: usize,
    pub dataset: PathBuf,
    pub weights: Option<PathBuf>,
    pub behavior_map: Option<PathBuf>,
    pub output: PathBuf,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            name: "campaign".into(),
            objective: Fidelity::L0Hardware,
            no_mismatch: false,
            methods: vec![Method::Se, Method::Dog, Method::TrajNn],
            cost: CostId::Hardware,
            profile: "varying".into(),
            seeds: (0..20).collect(),
            budget: 50,
            candidates: 10_000,
            horizon: 10.0,
            acquisition: Acquisition::Ei,
            hyper_restarts: 3,
            local_perturbations: 0,
            perturbation_radius: 0.02,
            prior_subset: 5_000,
            dataset: PathBuf::from("data/dataset.csv"),
            weights: None,
            behavior_map: None,
            output: PathBuf::from("runs"),
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self, source: Fidelity) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidConfig("budget must be at least 1".into()));
        }
        if self.candidates < self.budget {
            return Err(Error::InvalidConfig(format!(
                "candidate set ({}) smaller than budget ({})",
                self.candidates, self.budget
            )));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidConfig("objective horizon must be positive".into()));
        }
        if source == self.objective && !self.no_mismatch {
            return Err(Error::InvalidConfig(format!(
                "kernel source and objective are both {source}; set no_mismatch to allow this"
            )));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("seeds must be distinct".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods selected".into()));
        }
        SpeedProfile::preset(&self.profile)?;
        Ok(())
    }
}

/// Root of the TOML configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: RobotModel,
    pub sim: SimConfig,
    pub dog: DogThresholds,
    pub collect: CollectConfig,
    pub train: TrainConfig,
    pub campaign: CampaignConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: Config = toml::from_str(text).map_err(|e| Error::parse("config", e))?;
        // z0 follows the link geometry unless set explicitly.
        if cfg.model.nominal_com_height <= 0.0 {
            cfg.model.nominal_com_height = cfg.model.upright_com_height();
        }
        cfg.model.validate()?;
        cfg.sim.validate()?;
        cfg.dog.validate()?;
        Ok(cfg)
    }

    pub fn space(&self) -> ParamSpace {
        ParamSpace::new(self.collect.dims, self.collect.padding, self.model.nominal_com_height)
    }

    pub fn collect_spec(&self) -> Result<CollectSpec> {
        Ok(CollectSpec {
            n: self.collect.n,
            space: self.space(),
            fidelity: self.collect.fidelity,
            costs: CostId::ALL.to_vec(),
            schema: self.collect.schema,
            seed: self.collect.seed,
            horizon: self.collect.horizon,
            profile: SpeedProfile::preset(&self.collect.profile)?,
            thresholds: self.dog,
            model: self.model.clone(),
            sim: self.sim.clone(),
        })
    }
}
