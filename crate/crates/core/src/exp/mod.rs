//! Campaign orchestration behind the command-line tool: configuration,
//! run scheduling, run files and curve reports.

mod campaign;
mod config;
mod fingerprint;
mod report;
mod stats;

pub use campaign::{
    campaign_fingerprint, candidate_rows, run_campaign, run_one, workers_from_env, Artifacts, DogTransform,
    Manifest, RunFile, MANIFEST_FILE, WORKERS_ENV,
};
pub use config::{CampaignConfig, CollectConfig, Config, Method};
pub use fingerprint::{file_fingerprint, fingerprint};
pub use report::{build_report, load_runs, write_report, CurvePoint, CurveReport, MethodCurve, CURVE_HEADER};
pub use stats::{mean, median, rank_sum_test, std_dev};
