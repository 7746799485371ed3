//! Experiments: paired runs over seeds, regret against clairvoyant
//! sampling, aggregation and CSV output.

mod config;
mod run;
mod summary;

pub use config::{CaseFormat, ConfigOverrides, ExperimentConfig, GroundTruth, NominalMode, PfMode, Scalar, SeedSpec};
pub use run::{
    clairvoyant_oracle, fixed_best_in_hindsight, run_experiment, run_experiment_on, Environment, RegretTrace,
    RoundRecord, AC_RESIDUAL_LIMIT,
};
pub use summary::{quantile, summarize, write_outputs, write_summary, write_traces, FinalStats, Summary, SummaryRow};
