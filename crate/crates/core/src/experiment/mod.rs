//! Config-driven experiment runner with deterministic CSV output.

mod config;
mod partition;
mod report;
mod run;

pub use config::{
    parse_config, Command, DistributionSpec, ExperimentConfig, DEFAULT_BUDGET, DEFAULT_N_LIST,
    DEFAULT_POPULATION, DEFAULT_SAMPLES,
};
pub use partition::partition_experiment;
pub use report::{emit_csv, format_sig12, Cell, RunReport, VERSION};
pub use run::{execute, run};
