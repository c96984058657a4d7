//! Experiment orchestration behind the `fedsmell` command line.

pub mod config;
pub mod output;
pub mod runners;

pub use config::{parse_config, parse_config_str, ExperimentConfig, ExperimentKind};
pub use output::{emit_outputs, rounds_csv, ROUNDS_HEADER};
pub use runners::{
    load_datasets, run_centralized, run_cross_eval, run_experiment, run_federated, run_synth,
    split_dataset, train_on, ExperimentResult, SummaryRow, SummaryTable, TrainedModel,
};
