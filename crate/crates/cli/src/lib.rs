//! Configuration, experiment runner and plotting for the `tagsep` binary.

pub mod config;
pub mod experiment;
pub mod plots;

pub use config::{parse_config, ConfigError, Experiment, ExperimentConfig};
pub use experiment::{run_experiment, ExperimentError, Outcome};
