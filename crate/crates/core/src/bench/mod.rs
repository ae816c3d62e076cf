//! Environment catalog, experiment runner and reporting.

pub mod catalog;
pub mod factory;
pub mod runner;
pub mod stats;
pub mod svg;
pub mod sweep;

pub use catalog::{environment, ENV_NAMES};
pub use factory::{StrategyFactory, StrategyParams, StrategySpec, STRATEGY_NAMES};
pub use runner::{plot_dir, run_experiment, Experiment, ExperimentConfig, RunSummary, SeedResult};
pub use stats::{bootstrap_mean_diff, spearman, Bootstrap, Spearman};
pub use sweep::{run_pathdb_sweep, SizeResult, SweepConfig, SweepResult};
