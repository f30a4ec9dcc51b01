//! Experiment runner and structural reports behind the `slackcrn` binary.

pub mod config;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, Method, RegionKind, Task};
pub use run::{config_hash, run, Status, Summary, TaskResult};
