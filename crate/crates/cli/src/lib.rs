//! Batch front-end for the ym-helix laboratory: experiment configuration,
//! runners, the verification suite and refinement studies.

pub mod blocks;
pub mod config;
pub mod report;
pub mod run;
pub mod study;
pub mod suite;

pub use config::{Experiment, ExperimentConfig, MeshSpec, Tolerances};
pub use report::{Check, Report, Status};
pub use run::run;
pub use suite::SUITE_BUDGET_S;
