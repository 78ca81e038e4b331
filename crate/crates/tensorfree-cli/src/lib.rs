//! Experiment runner for the `tensorfree` library: seeded scenarios that
//! produce JSON reports of estimates, targets and standard errors.

pub mod model;
pub mod report;
pub mod scenarios;

pub use report::{DecayFit, ExperimentConfig, ExperimentReport, Stat, SCHEMA_VERSION};
pub use scenarios::run;
