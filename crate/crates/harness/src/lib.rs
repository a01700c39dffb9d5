//! Experiment runner for one-bit sensing on the sphere.
//!
//! Each experiment runs `trials` independent trials whose randomness is
//! derived from `(seed, trial, experiment)`, so reports are byte-identical
//! for a fixed configuration regardless of the number of worker threads.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;
pub mod runner;

pub use config::{Cli, Experiment, ExperimentConfig, Format, MSetting, RunConfig};
pub use error::HarnessError;
