//! Experiment runner for the PEM separator: TOML experiment files, seeded
//! generate → mix → separate → score pipelines, sweeps, diagnostics traces and
//! versioned CSV output.

pub mod commands;
pub mod error;
pub mod pipeline;
pub mod report;
pub mod spec;

pub use error::CliError;
pub use spec::Experiment;
