//! Command-line front end: versioned JSON configuration, the end-to-end
//! pipeline, and deterministic output files.

pub mod config;
pub mod output;
pub mod pipeline;
pub mod svg;

pub use config::{ConfigError, RunConfig};
pub use pipeline::{run, RunError, RunResult};
