//! File formats, configuration and commands behind the `infogeo` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

pub use commands::{run_pipeline, RunReport, StageReport};
pub use config::{derive_seed, PipelineConfig};
pub use error::{CliError, Result};
