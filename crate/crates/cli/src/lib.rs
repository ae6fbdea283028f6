//! Command-line front end: configuration parsing, dispatch to the numerical
//! modules, and CSV/JSON output with a hashed manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod execute;
pub mod manifest;

pub use config::{parse_config, parse_config_with, Command, CouplingSpec, RunConfig};
pub use error::{CliError, Result};
pub use execute::{configure_workers, execute, ExitReport};
pub use manifest::{verify_manifest, Manifest};
