//! Command-line front end for the spinphonon simulator: TOML run
//! configuration, dispatch to the protocol drivers, and CSV, JSON and SVG
//! output.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod schema;
pub mod svg;

pub use config::{parse_config, parse_config_str, Kind, RunConfig};
pub use error::CliError;
pub use run::run_and_emit;
