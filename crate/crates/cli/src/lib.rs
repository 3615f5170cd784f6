//! Batch front end for the `risopt` library: TOML scenario files, an
//! impedance cache, and the `gen-impedances`, `optimize` and
//! `sweep-spacing` commands.

pub mod app;
pub mod cache;
pub mod commands;
pub mod config;
pub mod error;

pub use config::ScenarioConfig;
pub use error::CliError;
