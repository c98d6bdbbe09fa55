//! Command-line driver for `cosmoburgers-core`: TOML configuration, snapshot
//! CSVs, JSON manifests and the experiment subcommands.

pub mod commands;
pub mod config;
pub mod output;
