//! Configuration, CSV schema and subcommands behind the `itvolt` binary.

pub mod commands;
pub mod config;
pub mod row;

pub use config::{ConfigError, ExpmKind, ModelKind, ModelParams, RunConfig, Settings, SolverKind};
pub use row::{read_rows, write_rows, ResultRow, RowError, RowStatus};
