//! Library side of the `evh` command: configuration loading and the four
//! analysis commands, each writing CSV data, a gnuplot script and the
//! effective configuration into an output directory.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;

pub use commands::{cmd_optimize, cmd_pump, cmd_qv, cmd_simulate};
pub use config::RunConfig;
pub use error::CliError;
