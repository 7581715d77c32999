//! Command-line front end for `capwhitham`: configuration, artifact output
//! and the acceptance suite.

// `!(x > 0)` style tests are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

pub use config::RunConfig;
pub use error::CliError;
