//! File formats, configuration, experiment harness and command line for
//! [`wildpatrol_core`].
//!
//! Exit codes of the `wildpatrol` binary: 0 success, 1 I/O or malformed
//! input file, 2 usage or configuration error, 3 infeasible plan, 4 bad
//! experiment specification.

pub mod app;
pub mod compare;
pub mod config;
pub mod files;

pub use app::CliError;
pub use config::RunConfig;
