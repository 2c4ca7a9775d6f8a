//! Command-line certifier for the ED degree of flag, Grassmann, Stiefel and
//! Schubert matrix models.
//!
//! Exit codes: `0` success, `1` a certification check failed, `2` invalid
//! input or a degenerate anchor, `3` enumeration overflow, `4` internal
//! inconsistency.

pub mod args;
pub mod commands;
pub mod descriptor;
pub mod error;
pub mod report;

pub use args::Cli;
pub use commands::{run, Outcome};
pub use error::CliError;
