//! Configuration, orchestration and artifact writing for the `pathsmooth`
//! command-line tool.

pub mod calibrate;
pub mod config;
pub mod error;
pub mod harness;

pub use config::{Config, Overrides};
pub use error::{CliError, CliResult};
pub use harness::{run, Command, Manifest};
