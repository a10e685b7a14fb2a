//! File formats, configuration, parallel drivers and the command-line front
//! end for [`qestim_core`].

pub mod cli;
pub mod config;
mod error;
pub mod io;
pub mod manifest;
pub mod models;
pub mod parallel;

pub use error::{CliError, Result};
