//! Monte Carlo BER simulation, result files and presets for
//! multidimensional index modulation, on top of [`mdim_core`].

pub mod cli;
pub mod config;
mod error;
pub mod harness;
pub mod io;
pub mod presets;
pub mod runner;

pub use error::{Error, Result};
pub use mdim_core as core;
