//! Command line, file formats and plots for `gamescope-core`.

pub mod checkpoint;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod plots;
pub mod setup;
pub mod svg;

pub use error::{AppError, Result};
