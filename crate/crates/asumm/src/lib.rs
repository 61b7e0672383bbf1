//! Command line, file formats and model gateway around `asumm-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod gateway;
pub mod io;
pub mod manifest;

pub use error::{Error, Result};
