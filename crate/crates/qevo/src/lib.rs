//! Command-line front end of the qevo circuit synthesis engine: file
//! formats, configuration, parallel evaluation, datasets and experiments.

pub mod circuit_json;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod experiment;

pub use error::{Error, Result};
