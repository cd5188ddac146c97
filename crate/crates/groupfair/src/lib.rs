//! Experiment harness for group-fair contextual bandits: configuration,
//! figure presets, parallel sweeps, CSV datasets and the `groupfair` CLI.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod output;
pub mod presets;
pub mod sweep;

pub use error::{Error, Result};
