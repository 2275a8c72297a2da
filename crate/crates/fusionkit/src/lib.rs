//! Experiment harness, file formats and command implementations on top of
//! `fusionkit-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod harness;
pub mod output;
pub mod reports;

pub use error::{exit, AppError};
