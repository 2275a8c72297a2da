//! Recognition and identification of maritime targets from heterogeneous
//! ESM and radar reports.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! pipeline:
//!
//! - [`measurement`]: ESM signal reports and debiased polar-to-Cartesian
//!   radar conversion.
//! - [`evidence`]: Dempster-Shafer mass functions and combination.
//! - [`attributes`]: recursive Bayesian attribute estimation.
//! - [`tracking`]: Kalman filter and per-class IMM estimators.
//! - [`classification`]: class likelihoods, the recursive class posterior and
//!   the heterogeneous report classifier.
//! - [`simulation`]: the three-class maritime Monte Carlo scenario.
//!
//! File formats, the parallel Monte Carlo driver and the command-line tool
//! live in the companion `fusionkit` crate.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod attributes;
pub mod classification;
pub mod distributions;
pub mod error;
pub mod evidence;
pub mod measurement;
pub mod simulation;
pub mod tracking;

pub use error::{Error, Result};
