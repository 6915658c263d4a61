//! Relocatable one-step-ahead solar irradiation forecasting.

// `!(x < y)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dataset;
pub mod error;
pub mod forecast;
pub mod metrics;
pub mod mlp;
pub mod preprocessing;
pub mod pv;
pub mod solar_geometry;

pub use error::{Error, ModelFileError, Result};
