//! Symbolic-regression boosting.
//!
//! A [`gp::GpRegressor`] evolves a single expression tree by genetic
//! programming. [`boosting::SyrboModel`] chains several of them as
//! gradient-boosting stages, each fitted to the residuals left by the
//! previous ones. [`harness`] and [`stats`] run the cross-validated
//! head-to-head benchmark and its permutation-test significance analysis.

pub mod boosting;
pub mod data;
pub mod error;
pub mod gp;
pub mod harness;
pub mod matrix;
pub mod primitives;
pub mod report;
pub mod seed;
pub mod stats;

pub use boosting::{SyrboConfig, SyrboModel};
pub use data::Dataset;
pub use error::{Error, Result};
pub use gp::{GpConfig, GpRegressor, Program};
pub use matrix::Matrix;
pub use primitives::Primitive;
