//! Group-level causal discovery for multivariate time series.
//!
//! The central question this crate answers: given a panel of N time series
//! organized into G disjoint groups (subsystems), which groups causally
//! drive which others? The main pipeline ([`engine`]) answers it by
//!
//! 1. training one probabilistic autoregressive forecaster on the whole
//!    panel ([`forecaster`]),
//! 2. building second-order Gaussian knockoff copies of all variables
//!    ([`knockoffs`]),
//! 3. substituting each group's columns by their knockoffs in the trained
//!    model's inputs and collecting windowed forecast residuals, and
//! 4. testing, per target variable, whether the residual distribution
//!    shifted ([`stats`]); a group edge i → j is asserted when at least one
//!    variable of group j shifts at level alpha.
//!
//! Around the pipeline sit a structural-causal-model benchmark generator
//! ([`scm`]), canonical-correlation baselines ([`cca`]), and covariance
//! regime segmentation for non-stationary inputs ([`regimes`]).
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature only toggles `std`-dependent conveniences in dependencies. All
//! floating-point math routes through [`fmath`] (libm) so results are
//! bit-identical with and without `std`. Every randomized operation takes
//! an explicit seed and is deterministic given it.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
// Index-based loops mirror the subscripts of the linear algebra they
// implement; iterator rewrites would obscure the formulas.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod cca;
pub mod data;
pub mod engine;
pub mod error;
pub mod fmath;
pub mod forecaster;
pub mod knockoffs;
pub mod linalg;
pub mod regimes;
pub mod rng;
pub mod scm;
pub mod stats;

pub use data::{GroupCausalGraph, GroupPartition, PairLabel, ResidualSample, TimeSeriesPanel};
pub use error::CoreError;
pub use linalg::Matrix;
