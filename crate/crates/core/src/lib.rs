//! Exact tail asymptotics for suprema of two-dimensional Gaussian random
//! fields whose variance is maximal along a line or a smooth curve.
//!
//! The crate is split along the computational pipeline:
//!
//! - [`randfield`]: exact simulation of fractional Brownian motion and the
//!   separable 2-D fields built from it.
//! - [`constants`]: Monte Carlo estimation of Pickands, Piterbarg and the
//!   generalized strip constants, all as `E[exp(sup(W - drift))]`.
//! - [`asymptotics`]: case classification and evaluation of the asymptotic
//!   tail formulas in the canonical form `K * u^p * Psi(u)`.
//! - [`harness`]: exceedance simulation for the fBm-sum field and numerical
//!   checks of the local variance/correlation expansions.
//! - [`cli`]: configuration, orchestration and CSV/SVG output.

pub mod asymptotics;
pub mod cli;
pub mod constants;
mod error;
pub mod harness;
pub mod randfield;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
