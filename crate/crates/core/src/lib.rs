//! Atangana-Baleanu fractional resolvents on diagonalizable operators.
//!
//! The layers build on each other: [`special_functions`] evaluates
//! Mittag-Leffler functions, [`ab_kernel`] the AB kernel and its Laplace symbol,
//! [`operator_model`] holds diagonal (spectral) operators, [`resolvent_core`]
//! evaluates resolvents and the contour-integral family `V(t)`, [`analysis`]
//! fits and checks decay estimates and [`experiments`] drives whole runs.

pub mod ab_kernel;
pub mod analysis;
pub mod error;
pub mod experiments;
pub mod operator_model;
pub mod quad;
pub mod resolvent_core;
pub mod special_functions;

pub use error::{Error, Result};
