//! Prediction-adaptive bandit convex optimization.
//!
//! The crate simulates online convex optimization where the learner only sees
//! loss *values* at the points it queries, but receives a gradient hint `m_t`
//! before every round. The central learner builds a two-point estimator
//! centered on the hint, so that the estimator's variance shrinks with the
//! prediction error rather than with the gradient norm.
//!
//! Layout:
//!
//! - [`geometry`]: feasible sets, Euclidean projections, shrunken sets, sphere sampling.
//! - [`environments`]: loss sequences, including the lower-bound instances.
//! - [`predictors`]: clipped, history-measurable gradient hints.
//! - [`estimators`]: zeroth-order gradient estimators (pure functions).
//! - [`algorithms`]: the optimistic learners and the classical baselines.
//! - [`metrics`]: regret, prediction error, path length and scaling fits.
//!
//! Rounds are indexed from `0` throughout the API.

pub mod algorithms;
pub mod environments;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod metrics;
pub mod predictors;
pub mod rng;

pub use error::{Error, Result};

/// Dense real vector used for points, directions and gradients.
pub type Vector = nalgebra::DVector<f64>;
