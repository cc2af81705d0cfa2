//! Numerical laboratory for the liquid drop model
//! `E(Ω) = P(Ω) + D(Ω)`, where `P` is the perimeter and `D` the Coulomb
//! self-energy `½∬ |x − y|⁻¹`.
//!
//! The crate is organised around a small set of bodies ([`shapes::Body`])
//! and the quantities measured on them:
//!
//! - [`energy`]: Newtonian potentials, Coulomb and boundary–interior
//!   interaction energies, the ball profile and the two-ball splitting volume.
//! - [`santalo`]: unit-sphere-bundle sampling, chord moments and the two
//!   isoperimetric-type Coulomb inequalities.
//! - [`variation`]: Lagrange multiplier, stationarity residual, Minkowski
//!   deficit and the mean-convexity certificate.
//! - [`flow`]: volume-constrained gradient descent on spherical-harmonic
//!   shape coefficients.
//! - [`proofcheck`]: exact and interval verification of scalar inequality
//!   chains.
//!
//! Every Monte Carlo estimator derives the randomness of sample `i` from
//! `(seed, i)`, so results do not depend on the number of worker threads.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod energy;
pub mod error;
pub mod estimate;
pub mod flow;
pub mod harmonics;
pub mod proofcheck;
pub mod quadrature;
pub mod santalo;
pub mod shapes;
pub mod surface;
pub mod variation;

pub use error::{Error, Result};
pub use estimate::Estimate;
pub use shapes::Body;

/// 3-vector used for points and directions throughout the crate.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Version string embedded in every exported artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
