//! Random dynamical systems with place-dependent probabilities on a real interval.
//!
//! A system is a finite family of affine maps `w_e` of an interval `K`, each
//! applied with a probability `p_e(x)` that depends on the current point. This
//! crate evaluates such systems exactly, computes the path measures `P_x` on
//! label sequences, partitions `K` into the classes of mutually absolutely
//! continuous starting points (the fundamental Markov system), and checks the
//! resulting ergodic behaviour by exact linear algebra and seeded simulation.
//!
//! Modules:
//! - [`model`]: systems, points, the Markov operator and its adjoint, file format
//! - [`measures`]: cylinder measures, likelihood ratios, tail masses, evidence reports
//! - [`partition`]: Markov partition refinement, merge certificates, the fundamental system
//! - [`graph`]: digraph predicates, stationary weights, first moments
//! - [`dynamics`]: simulation, ergodic averages, contraction and convergence rates
//!
//! Arithmetic is generic over [`Scalar`]; [`Rational`] is exact, `f64` is fast.

pub mod dynamics;
pub mod error;
pub mod graph;
pub mod measures;
pub mod model;
pub mod partition;
pub mod sampling;
pub mod scalar;
pub mod specimens;

pub use error::{Error, ParseError, Result};
pub use scalar::{Rational, Scalar};

/// A system with exact rational coefficients.
pub type ExactSystem = model::SystemSpec<Rational>;
/// A system with `f64` coefficients, used for long simulations.
pub type FloatSystem = model::SystemSpec<f64>;
pub type ExactPoint = model::Point<Rational>;
pub type FloatPoint = model::Point<f64>;
