//! Relative equilibria of three bodies on the unit sphere.
//!
//! A relative equilibrium is a motion in which the bodies rotate rigidly
//! about a fixed axis. This crate decides whether a given triangle of arc
//! angles admits such a motion, recovers the configuration and the angular
//! velocity, and checks the answer by integrating the equations of motion.
//!
//! * [`geometry`]: masses, shapes, configurations and conversions.
//! * [`inertia`]: inertia tensor, the shape matrix J and their spectra.
//! * [`potential`]: interaction models, the cotangent potential among them.
//! * [`euler`]: collinear solutions on a rotating meridian.
//! * [`lagrange`]: non-collinear solutions.
//! * [`dynamics`]: constrained integration and conservation checks.
//! * [`solver`]: name-based registry routing shapes to the right solver.

// `!(x <= tol)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod equations;
pub mod error;
pub mod euler;
pub mod geometry;
pub mod inertia;
pub mod lagrange;
pub mod potential;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{CartesianConfig, MassTriple, ShapeAngles, SphericalConfig};
pub use potential::{cotangent, negate, Potential, PotentialRef, PotentialRegistry};
pub use solver::{Classification, ReSolution, SolverRegistry};
