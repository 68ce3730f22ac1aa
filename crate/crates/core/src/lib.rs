//! Solvers for nonlinear equations whose linearization has a bounded
//! right-inverse, including the derivative-loss regime.
//!
//! Two layers:
//!
//! * a local solver that finds `x` with `f(x) = y` inside a ball by explicit
//!   Euler steps of the right-inverse descent flow `dx/dt = L(x)(y - f(x))`,
//!   enforcing the radius, norm-bound and residual-decay contracts of that
//!   flow at runtime ([`local`], with path tracking and uniqueness probes in
//!   [`branch`]);
//! * a multilevel Galerkin iteration on a discretized tame scale of graded
//!   spectral norms and smoothing projectors, which assembles a preimage one
//!   frequency window at a time when the right-inverse loses derivatives
//!   ([`scale`], [`nash_moser`]).
//!
//! Problem instances live in [`problems`]: the polynomial model map on the
//! unit disc with its closed-form continuous inverse, the pointwise
//! superposition operator with its exact inverse oracle, and a manufactured
//! spectral problem whose inverse loses `ell'` derivatives.

// Negated comparisons on floats are deliberate: they reject NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branch;
pub mod config;
pub mod error;
pub mod local;
pub mod nash_moser;
pub mod poly;
pub mod problems;
pub mod report;
pub mod scale;
pub mod space;

pub use error::{Error, Result};
