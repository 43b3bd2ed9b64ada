//! Verification toolkit for quantum permutation symmetries of glued spaces.
//!
//! The crate builds finite-dimensional representation data for the quantum
//! permutation group on `n` points (magic unitaries), an exact symbolic engine
//! for the defining relations of its generators, finite models of glued
//! product spaces `X_n × Y/∼`, and the coaction of a magic unitary on
//! functions over those spaces. On top of these it provides a family of
//! structural checks: relation verification, coassociativity (symbolic and at
//! representation level), invariance of the quotient function algebra,
//! generator recovery from evaluation slices, fixed-point (ergodicity)
//! dimension, connectivity, and a span-rank density report.
//!
//! Layering, bottom up:
//!
//! - [`numerics`]: dense complex matrices, Kronecker products, projection
//!   predicates, rank / nullspace / operator norm.
//! - [`magic`]: magic unitaries, their verification, the comultiplication at
//!   representation level, noncommutativity certificates.
//! - [`ncalg`]: exact noncommutative polynomials over the generators,
//!   parsing, normal forms, sum-collapse identity checking.
//! - [`spaces`]: discretized base spaces, gluing, quotient classes,
//!   connectivity, the quotient function algebra.
//! - [`coaction`]: the coaction of a magic unitary on product functions and
//!   every check built from it.
//! - [`report`]: the structured check-report type shared by all checks.
//!
//! All values are immutable after construction and all operations are pure,
//! so independent checks can run in parallel.

pub mod coaction;
pub mod magic;
pub mod ncalg;
pub mod numerics;
pub mod report;
pub mod spaces;

mod error;

pub use error::Error;
pub use report::{CheckReport, Metric};
