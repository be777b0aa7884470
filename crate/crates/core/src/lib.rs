//! Certified adversarial robustness for quantum classifiers.
//!
//! A classifier that predicts class `k_A` on a benign state `sigma` with
//! probability at least `p_A` keeps that prediction on every adversarial state
//! `rho` for which the optimal (Helstrom) hypothesis tests between `sigma` and
//! `rho` have type-II errors summing to more than one. This crate builds those
//! tests for arbitrary finite-dimensional states, evaluates the robustness
//! condition, provides the closed-form trace-distance radii that follow from it,
//! and runs the finite-shot certification protocol with Hoeffding bounds.
//!
//! Modules:
//!
//! - [`quantum`]: density matrices, pure states, channels, POVMs, trace distance
//!   and fidelity.
//! - [`hypothesis`]: signed eigenprojections of `rho - t sigma`, `tau(alpha_0)`,
//!   Helstrom operators and the robustness condition.
//! - [`bounds`]: closed-form certified radii.
//! - [`classifier`]: channel + POVM classifiers and the worst-case construction.
//! - [`certification`]: sampling-based certification.
//! - [`oracle`]: brute-force verifiers.
//! - [`report`]: CSV and worked-example output used by the command line tool.
//! - [`io`]: JSON file formats.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod certification;
pub mod classifier;
pub mod error;
pub mod hypothesis;
pub mod io;
pub mod oracle;
pub mod quantum;
pub mod report;
mod rng;

pub use error::{Error, Result};

/// Numerical tolerances shared across the crate.
pub mod tol {
    /// Hermiticity residual, relative to `max(1, ||A||_1)`.
    pub const HERM: f64 = 1e-9;
    /// Absolute deviation of a trace from one.
    pub const TRACE: f64 = 1e-9;
    /// Trace-preservation / POVM completeness residual.
    pub const TP: f64 = 1e-9;
    /// Smallest eigenvalue accepted as non-negative.
    pub const PSD: f64 = 1e-9;
    /// Eigendecomposition reconstruction and projector tolerances.
    pub const EIG: f64 = 1e-10;
    /// Unit-norm tolerance for state vectors.
    pub const NORM: f64 = 1e-9;
    /// A density matrix is treated as pure when its second eigenvalue is below this.
    pub const RANK_ONE: f64 = 1e-8;
}
