//! Weighted least-squares polynomial approximation on irregular domains.
//!
//! The approximation space is spanned by tensorized monomials over a
//! downward-closed multi-index set. Since no orthonormal basis is known on a
//! general domain, a surrogate basis is built that is orthonormal with respect
//! to a discrete inner product over uniform "anchor" samples, using a
//! Householder QR factorization of the monomial design matrix. The discrete
//! Christoffel function of that basis then defines a sampling measure on the
//! anchors, and a small weighted subsample yields a well-conditioned
//! least-squares problem.
//!
//! Module map:
//!
//! - [`index_sets`]: total-degree and hyperbolic-cross index sets.
//! - [`domains`]: membership tests, built-in geometries, rejection sampling.
//! - [`linalg`]: dense matrices, Householder QR, triangular solves, Jacobi.
//! - [`surrogate`]: the discretely orthonormal surrogate basis.
//! - [`sampling`]: the discrete induced measure and its alias sampler.
//! - [`estimator`]: weighted normal equations, truncation, sample budgets.
//! - [`bench`]: end-to-end pipeline, Monte Carlo sweeps, CSV output.

// `!(x > 0.0)` style checks are there to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod domains;
pub mod error;
pub mod estimator;
pub mod index_sets;
pub mod linalg;
pub mod sampling;
pub mod surrogate;

pub use error::{Error, Result};

/// Binary64 machine epsilon.
pub const MACHINE_EPSILON: f64 = f64::EPSILON;
