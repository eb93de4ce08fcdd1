//! Numerical engine for projectively flat Finsler geometry.
//!
//! The crate computes machine-precision geometry of Finsler metric families
//! (norms, metric tensors, projective factors), their sprays and curvature,
//! integrates geodesics and nonlinear parallel transport, and certifies,
//! through the numerical rank of a Gram matrix of indicatrix functions,
//! that a surface metric's holonomy group is infinite dimensional.
//!
//! Pipeline, bottom up:
//!
//! * [`jet`]: forward-mode derivative engine and its finite-difference oracle;
//! * [`metrics`]: the metric family catalog (norm, metric tensor, projective factor);
//! * [`spray`]: geodesic coefficients, horizontal lift, geodesic integration;
//! * [`curvature`]: curvature tensor, flag-curvature residuals, Berwald derivatives;
//! * [`holonomy`]: parallel transport, loop holonomy, polar profiles, rank certificates;
//! * [`submanifold`]: restriction to totally geodesic coordinate planes.
//!
//! Everything is pure computation over `f64`; no operation holds shared
//! mutable state, so the whole API is safe to call concurrently.

pub mod curvature;
pub mod error;
pub mod holonomy;
pub mod jet;
pub mod metrics;
pub mod ode;
pub mod spray;
pub mod submanifold;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{FinslerError, Result};
