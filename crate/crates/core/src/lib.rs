//! Certified lower bounds on the Neumann spectral gap λ₁(Ω, μ) of
//! log-concave probability measures μ ∝ e^{−V} restricted to convex bodies
//! (and the complement of a ball under the standard Gaussian), together with
//! independent numerical reference values and a DGSM/Sobol application layer.

// `!(x > 0.0)` also rejects NaN; reference constants keep every digit given.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod bounds;
pub mod descriptor;
pub mod error;
pub mod geometry;
pub mod gsa;
pub mod linalg;
pub mod lowdisc;
pub mod measures;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod validate;

pub use bounds::{best_bound, certify_weight, GridSpec, WeightFn, WeightSpec};
pub use error::{GapError, Result};
pub use geometry::{Body, BoundaryPoint, OneDimConvexFn, VolumeEstimate};
pub use measures::{HessianEigs, Potential};
pub use report::{BoundKind, BoundReport, Method};
