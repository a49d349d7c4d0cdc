//! Numerical reference values for λ₁: one-dimensional Sturm–Liouville
//! reductions for radial and product measures, and Rayleigh–Galerkin upper
//! bounds on a polynomial basis for general bodies.

mod galerkin;
mod sturm;

pub use galerkin::{galerkin_upper, GalerkinEstimate, GalerkinProblem, Quadrature};
pub use sturm::{
    product_gap, radial_gap, sturm_gap, Grading, ProductGap, RadialGap, Sector, SturmEstimate, SturmProblem,
};

#[cfg(test)]
mod tests;
