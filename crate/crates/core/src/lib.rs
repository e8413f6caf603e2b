//! Abel–Lidskii summation of root-vector expansions at matrix scale.
//!
//! The crate treats a finite complex matrix `B` as a compact operator and provides
//! the pieces needed to expand a vector in Jordan chains of `B`, regularize the
//! expansion with the factor `exp(-lambda^alpha t)`, and compare the grouped
//! series with contour integrals of the resolvent `B (I - lambda B)^{-1}`.
//!
//! Module map:
//! - [`operator`]: operator representation, resolvent solves, singular values,
//!   numerical-range sectors and Fredholm determinants.
//! - [`spectral`]: Jordan chains, biorthogonal adjoint chains, Riesz projectors.
//! - [`exponent`]: counting functions, convergence exponent and genus, the
//!   `beta(r)` profile, canonical products and the circle-scan resolvent bound.
//! - [`summation`]: Abel polynomials, regularized coefficients and grouping.
//! - [`contour`]: sector and power-type contours, resolvent-functional quadrature,
//!   residues and resolvent bound checks.
//! - [`evolution`]: the fractional Cauchy problem and its verification.
//! - [`families`]: seeded test-matrix constructions shared by tests and tooling.

pub mod contour;
pub mod error;
pub mod evolution;
pub mod exponent;
pub mod families;
pub mod linalg;
pub mod operator;
pub mod quadrature;
pub mod spectral;
pub mod summation;

pub use error::{Error, Result};
pub use linalg::{C64, CMatrix, CVector};
