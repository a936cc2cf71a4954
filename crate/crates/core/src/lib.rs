//! Numerical toolkit for pseudohermitian k-curvature on the Heisenberg group.
//!
//! The crate is organised bottom-up:
//!
//! * [`symmetric_functions`]: elementary symmetric functions of hermitian
//!   spectra, Newton transformations, Gårding cones and the matrix
//!   inequalities used by the k-Yamabe theory.
//! * [`field_calculus`]: a small expression language for scalar fields on
//!   `Hⁿ` and exact third-order Taylor jets of its expressions.
//! * [`heisenberg_geometry`]: the flat model `(Hⁿ, Θ₀)`, complex frame
//!   derivatives, the sublaplacian and quadrature over `Hⁿ`.
//! * [`conformal_engine`]: the deformed Schouten tensor of `e^{2u}Θ₀`,
//!   k-curvatures, Yamabe residuals, Cotton tensors and ellipticity.
//! * [`yamabe_functional`]: the CR k-Yamabe functional, the sphere constant
//!   and the variational identity.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait)]

pub mod conformal_engine;
pub mod error;
pub mod field_calculus;
pub mod heisenberg_geometry;
pub mod sampling;
pub mod symmetric_functions;
pub mod yamabe_functional;

pub use error::{Error, Result};
pub use num_complex::Complex64;
