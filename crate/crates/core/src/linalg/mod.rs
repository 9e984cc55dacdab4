//! Exact integer linear algebra.
//!
//! Everything here works over arbitrary-precision integers; there is no
//! overflow and no rounding. Matrices are dense and row-major, which is
//! plenty for the window sizes this crate works at.

mod matrix;
mod snf;
mod solve;

pub use matrix::{IntMatrix, LinalgError};
pub use snf::{smith_normal_form, SmithDecomposition};
pub use solve::{
    cokernel_structure, cokernel_with_projection, invert_unimodular, solve_linear,
    CokernelPresentation, CokernelStructure, LinearSolution, UnsolvableCertificate,
};
