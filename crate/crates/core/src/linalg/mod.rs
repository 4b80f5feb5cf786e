//! Dense complex linear algebra.
//!
//! Everything here is written for small dense matrices (d up to a few
//! hundred) and favors accuracy and determinism over speed. All routines are
//! pure functions of their inputs.

mod expm;
mod lu;
mod matrix;
mod projector;
mod qr;
mod schur;
mod svd;

pub use expm::matrix_exp;
pub use lu::{inverse, solve, Lu};
pub use matrix::{c64, ComplexMatrix, ComplexVector};
pub use projector::{
    riesz_projector, riesz_projector_with_margin, SpectralCluster, DEFAULT_GAP_MARGIN,
};
pub use qr::{householder_qr, Qr};
pub use schur::{eigen_order, eigenvalues, schur, spectral_radius, Schur};
pub use svd::{operator_norm, singular_values};
