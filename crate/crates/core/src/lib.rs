//! Numerical core for infinite products of random reduced dynamics operators
//! (RRDOs).
//!
//! An RRDO is a random matrix `M(ω)` that is a contraction for some fixed norm
//! and leaves a deterministic unit vector `ψ_S` invariant. This crate provides
//!
//! * [`linalg`]: dense complex kernels (ordered Schur form, Riesz projectors,
//!   Jacobi SVD, Padé matrix exponential, QR),
//! * [`rrdo`]: validation of the two defining conditions and the splitting
//!   `M = P + M_Q`,
//! * [`ensemble`]: iid distributions over RRDOs with exact first moments and
//!   the closed-form Cesàro limit `θ`,
//! * [`products`]: the forward/reverse product processes, decay fits,
//!   `η_∞` and Lyapunov spectra,
//! * [`markov`] and [`spin`]: the random stochastic matrix and two-level
//!   repeated-interaction front-ends.
//!
//! The crate is `no_std` and only needs `alloc`. Floating point special
//! functions go through `libm`, so results are bit-for-bit reproducible
//! across platforms for a given seed.
#![no_std]
#![warn(missing_debug_implementations)]
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ensemble;
pub mod error;
pub mod linalg;
pub mod markov;
pub mod products;
pub mod rng;
pub mod rrdo;
pub mod spin;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{c64, ComplexMatrix, ComplexVector};
