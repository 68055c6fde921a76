//! Exact-diagonalization toolkit for detailed-balanced quantum Gibbs samplers.
//!
//! The crate builds KMS-detailed-balanced CKG Lindbladians for qubit
//! Pauli-string Hamiltonians, couples a slow system to an auxiliary replica
//! through a swap channel, and measures spectral gaps, mixing times and
//! bottleneck quantities by dense linear algebra. A classical Glauber /
//! parallel-tempering baseline lives in [`classical`].
//!
//! Conventions used throughout:
//! - site 0 is the most significant qubit of a computational basis index;
//! - operators are vectorized by column stacking, `vec(AXB) = (Bᵀ ⊗ A) vec(X)`;
//! - replica-exchange registers are ordered (system A, system B, auxiliary A).

pub mod classical;
pub mod error;
pub mod hamiltonians;
pub mod harness;
pub mod lindblad;
pub mod linalg;
pub mod mixing;
pub mod quadrature;
pub mod replica;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
