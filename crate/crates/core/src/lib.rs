//! Simulation and spectral analysis of general branching processes with
//! Dirichlet birth weights and the random self-similar Cantor strings they
//! generate.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: special functions, complex zeta, polynomial roots and
//!   Beta-weighted quadrature.
//! * [`gbp`]: the branching-process simulator (cut-sets, the fundamental
//!   martingale, covering counts).
//! * [`renewal`]: the transform `psi`, renewal moments, characteristic
//!   polynomials, spectral roots, residues and regime classification.
//! * [`string`]: Cantor string generation, exact Dirichlet eigenvalue counts
//!   and the spectral CLT experiment.
//! * [`rconst`]: the certified oscillation amplitude `R`.
//! * [`crt`]: the Dirichlet(1/2,1/2,1/2) skeleton of the Brownian CRT.

pub mod crt;
pub mod error;
pub mod gbp;
pub mod numerics;
pub mod rconst;
pub mod renewal;
pub mod seed;
pub mod stats;
pub mod string;

pub use error::{Error, Result};
pub use gbp::WeightSpec;
pub use num_complex::Complex64;
