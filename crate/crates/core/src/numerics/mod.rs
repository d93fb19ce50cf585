//! Numerical building blocks shared by the analysis modules.

pub mod poly;
pub mod quad;
pub mod special;
pub mod sum;
pub mod zeta;

pub use poly::{companion_roots, poly_roots, Polynomial, Root};
pub use quad::{beta_weighted_integral, Integral};
pub use special::{digamma, ln_gamma_complex, log_gamma, trigamma};
pub use zeta::complex_zeta;

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Rejects NaN or infinite components.
pub fn finite(z: Complex64, what: &str) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Domain(format!("{what} is not finite: {z}")))
    }
}
