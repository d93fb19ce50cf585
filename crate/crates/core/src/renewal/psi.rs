//! The Mellin-type transform `psi(theta) = E sum_i T_i^theta` of Dirichlet
//! weights and quantities derived from it.

use crate::error::{Error, Result};
use crate::gbp::WeightSpec;
use crate::numerics::special::{digamma, digamma_complex, ln_gamma_complex, log_gamma, trigamma};
use num_complex::Complex64;

const INTEGRALITY_TOL: f64 = 1e-9;

/// `Some(d)` when `x` is a non-negative integer up to rounding.
pub(crate) fn as_integer(x: f64) -> Option<usize> {
    let r = x.round();
    if r >= 0.0 && (x - r).abs() <= INTEGRALITY_TOL * r.max(1.0) {
        Some(r as usize)
    } else {
        None
    }
}

/// Whether `alpha0 - alpha_i` is an integer for every `i`, which makes
/// `psi` a rational function.
pub fn is_integral(spec: &WeightSpec) -> bool {
    let a0 = spec.alpha0();
    spec.alphas().iter().all(|&a| as_integer(a0 - a).is_some())
}

/// One summand `Gamma(a0) Gamma(a + theta) / (Gamma(a) Gamma(a0 + theta))`
/// and its logarithmic derivative.
fn term(alpha: f64, alpha0: f64, theta: Complex64) -> Result<(Complex64, Complex64)> {
    if let Some(d) = as_integer(alpha0 - alpha) {
        // prod_{k<d} (alpha + k) / (alpha + theta + k): entire in the
        // numerator, poles at theta = -alpha - k.
        let mut value = Complex64::new(1.0, 0.0);
        let mut log_deriv = Complex64::new(0.0, 0.0);
        for k in 0..d {
            let denom = theta + alpha + k as f64;
            if denom.norm() == 0.0 {
                return Err(Error::Pole(format!("psi at theta = {theta}")));
            }
            value *= (alpha + k as f64) / denom;
            log_deriv -= denom.inv();
        }
        return Ok((value, log_deriv));
    }
    let upper = theta + alpha0;
    if upper.im == 0.0 && upper.re <= 0.0 && upper.re == upper.re.round() {
        // 1/Gamma(alpha0 + theta) vanishes.
        return Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
    }
    let lower = theta + alpha;
    let log_value =
        log_gamma(alpha0)? - log_gamma(alpha)? + ln_gamma_complex(lower)? - ln_gamma_complex(upper)?;
    let log_deriv = digamma_complex(lower)? - digamma_complex(upper)?;
    Ok((log_value.exp(), log_deriv))
}

/// `psi(theta) = Gamma(a0)/Gamma(a0 + theta) * sum_i Gamma(a_i + theta)/Gamma(a_i)`.
///
/// Summands with `a0 - a_i` integral use the finite product form, which is
/// exact away from its poles; the rest go through complex log-gamma.
pub fn psi(spec: &WeightSpec, theta: Complex64) -> Result<Complex64> {
    let a0 = spec.alpha0();
    let mut acc = Complex64::new(0.0, 0.0);
    for &a in spec.alphas() {
        acc += term(a, a0, theta)?.0;
    }
    Ok(acc)
}

/// `psi'(theta)`.
pub fn psi_derivative(spec: &WeightSpec, theta: Complex64) -> Result<Complex64> {
    let a0 = spec.alpha0();
    let mut acc = Complex64::new(0.0, 0.0);
    for &a in spec.alphas() {
        let (v, ld) = term(a, a0, theta)?;
        acc += v * ld;
    }
    Ok(acc)
}

/// `psi` and `psi'` together.
pub fn psi_with_derivative(spec: &WeightSpec, theta: Complex64) -> Result<(Complex64, Complex64)> {
    let a0 = spec.alpha0();
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for &a in spec.alphas() {
        let (v, ld) = term(a, a0, theta)?;
        value += v;
        deriv += v * ld;
    }
    Ok((value, deriv))
}

pub fn psi_real(spec: &WeightSpec, theta: f64) -> Result<f64> {
    Ok(psi(spec, Complex64::new(theta, 0.0))?.re)
}

/// The transform `f(w) = psi(1 - w / gamma)` of `nu_gamma`.
pub fn f_transform(spec: &WeightSpec, w: Complex64) -> Result<Complex64> {
    psi(spec, 1.0 - w / spec.gamma())
}

/// `f'(w) = -psi'(1 - w/gamma) / gamma`.
pub fn f_derivative(spec: &WeightSpec, w: Complex64) -> Result<Complex64> {
    Ok(-psi_derivative(spec, 1.0 - w / spec.gamma())? / spec.gamma())
}

/// First and second moments of `nu_gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mu1: f64,
    pub mu2: f64,
}

impl Moments {
    /// Limit `mu2 / (2 mu1^2)` of `H(t) - t / mu1`.
    pub fn renewal_limit(&self) -> f64 {
        self.mu2 / (2.0 * self.mu1 * self.mu1)
    }
}

/// `mu1 = -psi'(1)/gamma` and `mu2 = psi''(1)/gamma^2` in closed form.
pub fn moments(spec: &WeightSpec) -> Result<Moments> {
    let a0 = spec.alpha0();
    let d0 = digamma(a0 + 1.0)?;
    let t0 = trigamma(a0 + 1.0)?;
    let mut first = 0.0;
    let mut second = 0.0;
    for &a in spec.alphas() {
        let w = a / a0;
        let diff = digamma(a + 1.0)? - d0;
        first += w * diff;
        second += w * (diff * diff + trigamma(a + 1.0)? - t0);
    }
    let g = spec.gamma();
    Ok(Moments {
        mu1: -first / g,
        mu2: second / (g * g),
    })
}
