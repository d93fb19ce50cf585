//! The oscillation amplitude `R e^{i theta} = int_0^inf e^{-a y} E phi(y) dy`,
//! `a = gamma (1 - rho)`, for symmetric two-part Dirichlet strings, with a
//! rigorous bound on the series truncation.
//!
//! With `S~ = (1 - T^{1/gamma} - (1 - T)^{1/gamma}) / pi` and
//! `T ~ Beta(alpha, alpha)` the integral equals
//! `E S~^a (sum_{n>=1} a_n + a_0) - a_0 E S~`; the tail of `sum a_n` is
//! replaced by `zeta(1 + a) / 2` minus the matching partial sum.

use crate::error::{Error, Result};
use crate::gbp::WeightSpec;
use crate::numerics::quad::beta_weighted_integral_tol;
use crate::numerics::sum::ComplexKahan;
use crate::numerics::zeta::complex_zeta;
use crate::renewal::direct::damped_newton;
use crate::renewal::spectral_roots;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest truncation level tried.
pub const MAX_TERMS: u64 = 100_000_000;
/// Block length of the parallel partial sums.
const BLOCK: u64 = 1 << 16;
/// Starting absolute tolerance for the Beta moments.
const MOMENT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RCertificate {
    pub alpha: f64,
    pub gamma: f64,
    pub rho: Complex64,
    pub a: Complex64,
    pub estimate: Complex64,
    #[serde(rename = "R")]
    pub r: f64,
    pub phase: f64,
    #[serde(rename = "N")]
    pub n: u64,
    /// `E S~^{Re a} N^{-1-Re a} f(a) / (1 + Re a)`.
    pub error_bound: f64,
    /// Quadrature error of the moments propagated through the estimate.
    pub quadrature_error: f64,
}

/// `S(t) = 1 - t^{1/gamma} - (1 - t)^{1/gamma}`, evaluated from the nearer
/// endpoint.
fn gap_fraction(t: f64, gamma: f64) -> f64 {
    let u = t.min(1.0 - t);
    let p = 1.0 / gamma;
    -(p * (-u).ln_1p()).exp_m1() - u.powf(p)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("gamma must lie in (0, 1), got {gamma}")))
    }
}

fn moment_with_tol(alpha: f64, gamma: f64, a: Complex64, tol: f64) -> Result<(Complex64, f64)> {
    check_gamma(gamma)?;
    if a.re < 0.0 {
        return Err(Error::Domain(format!("moment order needs Re a >= 0, got {a}")));
    }
    if a == Complex64::new(0.0, 0.0) {
        return Ok((Complex64::new(1.0, 0.0), 0.0));
    }
    let i = beta_weighted_integral_tol(
        |t| {
            let s = gap_fraction(t, gamma);
            if s <= 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                (a * (s / PI).ln()).exp()
            }
        },
        alpha,
        tol,
    )?;
    Ok((i.value, i.error))
}

/// `E S~^a` under `T ~ Beta(alpha, alpha)`.
pub fn s_tilde_moment(alpha: f64, gamma: f64, a: Complex64) -> Result<Complex64> {
    Ok(moment_with_tol(alpha, gamma, a, MOMENT_TOL)?.0)
}

/// `a_n = n^{1-a} / (a (1 - a)) ((1 + 1/n)^{-a} (1 + a/n) - 1)` for `n >= 1`.
///
/// The bracket is `O(n^-2)`; for `n >= 8` it is summed from its binomial
/// series to avoid the cancellation.
pub fn series_term(n: u64, a: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let nf = n as f64;
    let x = 1.0 / nf;
    let bracket = if n < 8 {
        (-a * x.ln_1p()).exp() * (one + a * x) - one
    } else {
        // (1+x)^{-a}(1+ax) - 1 = sum_{k>=2} (b_k + a b_{k-1}) x^k, b_k = binom(-a, k).
        let mut b_prev = -a;
        let mut xk = x;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 2..80 {
            let b = b_prev * (-a - (k as f64 - 1.0)) / k as f64;
            xk *= x;
            let term = (b + a * b_prev) * xk;
            acc += term;
            if term.norm() <= 1e-18 * acc.norm() {
                break;
            }
            b_prev = b;
        }
        acc
    };
    ((one - a) * nf.ln()).exp() / (a * (one - a)) * bracket
}

/// `f(a) = (|a^2 (a+1)| / 2 + 2^{4 + Re a} e^{pi |Im a| / 6} |1 + a|) / |a (1 - a)|`.
pub fn f_bound(a: Complex64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    ((a * a * (a + one)).norm() / 2.0 + 2f64.powf(4.0 + a.re) * (PI * a.im.abs() / 6.0).exp() * (one + a).norm())
        / (a * (one - a)).norm()
}

/// `(sum_{n=1}^N a_n, sum_{n=1}^N n^{-1-a})`, compensated, each block
/// summed from its largest index down and the blocks merged from `N` down.
fn partial_sums(a: Complex64, n: u64) -> (Complex64, Complex64) {
    let blocks = n.div_ceil(BLOCK);
    let parts: Vec<(ComplexKahan, ComplexKahan)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK + 1;
            let hi = ((b + 1) * BLOCK).min(n);
            let mut s = ComplexKahan::new();
            let mut z = ComplexKahan::new();
            for k in (lo..=hi).rev() {
                s.add(series_term(k, a));
                z.add((-(a + 1.0) * (k as f64).ln()).exp());
            }
            (s, z)
        })
        .collect();
    let mut s = ComplexKahan::new();
    let mut z = ComplexKahan::new();
    for (ps, pz) in parts.iter().rev() {
        s.merge(ps);
        z.merge(pz);
    }
    (s.value(), z.value())
}

/// Moments of `S~` entering the estimate.
#[derive(Clone, Copy, Debug)]
struct SMoments {
    at_a: Complex64,
    at_re_a: f64,
    first: f64,
    error: f64,
}

/// Smallest `N >= 3` with bound `<= tol`.
fn truncation_level(m: &SMoments, a: Complex64, tol: f64) -> Result<(u64, f64)> {
    let r = a.re;
    let scale = m.at_re_a * f_bound(a) / (1.0 + r);
    let bound = |n: u64| scale * (n as f64).powf(-1.0 - r);
    if scale <= 0.0 {
        return Ok((3, 0.0));
    }
    let guess = (scale / tol).powf(1.0 / (1.0 + r)).ceil();
    if !(guess <= MAX_TERMS as f64) {
        return Err(Error::Tolerance {
            what: format!("R truncation bound at the {MAX_TERMS}-term cap"),
            requested: tol,
            achieved: bound(MAX_TERMS),
        });
    }
    let mut n = (guess as u64).max(3);
    while n > 3 && bound(n - 1) <= tol {
        n -= 1;
    }
    while bound(n) > tol {
        n += 1;
    }
    Ok((n, bound(n)))
}

fn estimate(m: &SMoments, a: Complex64, n: u64) -> Result<(Complex64, f64)> {
    let one = Complex64::new(1.0, 0.0);
    let a0 = one / (one - a);
    let (sa, sz) = partial_sums(a, n);
    let series = sa + 0.5 * complex_zeta(one + a)? - 0.5 * sz;
    let value = m.at_a * series + a0 * (m.at_a - m.first);
    let quad = m.error * ((series + a0).norm() + 2.0 * a0.norm());
    Ok((value, quad))
}

fn certify(alpha: f64, gamma: f64, rho: Complex64, m: &SMoments, tol: f64) -> Result<RCertificate> {
    let a = gamma * (1.0 - rho);
    let (n, error_bound) = truncation_level(m, a, tol)?;
    let (est, quadrature_error) = estimate(m, a, n)?;
    Ok(RCertificate {
        alpha,
        gamma,
        rho,
        a,
        estimate: est,
        r: est.norm(),
        phase: est.arg(),
        n,
        error_bound,
        quadrature_error,
    })
}

fn moments_for(alpha: f64, gamma: f64, a: Complex64, tol: f64) -> Result<SMoments> {
    let (at_a, ea) = moment_with_tol(alpha, gamma, a, tol)?;
    let (at_re_a, er) = moment_with_tol(alpha, gamma, Complex64::new(a.re, 0.0), tol)?;
    let (first, e1) = moment_with_tol(alpha, gamma, Complex64::new(1.0, 0.0), tol)?;
    Ok(SMoments {
        at_a,
        at_re_a: at_re_a.re + er,
        first: first.re,
        error: ea.max(e1),
    })
}

/// Certified `R e^{i theta}` for weights `(alpha, alpha)` at the root `rho`
/// of `psi = 1`. `rho` is polished first and must lie within `1e-3` of a root.
#[allow(non_snake_case)]
pub fn compute_R(alpha: f64, gamma: f64, rho: Complex64, target_tol: f64) -> Result<RCertificate> {
    check_gamma(gamma)?;
    if !(target_tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {target_tol}")));
    }
    let spec = WeightSpec::symmetric(alpha, 2, gamma)?;
    let polished = damped_newton(&spec, rho)
        .filter(|z| (z - rho).norm() <= 1e-3 * rho.norm().max(1.0))
        .ok_or_else(|| Error::Precondition(format!("{rho} is not a root of psi = 1 for alpha = {alpha}")))?;
    let a = gamma * (1.0 - polished);
    if !(a.re > 0.0 && a.re < 1.0) {
        return Err(Error::Precondition(format!("Re a must lie in (0, 1), got a = {a}")));
    }
    let mut tol = MOMENT_TOL;
    loop {
        let m = moments_for(alpha, gamma, a, tol)?;
        let cert = certify(alpha, gamma, polished, &m, target_tol)?;
        if cert.quadrature_error <= 0.1 * cert.error_bound || tol < 1e-15 {
            return Ok(cert);
        }
        tol *= 0.01;
    }
}

/// [`compute_R`] at the leading root with positive imaginary part.
#[allow(non_snake_case)]
pub fn compute_R_leading(alpha: f64, gamma: f64, target_tol: f64) -> Result<RCertificate> {
    let spectrum = spectral_roots(&WeightSpec::symmetric(alpha, 2, gamma)?)?;
    let rho = spectrum
        .leading_root()
        .ok_or_else(|| Error::Precondition(format!("alpha = {alpha} has no root besides theta = 1")))?;
    compute_R(alpha, gamma, Complex64::new(rho.re, rho.im.abs()), target_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn moments_of_s_tilde() {
        assert_eq!(s_tilde_moment(3.0, 0.5, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let m = s_tilde_moment(1.0, 0.5, c(1.0, 0.0)).unwrap();
        assert!((m.re - 1.0 / (3.0 * PI)).abs() < 1e-13 && m.im.abs() < 1e-15);
        // E 2T(1-T) / pi = alpha / ((2 alpha + 1) pi)
        let m = s_tilde_moment(60.0, 0.5, c(1.0, 0.0)).unwrap();
        assert!((m.re - 0.157_839_612_983_697_85).abs() < 1e-12);
    }

    #[test]
    fn series_term_matches_extended_precision() {
        // mpmath, 40 digits.
        assert!((series_term(1, c(0.5, 0.0)) - c(0.242_640_687_119_285_15, 0.0)).norm() < 1e-15);
        // The direct and series branches agree where both are accurate.
        let a = c(0.25, -4.55);
        let one = c(1.0, 0.0);
        for n in [8u64, 9, 20] {
            let x = 1.0 / n as f64;
            let direct = ((one - a) * (n as f64).ln()).exp() / (a * (one - a)) * ((-a * x.ln_1p()).exp() * (one + a * x) - one);
            assert!((series_term(n, a) - direct).norm() < 1e-12 * direct.norm(), "n = {n}");
        }
    }

    #[test]
    fn series_term_tail_inequality() {
        let a = c(0.25, -4.55);
        for n in [4u64, 10, 1000, 1_000_000] {
            let lead = 0.5 * (-(a + 1.0) * (n as f64).ln()).exp();
            let dev = (series_term(n, a) - lead).norm();
            assert!(dev <= (n as f64).powf(-2.0 - a.re) * f_bound(a), "n = {n}");
        }
    }

    #[test]
    fn f_bound_values() {
        let expected = 4.0 * (0.375 / 2.0 + 2f64.powf(4.5) * 1.5);
        assert!((f_bound(c(0.5, 0.0)) - expected).abs() < 1e-12);
        assert!((expected - 136.51).abs() < 0.01);
        let a = c(0.3, 2.0);
        assert_eq!(f_bound(a), f_bound(a.conj()));
        // Monotone in |Im a| once the exponential factor dominates (|Im a| >~ 2.1
        // at Re a = 0.3); the denominator makes f decrease before that.
        assert!(f_bound(c(0.3, 0.1)) > f_bound(c(0.3, 2.1)));
        let mut prev = 0.0;
        for k in 0..20 {
            let v = f_bound(c(0.3, 0.5 * k as f64 + 2.5));
            assert!(v > prev);
            prev = v;
        }
    }

    fn constant_moments(s: f64, a: Complex64) -> SMoments {
        SMoments {
            at_a: (a * s.ln()).exp(),
            at_re_a: s.powf(a.re),
            first: s,
            error: 0.0,
        }
    }

    /// `int_0^inf e^{-a t} (s e^t - floor(s e^t)) dt`, `s <= 1`, by
    /// quadrature over unit panels in `x = s e^t` plus the Euler-Maclaurin
    /// tail `X^{-a} / (2a) - X^{-a-1} / 12`.
    fn sawtooth_integral(s: f64, a: f64) -> f64 {
        use crate::numerics::quad::integrate;
        let top = 4000usize;
        let mut total = integrate(|x| c(x.powf(-a - 1.0) * x, 0.0), s, 1.0, 1e-14).unwrap().value.re;
        for k in 1..top {
            let kf = k as f64;
            total += integrate(|x| c(x.powf(-a - 1.0) * (x - kf), 0.0), kf, kf + 1.0, 1e-15)
                .unwrap()
                .value
                .re;
        }
        let x = top as f64;
        total += x.powf(-a) / (2.0 * a) - x.powf(-a - 1.0) / 12.0;
        s.powf(a) * total
    }

    #[test]
    fn certificate_brackets_degenerate_sawtooth() {
        for (s, a) in [(1.0, 0.25), (0.3, 0.4), (0.05, 0.1)] {
            let m = constant_moments(s, c(a, 0.0));
            let cert = certify(0.0, 0.5, c(1.0 - 2.0 * a, 0.0), &m, 1e-4).unwrap();
            let direct = sawtooth_integral(s, a);
            // Closed form: s^a (-zeta(a) / a) - s / (1 - a).
            let zeta = complex_zeta(c(a, 0.0)).unwrap().re;
            let closed = s.powf(a) * (-zeta / a) - s / (1.0 - a);
            assert!((direct - closed).abs() < 1e-7, "{direct} vs {closed}");
            let tail_err = 4000f64.powf(-a - 2.0);
            assert!(
                (cert.estimate.re - direct).abs() <= cert.error_bound + cert.quadrature_error + tail_err,
                "s = {s}, a = {a}: {} vs {direct}",
                cert.estimate.re
            );
            assert!(cert.estimate.im.abs() < 1e-12);
        }
        // Unit constant: the full-line integral is -zeta(a)/a.
        let a = 0.25;
        let m = constant_moments(1.0, c(a, 0.0));
        let cert = certify(0.0, 0.5, c(0.5, 0.0), &m, 1e-6).unwrap();
        let full = cert.estimate.re + 1.0 / (1.0 - a);
        assert!((full - 3.253_113_621_047_566_6).abs() <= cert.error_bound);
    }

    #[test]
    fn zero_integrand_gives_zero() {
        let m = SMoments {
            at_a: c(0.0, 0.0),
            at_re_a: 0.0,
            first: 0.0,
            error: 0.0,
        };
        let cert = certify(1.0, 0.5, c(0.5, 9.0), &m, 1e-6).unwrap();
        assert_eq!(cert.r, 0.0);
        assert_eq!(cert.estimate, c(0.0, 0.0));
    }

    #[test]
    fn doubling_n_stays_within_bound() {
        let a = c(0.248, -4.55);
        let m = constant_moments(0.15, a);
        let (n, bound) = truncation_level(&m, a, 1e-3).unwrap();
        let (e1, _) = estimate(&m, a, n).unwrap();
        let (e2, _) = estimate(&m, a, 2 * n).unwrap();
        assert!((e1 - e2).norm() <= bound);
    }

    #[test]
    fn amplitude_at_sixty_and_conjugation() {
        // Oracle: mpmath with the Hurwitz-zeta tail of sum a_n, 40 digits.
        let rho = c(0.503_788, 9.1027);
        let cert = compute_R(60.0, 0.5, rho, 1e-6).unwrap();
        assert!((cert.r - 0.097_030_833_269_744_1).abs() <= cert.error_bound + cert.quadrature_error + 1e-9);
        assert!((cert.rho - c(0.503_788_196_476_888, 9.102_700_400_015_23)).norm() < 1e-9);
        assert!((cert.phase - 0.547_348_757_439_63).abs() < 1e-5);
        assert!(cert.error_bound <= 1e-6 && cert.n >= 3);
        let conj = compute_R(60.0, 0.5, rho.conj(), 1e-6).unwrap();
        assert!((conj.estimate - cert.estimate.conj()).norm() < 1e-12);
        assert_eq!(conj.r, cert.r);
        assert!((conj.phase + cert.phase).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_roots_and_bad_inputs() {
        assert!(matches!(compute_R(60.0, 0.5, c(0.3, 5.0), 1e-4), Err(Error::Precondition(_))));
        assert!(compute_R(60.0, 1.5, c(0.5, 9.1), 1e-4).is_err());
        assert!(compute_R(60.0, 0.5, c(0.503_788, 9.1027), 0.0).is_err());
    }

    #[test]
    fn json_field_names() {
        let cert = compute_R(60.0, 0.5, c(0.503_788, 9.1027), 1e-4).unwrap();
        let v: serde_json::Value = serde_json::to_value(&cert).unwrap();
        for key in ["alpha", "gamma", "rho", "a", "estimate", "R", "phase", "N", "error_bound", "quadrature_error"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["rho"].as_array().unwrap().len(), 2);
    }
}
