//! Gamma-family special functions.
//!
//! `log_gamma` uses the 14-term Lanczos approximation with `g = 671/128`,
//! which is accurate to a few ulps over the whole positive axis. The
//! digamma and trigamma functions shift the argument upward with the
//! recurrence and finish with their asymptotic series.

use crate::error::{Error, Result};
use num_complex::Complex64;

const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_092;
const LANCZOS_COF: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

// Below this the asymptotic series loses accuracy; shift up first.
const ASYMPTOTIC_MIN: f64 = 10.0;

/// Natural log of the Gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    let tmp = x + LANCZOS_G;
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = LANCZOS_C0;
    let mut y = x;
    for c in LANCZOS_COF {
        y += 1.0;
        ser += c / y;
    }
    Ok(tmp + (SQRT_2PI * ser / x).ln())
}

/// Complex log-gamma, defined modulo `2*pi*i`.
///
/// Arguments with `Re z < 1/2` are moved into the right half-plane with
/// `Gamma(z) = Gamma(z + m) / (z (z+1) ... (z+m-1))`. Non-positive integers
/// are poles.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("ln_gamma of non-finite {z}")));
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.re < 0.5 {
        if w.im == 0.0 && w.re == w.re.round() {
            return Err(Error::Pole(format!("Gamma({z})")));
        }
        shift += w.ln();
        w += 1.0;
    }
    let tmp = w + LANCZOS_G;
    let tmp = (w + 0.5) * tmp.ln() - tmp;
    let mut ser = Complex64::new(LANCZOS_C0, 0.0);
    let mut y = w;
    for c in LANCZOS_COF {
        y += 1.0;
        ser += c / y;
    }
    Ok(tmp + (ser * SQRT_2PI / w).ln() - shift)
}

/// The digamma function `d/dx ln Gamma(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma requires x > 0, got {x}")));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < ASYMPTOTIC_MIN {
        acc -= 1.0 / x;
        x += 1.0;
    }
    Ok(acc + digamma_asymptotic(x))
}

fn digamma_asymptotic(x: f64) -> f64 {
    let r = 1.0 / (x * x);
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0
                    - r * (1.0 / 240.0
                        - r * (1.0 / 132.0 - r * (691.0 / 32760.0 - r / 12.0))))));
    x.ln() - 0.5 / x - series
}

/// The trigamma function `d^2/dx^2 ln Gamma(x)` for `x > 0`.
pub fn trigamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("trigamma requires x > 0, got {x}")));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < ASYMPTOTIC_MIN {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    let series = 1.0 / x
        + r / 2.0
        + r / x
            * (1.0 / 6.0
                - r * (1.0 / 30.0
                    - r * (1.0 / 42.0
                        - r * (1.0 / 30.0
                            - r * (5.0 / 66.0 - r * (691.0 / 2730.0 - r * 7.0 / 6.0))))));
    Ok(acc + series)
}

/// Complex digamma away from the poles at non-positive integers.
pub fn digamma_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("digamma of non-finite {z}")));
    }
    let mut w = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while w.norm() < ASYMPTOTIC_MIN || w.re < ASYMPTOTIC_MIN / 2.0 {
        if w.im == 0.0 && w.re <= 0.0 && w.re == w.re.round() {
            return Err(Error::Pole(format!("digamma({z})")));
        }
        acc -= w.inv();
        w += 1.0;
    }
    let r = (w * w).inv();
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0
                    - r * (1.0 / 240.0
                        - r * (1.0 / 132.0 - r * (691.0 / 32760.0 - r / 12.0))))));
    Ok(acc + w.ln() - w.inv() * 0.5 - series)
}
