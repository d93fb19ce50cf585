//! Cleared-denominator form of `psi(theta) = 1` for weights with integral
//! gaps `alpha0 - alpha_i`.
//!
//! With `P_i(theta) = prod_{k < d_i} (theta + alpha_i + k)` and
//! `c_i = P_i(0)`, `psi = sum_i c_i / P_i`. Multiplying `psi - 1 = 0` by the
//! least common multiple `L` of the `P_i` gives
//! `Q = L - sum_i c_i L / P_i`, whose roots contain every solution.

use super::psi::as_integer;
use crate::error::{Error, Result};
use crate::gbp::WeightSpec;
use crate::numerics::poly::{aberth, circle_guesses, AberthOptions, NewtonStep, Polynomial};
use num_complex::Complex64;

const SHIFT_TOL: f64 = 1e-9;
// Products are renormalised by this factor to stay in range.
const CHUNK: f64 = 1e100;

#[derive(Clone, Debug)]
struct Term {
    ln_c: f64,
    /// Indices into `shifts` of the factors of `L / P_i`.
    missing: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CharacteristicPolynomial {
    /// Distinct `beta` with `L(theta) = prod (theta + beta)`.
    shifts: Vec<f64>,
    terms: Vec<Term>,
}

/// Product of `(theta + beta) / scale` over `idx`, as mantissa and a power
/// of [`CHUNK`].
fn scaled_product(theta: Complex64, shifts: &[f64], idx: impl Iterator<Item = usize>, scale: f64) -> (Complex64, i32) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut e = 0;
    for j in idx {
        p *= (theta + shifts[j]) / scale;
        let m = p.norm();
        if m > CHUNK {
            p /= CHUNK;
            e += 1;
        } else if m < 1.0 / CHUNK && m > 0.0 {
            p *= CHUNK;
            e -= 1;
        }
    }
    (p, e)
}

impl CharacteristicPolynomial {
    /// Fails with [`Error::NotApplicable`] unless every `alpha0 - alpha_i` is
    /// an integer.
    pub fn new(spec: &WeightSpec) -> Result<Self> {
        let a0 = spec.alpha0();
        let mut shifts: Vec<f64> = Vec::new();
        let mut factor_sets = Vec::with_capacity(spec.n());
        let mut ln_cs = Vec::with_capacity(spec.n());
        for &a in spec.alphas() {
            let d = as_integer(a0 - a).ok_or_else(|| {
                Error::NotApplicable(format!(
                    "alpha0 - alpha_i = {} is not an integer",
                    a0 - a
                ))
            })?;
            let mut set = Vec::with_capacity(d);
            let mut ln_c = 0.0;
            for k in 0..d {
                let beta = a + k as f64;
                ln_c += beta.ln();
                let idx = match shifts
                    .iter()
                    .position(|&b| (b - beta).abs() <= SHIFT_TOL * beta.max(1.0))
                {
                    Some(i) => i,
                    None => {
                        shifts.push(beta);
                        shifts.len() - 1
                    }
                };
                set.push(idx);
            }
            factor_sets.push(set);
            ln_cs.push(ln_c);
        }
        let terms = factor_sets
            .into_iter()
            .zip(ln_cs)
            .map(|(set, ln_c)| Term {
                ln_c,
                missing: (0..shifts.len()).filter(|j| !set.contains(j)).collect(),
            })
            .collect();
        Ok(Self { shifts, terms })
    }

    pub fn degree(&self) -> usize {
        self.shifts.len()
    }

    /// The distinct zeros `-beta` of the denominator product, as `beta`.
    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    /// Mean of the shifts; the roots cluster on a closed curve through
    /// `theta = 1` around `-mean`.
    fn center(&self) -> f64 {
        -self.shifts.iter().sum::<f64>() / self.shifts.len() as f64
    }

    /// `Q(theta) / scale^D` and its derivative, computed from the factored
    /// form without expanding coefficients, plus a rounding-error level.
    fn eval_scaled(&self, theta: Complex64, scale: f64) -> (Complex64, Complex64, f64) {
        let all = 0..self.shifts.len();
        let inv: Vec<Complex64> = self.shifts.iter().map(|&b| (theta + b).inv() * scale).collect();
        let (pa, ea) = scaled_product(theta, &self.shifts, all, scale);
        let mut parts = Vec::with_capacity(self.terms.len() + 1);
        parts.push((pa, ea, inv.iter().sum::<Complex64>(), 1.0));
        for t in &self.terms {
            let (p, e) = scaled_product(theta, &self.shifts, t.missing.iter().copied(), scale);
            let d = (self.shifts.len() - t.missing.len()) as f64;
            let coeff = (t.ln_c - d * scale.ln()).exp();
            let dl: Complex64 = t.missing.iter().map(|&j| inv[j]).sum();
            parts.push((p * coeff, e, dl, -1.0));
        }
        let top = parts.iter().filter(|p| p.0.norm() > 0.0).map(|p| p.1).max().unwrap_or(0);
        let mut q = Complex64::new(0.0, 0.0);
        let mut dq = Complex64::new(0.0, 0.0);
        let mut level = 0.0;
        for (p, e, dl, sign) in parts {
            let v = p * CHUNK.powi(e - top);
            q += v * sign;
            dq += v * dl * sign;
            level += v.norm();
        }
        let bound = 4.0 * f64::EPSILON * (self.degree() as f64 + 1.0) * level;
        (q, dq / scale, bound)
    }

    /// `Q(theta)` up to the positive factor `scale^-D`.
    pub fn eval(&self, theta: Complex64) -> Complex64 {
        self.eval_scaled(theta, 1.0).0
    }

    fn natural_scale(&self) -> f64 {
        (1.0 - self.center()).abs().max(1.0)
    }

    /// All `D` roots of `Q` by Aberth iteration on the factored form.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let c = self.center();
        let scale = self.natural_scale();
        let step = |z: Complex64| {
            let (q, dq, bound) = self.eval_scaled(z, scale);
            NewtonStep {
                ratio: q / dq,
                negligible: q.norm() <= bound,
            }
        };
        let guesses = circle_guesses(Complex64::new(c, 0.0), (1.0 - c).abs(), self.degree());
        aberth(step, guesses, AberthOptions::default())
    }

    /// Expanded coefficients of `Q(center + scale z) / scale^D` in `z`.
    pub fn shifted_scaled(&self, center: f64, scale: f64) -> Result<Polynomial> {
        let z_factor = |b: f64| [Complex64::new((center + b) / scale, 0.0), Complex64::new(1.0, 0.0)];
        let expand = |idx: &mut dyn Iterator<Item = usize>| {
            let mut acc = vec![Complex64::new(1.0, 0.0)];
            for j in idx {
                let f = z_factor(self.shifts[j]);
                let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
                for (k, &a) in acc.iter().enumerate() {
                    next[k] += a * f[0];
                    next[k + 1] += a * f[1];
                }
                acc = next;
            }
            acc
        };
        let mut coeffs = expand(&mut (0..self.shifts.len()));
        for t in &self.terms {
            let d = (self.shifts.len() - t.missing.len()) as f64;
            let c = (t.ln_c - d * scale.ln()).exp();
            for (k, a) in expand(&mut t.missing.iter().copied()).into_iter().enumerate() {
                coeffs[k] -= a * c;
            }
        }
        Polynomial::new(coeffs)
    }

    /// Expanded coefficients in `theta` itself; fails when they overflow.
    pub fn to_polynomial(&self) -> Result<Polynomial> {
        self.shifted_scaled(0.0, 1.0)
    }

    /// Coefficients of `Q` in `theta` as `(ln |a_k|, sign a_k)`, ascending;
    /// zero coefficients are reported as `(-inf, 0)`.
    pub fn log_coefficients(&self) -> Result<Vec<(f64, f64)>> {
        let s = self.natural_scale();
        let p = self.shifted_scaled(0.0, s)?;
        let d = self.degree();
        let mut out = vec![(f64::NEG_INFINITY, 0.0); d + 1];
        for (k, c) in p.coeffs().iter().enumerate() {
            if c.re != 0.0 {
                out[k] = (c.re.abs().ln() + (d - k) as f64 * s.ln(), c.re.signum());
            }
        }
        Ok(out)
    }

    /// Roots via eigenvalues of the companion matrix of the centred and
    /// scaled polynomial; an independent check on [`Self::roots`].
    pub fn companion_roots(&self) -> Result<Vec<Complex64>> {
        let c = self.center();
        let s = self.natural_scale();
        let p = self.shifted_scaled(c, s)?;
        let roots = crate::numerics::companion_roots(&p)?;
        Ok(crate::numerics::poly::flatten(&roots)
            .into_iter()
            .map(|z| c + z * s)
            .collect())
    }
}
