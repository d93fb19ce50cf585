//! Complex polynomials and their roots.
//!
//! Two independent root finders are provided: simultaneous Aberth-Ehrlich
//! iteration ([`poly_roots`], with a generic entry point [`aberth`] for
//! polynomials that are cheaper or better conditioned to evaluate in a
//! structured form) and eigenvalues of the companion matrix
//! ([`companion_roots`]).

use crate::error::{Error, Result};
use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Polynomial with complex coefficients in ascending degree order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

/// A root together with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

impl Polynomial {
    /// Trailing zero coefficients are dropped; the zero polynomial and
    /// non-finite coefficients are rejected.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Domain("non-finite polynomial coefficient".into()));
        }
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::Domain("zero polynomial".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            coeffs = multiply_linear(&coeffs, -r);
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.degree()]
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn monic(&self) -> Self {
        let lead = self.leading();
        Self {
            coeffs: self.coeffs.iter().map(|c| c / lead).collect(),
        }
    }

    /// The polynomial `z -> p(center + scale * z)`.
    pub fn shifted_scaled(&self, center: Complex64, scale: f64) -> Self {
        // Taylor shift by repeated synthetic division.
        let n = self.degree();
        let mut c = self.coeffs.clone();
        for k in 0..n {
            for j in (k..n).rev() {
                let hi = c[j + 1];
                c[j] += center * hi;
            }
        }
        let mut s = 1.0;
        for ck in c.iter_mut() {
            *ck *= s;
            s *= scale;
        }
        Self { coeffs: c }
    }
}

fn multiply_linear(coeffs: &[Complex64], root_neg: Complex64) -> Vec<Complex64> {
    // (sum c_k z^k) * (z + root_neg)
    let mut out = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
    for (k, &c) in coeffs.iter().enumerate() {
        out[k] += c * root_neg;
        out[k + 1] += c;
    }
    out
}

/// Newton correction `p(z)/p'(z)` at a point, plus whether `|p(z)|` is
/// already below the rounding-error level of the evaluation.
#[derive(Clone, Copy, Debug)]
pub struct NewtonStep {
    pub ratio: Complex64,
    pub negligible: bool,
}

/// Iteration controls for [`aberth`].
#[derive(Clone, Copy, Debug)]
pub struct AberthOptions {
    pub max_iterations: usize,
    /// Relative step size below which a root is frozen.
    pub tolerance: f64,
}

impl Default for AberthOptions {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            tolerance: 4.0 * f64::EPSILON,
        }
    }
}

/// Simultaneous Aberth-Ehrlich iteration from the given starting points.
///
/// `step` evaluates the Newton correction of the target polynomial; the
/// iteration never looks at coefficients, so callers can evaluate in
/// whatever form is best conditioned.
pub fn aberth<F>(step: F, initial: Vec<Complex64>, opts: AberthOptions) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> NewtonStep,
{
    let n = initial.len();
    let mut z = initial;
    let mut done = vec![false; n];
    let mut remaining = n;
    for _ in 0..opts.max_iterations {
        if remaining == 0 {
            return Ok(z);
        }
        for i in 0..n {
            if done[i] {
                continue;
            }
            let NewtonStep { ratio, negligible } = step(z[i]);
            if negligible || !(ratio.re.is_finite() && ratio.im.is_finite()) {
                done[i] = true;
                remaining -= 1;
                continue;
            }
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    repulsion += (z[i] - zj).inv();
                }
            }
            let correction = ratio / (1.0 - ratio * repulsion);
            if !(correction.re.is_finite() && correction.im.is_finite()) {
                done[i] = true;
                remaining -= 1;
                continue;
            }
            z[i] -= correction;
            if correction.norm() <= opts.tolerance * z[i].norm().max(f64::MIN_POSITIVE) {
                done[i] = true;
                remaining -= 1;
            }
        }
    }
    if remaining == 0 {
        Ok(z)
    } else {
        Err(Error::NonConvergence {
            what: format!("Aberth iteration ({remaining} of {n} roots unsettled)"),
            iterations: opts.max_iterations,
        })
    }
}

/// Starting points on a circle, offset so that none lies on the real axis.
pub fn circle_guesses(center: Complex64, radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / count as f64 + 0.4;
            center + Complex64::from_polar(radius, angle)
        })
        .collect()
}

/// Balances a polynomial: monic, centred on the root centroid and scaled so
/// that the roots have modulus of order one.
fn balance(p: &Polynomial) -> (Polynomial, Complex64, f64) {
    let monic = p.monic();
    let n = monic.degree();
    let center = -monic.coeffs[n - 1] / n as f64;
    let shifted = monic.shifted_scaled(center, 1.0);
    // Fujiwara-style radius: max |c_k|^{1/(n-k)}.
    let mut radius: f64 = 0.0;
    for (k, c) in shifted.coeffs[..n].iter().enumerate() {
        let m = c.norm();
        if m > 0.0 {
            radius = radius.max(m.powf(1.0 / (n - k) as f64));
        }
    }
    if !(radius > 0.0) || !radius.is_finite() {
        radius = 1.0;
    }
    let scaled = shifted.shifted_scaled(Complex64::new(0.0, 0.0), radius);
    (scaled.monic(), center, radius)
}

fn horner_step(p: &Polynomial) -> impl Fn(Complex64) -> NewtonStep + '_ {
    move |z| {
        let (v, dv) = p.eval_with_derivative(z);
        // Running rounding-error bound for Horner evaluation.
        let az = z.norm();
        let bound = p
            .coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * az + c.norm())
            * 4.0
            * f64::EPSILON
            * (p.degree() as f64 + 1.0);
        NewtonStep {
            ratio: v / dv,
            negligible: v.norm() <= bound,
        }
    }
}

/// Groups roots closer than `tol` (relative to their modulus) and reports
/// the cluster mean with its size as multiplicity.
pub fn cluster_roots(mut roots: Vec<Complex64>, tol: f64) -> Vec<Root> {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![roots[i]];
        for j in i + 1..roots.len() {
            if !used[j] && (roots[j] - roots[i]).norm() <= tol * roots[i].norm().max(1.0) {
                used[j] = true;
                members.push(roots[j]);
            }
        }
        let mean = members.iter().sum::<Complex64>() / members.len() as f64;
        out.push(Root {
            value: mean,
            multiplicity: members.len(),
        });
    }
    out
}

const CLUSTER_TOL: f64 = 1e-6;

/// All roots of `p` by Aberth-Ehrlich iteration on the balanced polynomial.
pub fn poly_roots(p: &Polynomial) -> Result<Vec<Root>> {
    if p.degree() == 0 {
        return Err(Error::Domain("poly_roots requires degree >= 1".into()));
    }
    if p.degree() == 1 {
        let c = p.coeffs();
        return Ok(vec![Root {
            value: -c[0] / c[1],
            multiplicity: 1,
        }]);
    }
    let (q, center, scale) = balance(p);
    let guesses = circle_guesses(Complex64::new(0.0, 0.0), 1.0, q.degree());
    let z = aberth(horner_step(&q), guesses, AberthOptions::default())?;
    let roots = z
        .into_iter()
        .map(|w| polish(p, center + w * scale))
        .collect();
    Ok(cluster_roots(roots, CLUSTER_TOL))
}

/// A few Newton steps on the original polynomial, kept only while they
/// reduce the residual.
fn polish(p: &Polynomial, mut z: Complex64) -> Complex64 {
    let mut best = p.eval(z).norm();
    for _ in 0..3 {
        let (v, dv) = p.eval_with_derivative(z);
        if dv.norm() == 0.0 {
            break;
        }
        let cand = z - v / dv;
        let r = p.eval(cand).norm();
        if r < best {
            best = r;
            z = cand;
        } else {
            break;
        }
    }
    z
}

fn real_companion_eigenvalues(q: &Polynomial) -> Option<Vec<Complex64>> {
    let n = q.degree();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for k in 0..n {
        m[(k, n - 1)] = -q.coeffs[k].re;
    }
    let schur = Schur::try_new(m, f64::EPSILON, 10_000)?;
    Some(schur.complex_eigenvalues().iter().copied().collect())
}

fn complex_companion(q: &Polynomial) -> DMatrix<Complex64> {
    let n = q.degree();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for k in 0..n {
        m[(k, n - 1)] = -q.coeffs[k];
    }
    m
}

fn schur_eigenvalues(m: DMatrix<Complex64>) -> Option<Vec<Complex64>> {
    let schur = Schur::try_new(m, f64::EPSILON, 10_000)?;
    Some(schur.eigenvalues()?.iter().copied().collect())
}

/// Conjugates by a fixed Householder reflection, which destroys the
/// companion structure without moving eigenvalues.
fn reflected(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    let v = nalgebra::DVector::<Complex64>::from_fn(n, |i, _| {
        let x = (i as f64 + 1.0) * 0.618_033_988_749_895;
        Complex64::new((x * 7.0).sin(), (x * 3.0).cos())
    });
    let v = &v / Complex64::new(v.norm(), 0.0);
    let h = DMatrix::<Complex64>::identity(n, n) - &v * v.adjoint() * Complex64::new(2.0, 0.0);
    &h * m * &h
}

/// All roots of `p` as eigenvalues of the companion matrix of the balanced
/// polynomial.
///
/// Roots spread evenly on a circle about the centroid give a near-cyclic
/// companion matrix on which shifted QR can stall; the fallback applies a
/// unitary similarity first.
pub fn companion_roots(p: &Polynomial) -> Result<Vec<Root>> {
    if p.degree() == 0 {
        return Err(Error::Domain("companion_roots requires degree >= 1".into()));
    }
    let (q, center, scale) = balance(p);
    let mut eig = if p.is_real() && center.im == 0.0 {
        real_companion_eigenvalues(&q)
    } else {
        schur_eigenvalues(complex_companion(&q))
    };
    if eig.is_none() {
        eig = schur_eigenvalues(reflected(complex_companion(&q)));
    }
    let eig = eig.ok_or(Error::NonConvergence {
        what: "Schur decomposition of companion matrix".into(),
        iterations: 10_000,
    })?;
    let roots = eig.into_iter().map(|w| center + w * scale).collect();
    Ok(cluster_roots(roots, CLUSTER_TOL))
}

/// Expands roots by multiplicity.
pub fn flatten(roots: &[Root]) -> Vec<Complex64> {
    roots
        .iter()
        .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
        .collect()
}

/// Largest distance between two root multisets under the best pairing,
/// by greedy nearest matching (adequate for well-separated roots).
pub fn matching_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut free: Vec<Complex64> = b.to_vec();
    let mut worst: f64 = 0.0;
    for &x in a {
        let (idx, d) = free
            .iter()
            .enumerate()
            .map(|(i, &y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("equal lengths");
        worst = worst.max(d);
        free.swap_remove(idx);
    }
    worst
}
