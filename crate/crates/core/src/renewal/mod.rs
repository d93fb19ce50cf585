//! Renewal-theoretic analysis of the birth-time measure
//! `nu_gamma(ds) = E sum_i e^{-gamma s} delta_{sigma_i}(ds)`.
//!
//! Roots are reported in the `theta` coordinate (`psi(theta) = 1`) and as
//! poles `w = gamma (1 - theta)` of `g(w) = 1 / (1 - f(w))`.

pub mod charpoly;
pub mod direct;
pub mod grid;
pub mod psi;

pub use charpoly::CharacteristicPolynomial;
pub use direct::{direct_search, SearchRegion};
pub use grid::{phase_grid, PhaseCell, PhaseGrid};
pub use psi::{f_derivative, f_transform, is_integral, moments, psi, psi_derivative, psi_real, psi_with_derivative, Moments};

use crate::error::{Error, Result};
use crate::gbp::WeightSpec;
use crate::numerics::poly::{cluster_roots, Root};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Half-width of the band around `eta = 1/2` reported as a boundary case.
pub const REGIME_TOL: f64 = 1e-9;
/// Roots with `|psi - 1|` above this are rejected.
pub const ROOT_CHECK_TOL: f64 = 1e-6;
/// Distance to a denominator zero below which a root is treated as spurious.
pub const POLE_TOL: f64 = 1e-8;
/// `|f'(w)|` below which a root is treated as repeated.
pub const SIMPLE_ROOT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "CLT")]
    Clt,
    #[serde(rename = "NoCLT")]
    NoClt,
    Boundary,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Clt => "CLT",
            Regime::NoClt => "NoCLT",
            Regime::Boundary => "Boundary",
        })
    }
}

/// Regime from `eta`; `None` (no roots besides 1) is a CLT.
pub fn regime_of(eta: Option<f64>) -> Regime {
    match eta {
        None => Regime::Clt,
        Some(e) if e < 0.5 - REGIME_TOL => Regime::Clt,
        Some(e) if e > 0.5 + REGIME_TOL => Regime::NoClt,
        Some(_) => Regime::Boundary,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootMethod {
    /// Aberth iteration on the cleared-denominator polynomial.
    CharacteristicPolynomial,
    /// Argument-principle scan plus Newton on `psi - 1`.
    DirectSearch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenewalSpectrum {
    pub alphas: Vec<f64>,
    pub gamma: f64,
    /// Roots of `psi(theta) = 1` other than `theta = 1`, by decreasing real
    /// part.
    pub theta_roots: Vec<Root>,
    /// `gamma (1 - theta)` for each theta root.
    pub w_roots: Vec<Complex64>,
    /// Residues of `g` at the `w_roots`; absent when some root is not simple.
    pub residues: Option<Vec<Complex64>>,
    /// Largest real part among the theta roots; `None` stands for `-inf`.
    pub eta: Option<f64>,
    pub mu1: f64,
    pub mu2: f64,
    pub regime: Regime,
    pub method: RootMethod,
    /// Roots of the cleared polynomial rejected as denominator artefacts.
    pub spurious_roots: Vec<Complex64>,
    pub warnings: Vec<String>,
}

impl RenewalSpectrum {
    /// The root attaining `eta` with non-negative imaginary part.
    pub fn leading_root(&self) -> Option<Complex64> {
        let eta = self.eta?;
        self.theta_roots
            .iter()
            .map(|r| r.value)
            .filter(|z| (z.re - eta).abs() <= 1e-9 * eta.abs().max(1.0))
            .max_by(|a, b| a.im.total_cmp(&b.im))
    }

    pub fn spec(&self) -> Result<WeightSpec> {
        WeightSpec::new(self.alphas.clone(), self.gamma)
    }
}

/// Spectrum via the characteristic polynomial when the gaps are integral
/// and via direct search otherwise.
pub fn spectral_roots(spec: &WeightSpec) -> Result<RenewalSpectrum> {
    let method = if is_integral(spec) {
        RootMethod::CharacteristicPolynomial
    } else {
        RootMethod::DirectSearch
    };
    spectral_roots_with(spec, method)
}

fn polish(spec: &WeightSpec, z: Complex64) -> Complex64 {
    let Ok((mut v, mut dv)) = psi_with_derivative(spec, z) else {
        return z;
    };
    let mut z = z;
    for _ in 0..4 {
        let cand = z - (v - 1.0) / dv;
        match psi_with_derivative(spec, cand) {
            Ok((cv, cdv)) if (cv - 1.0).norm() < (v - 1.0).norm() => {
                z = cand;
                v = cv;
                dv = cdv;
            }
            _ => break,
        }
    }
    z
}

/// Replaces each numerically conjugate pair by an exact one; `psi` has real
/// coefficients so the true root set is conjugation-closed.
fn symmetrize(roots: &mut [Root]) {
    let n = roots.len();
    let mut paired = vec![false; n];
    for i in 0..n {
        if paired[i] || roots[i].value.im <= 0.0 {
            continue;
        }
        let target = roots[i].value.conj();
        let partner = (0..n)
            .filter(|&j| j != i && !paired[j] && roots[j].value.im < 0.0)
            .min_by(|&a, &b| (roots[a].value - target).norm().total_cmp(&(roots[b].value - target).norm()));
        if let Some(j) = partner {
            if (roots[j].value - target).norm() <= 1e-6 * target.norm().max(1.0) {
                let mean = 0.5 * (roots[i].value + roots[j].value.conj());
                roots[i].value = mean;
                roots[j].value = mean.conj();
                paired[i] = true;
                paired[j] = true;
            }
        }
    }
}

pub fn spectral_roots_with(spec: &WeightSpec, method: RootMethod) -> Result<RenewalSpectrum> {
    let mut spurious = Vec::new();
    let mut warnings = Vec::new();
    let candidates: Vec<Complex64> = match method {
        RootMethod::CharacteristicPolynomial => {
            let q = CharacteristicPolynomial::new(spec)?;
            let mut kept = Vec::new();
            for z in q.roots()? {
                let near_pole = q
                    .shifts()
                    .iter()
                    .any(|&b| (z + b).norm() <= POLE_TOL * b.max(1.0));
                if near_pole {
                    spurious.push(z);
                    continue;
                }
                let z = polish(spec, z);
                match psi(spec, z) {
                    Ok(v) if (v - 1.0).norm() <= ROOT_CHECK_TOL => kept.push(z),
                    _ => spurious.push(z),
                }
            }
            kept
        }
        RootMethod::DirectSearch => {
            let region = SearchRegion::default_for(spec);
            warnings.push(format!(
                "direct search restricted to Re theta in [{:.3}, {:.3}], |Im theta| <= {}",
                region.re_min, region.re_max, region.im_max
            ));
            direct_search(spec, region)?
                .into_iter()
                .flat_map(|(z, m)| std::iter::repeat_n(z, m))
                .collect()
        }
    };
    let mut roots: Vec<Root> = cluster_roots(candidates, 1e-6)
        .into_iter()
        .filter(|r| (r.value - 1.0).norm() > 1e-8)
        .map(|mut r| {
            // Snap numerically real roots onto the axis.
            if r.value.im.abs() <= 1e-12 * r.value.norm().max(1.0) {
                r.value.im = 0.0;
            }
            r
        })
        .collect();
    symmetrize(&mut roots);
    roots.sort_by(|a, b| b.value.re.total_cmp(&a.value.re).then(b.value.im.total_cmp(&a.value.im)));
    let gamma = spec.gamma();
    let w_roots: Vec<Complex64> = roots.iter().map(|r| gamma * (1.0 - r.value)).collect();
    let mut residues = Vec::with_capacity(roots.len());
    let mut simple = true;
    for (r, w) in roots.iter().zip(&w_roots) {
        let fp = f_derivative(spec, *w)?;
        if r.multiplicity > 1 || fp.norm() < SIMPLE_ROOT_TOL {
            simple = false;
            warnings.push(format!("repeated root at theta = {}; residues omitted", r.value));
            break;
        }
        residues.push(-1.0 / fp);
    }
    let eta = roots.iter().map(|r| r.value.re).fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
    let Moments { mu1, mu2 } = moments(spec)?;
    Ok(RenewalSpectrum {
        alphas: spec.alphas().to_vec(),
        gamma,
        theta_roots: roots,
        w_roots,
        residues: simple.then_some(residues),
        eta,
        mu1,
        mu2,
        regime: regime_of(eta),
        method,
        spurious_roots: spurious,
        warnings,
    })
}

pub fn classify_regime(spec: &WeightSpec) -> Result<Regime> {
    Ok(spectral_roots(spec)?.regime)
}

/// Prediction for `H(t) - t / mu1` at `t >= 0`:
/// `mu2 / (2 mu1^2) + Re sum_j (c_j / rho_j) e^{-rho_j t}`.
pub fn renewal_tail(spectrum: &RenewalSpectrum, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("renewal_tail needs t >= 0, got {t}")));
    }
    let residues = spectrum
        .residues
        .as_ref()
        .ok_or_else(|| Error::Multiplicity("residues unavailable for repeated roots".into()))?;
    let mut acc = spectrum.mu2 / (2.0 * spectrum.mu1 * spectrum.mu1);
    for (c, rho) in residues.iter().zip(&spectrum.w_roots) {
        if rho.re > 0.0 {
            acc += (c / rho * (-rho * t).exp()).re;
        }
    }
    Ok(acc)
}

/// Residue of `g(w) = 1 / (1 - f(w))` at `center` by the trapezoidal rule
/// on a circle of the given radius.
pub fn contour_residue(spec: &WeightSpec, center: Complex64, radius: f64, points: usize) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..points {
        let e = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / points as f64);
        let w = center + radius * e;
        let g = (1.0 - f_transform(spec, w)?).inv();
        acc += g * e;
    }
    Ok(acc * radius / points as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(alphas: &[f64]) -> WeightSpec {
        WeightSpec::new(alphas.to_vec(), 0.5).unwrap()
    }

    #[test]
    fn uniform_has_no_roots() {
        let s = spectral_roots(&spec(&[1.0, 1.0])).unwrap();
        assert!(s.theta_roots.is_empty());
        assert_eq!(s.eta, None);
        assert_eq!(s.regime, Regime::Clt);
        assert!((renewal_tail(&s, 3.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spurious_root_is_filtered() {
        let s = spectral_roots(&spec(&[2.0, 1.0])).unwrap();
        assert!(s.theta_roots.is_empty(), "{:?}", s.theta_roots);
        assert_eq!(s.spurious_roots.len(), 1);
        assert!((s.spurious_roots[0] + 2.0).norm() < 1e-8);
    }

    #[test]
    fn two_two_closed_form() {
        let s = spectral_roots(&spec(&[2.0, 2.0])).unwrap();
        assert_eq!(s.theta_roots.len(), 1);
        assert!((s.theta_roots[0].value + 6.0).norm() < 1e-12);
        assert!((s.w_roots[0] - 3.5).norm() < 1e-12);
        let c = s.residues.as_ref().unwrap()[0];
        assert!((c - 6.0 / 7.0).norm() < 1e-12);
        assert!((renewal_tail(&s, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let limit = s.mu2 / (2.0 * s.mu1 * s.mu1);
        assert!((renewal_tail(&s, 50.0).unwrap() - limit).abs() < 1e-12);
    }

    #[test]
    fn regime_thresholds() {
        assert_eq!(regime_of(Some(0.5)), Regime::Boundary);
        assert_eq!(regime_of(Some(0.5 + 2e-9)), Regime::NoClt);
        assert_eq!(regime_of(Some(0.5 - 2e-9)), Regime::Clt);
    }

    #[test]
    fn residue_at_origin() {
        for alphas in [&[2.0, 2.0][..], &[0.7, 1.9, 3.3]] {
            let s = spec(alphas);
            let m = moments(&s).unwrap();
            let r = contour_residue(&s, Complex64::new(0.0, 0.0), 0.05, 128).unwrap();
            assert!((r + 1.0 / m.mu1).norm() < 1e-6, "{alphas:?}: {r}");
        }
    }

    #[test]
    fn residues_are_conjugate_symmetric() {
        let s = spectral_roots(&spec(&[12.0, 12.0])).unwrap();
        let res = s.residues.as_ref().unwrap();
        for (i, w) in s.w_roots.iter().enumerate() {
            let j = s.w_roots.iter().position(|v| (v - w.conj()).norm() < 1e-8).unwrap();
            assert!((res[j] - res[i].conj()).norm() < 1e-8 * res[i].norm().max(1.0));
        }
    }

    #[test]
    fn json_roundtrip() {
        let s = spectral_roots(&spec(&[3.0, 3.0])).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"regime\":\"CLT\""));
        let back: RenewalSpectrum = serde_json::from_str(&text).unwrap();
        assert_eq!(back.theta_roots.len(), s.theta_roots.len());
    }
}
