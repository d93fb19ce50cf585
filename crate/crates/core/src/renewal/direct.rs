//! Root search on `psi(theta) - 1` that does not need integral gaps:
//! the argument principle locates cells of a grid that contain zeros and a
//! damped Newton iteration converges inside each.

use super::psi::psi_with_derivative;
use crate::error::{Error, Result};
use crate::gbp::WeightSpec;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Search rectangle and grid pitch.
#[derive(Clone, Copy, Debug)]
pub struct SearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
    /// Target cell side.
    pub cell: f64,
}

impl SearchRegion {
    /// `Re theta` in `(-alpha_min, 1]` (padded to the right so that the
    /// trivial root is interior) and `|Im theta| <= 40`.
    pub fn default_for(spec: &WeightSpec) -> Self {
        let amin = spec.alphas().iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            re_min: -amin + (0.05f64).min(amin / 4.0),
            re_max: 1.25,
            im_max: 40.0,
            cell: 0.5,
        }
    }
}

fn g(spec: &WeightSpec, z: Complex64) -> Option<Complex64> {
    psi_with_derivative(spec, z)
        .ok()
        .map(|(v, _)| v - 1.0)
        .filter(|v| v.re.is_finite() && v.im.is_finite())
}

/// Change of `arg g` along the segment `a -> b`, refining until consecutive
/// samples differ by less than `pi / 4`.
fn arg_change(spec: &WeightSpec, a: Complex64, b: Complex64) -> Result<f64> {
    let ga = g(spec, a).ok_or_else(|| Error::Pole(format!("psi at {a}")))?;
    let gb = g(spec, b).ok_or_else(|| Error::Pole(format!("psi at {b}")))?;
    arg_change_rec(spec, a, b, ga, gb, 0)
}

fn arg_change_rec(spec: &WeightSpec, a: Complex64, b: Complex64, ga: Complex64, gb: Complex64, depth: u32) -> Result<f64> {
    let d = (gb / ga).arg();
    if d.abs() < PI / 4.0 || depth >= 40 {
        if ga.norm() == 0.0 || gb.norm() == 0.0 {
            return Err(Error::Domain(format!("zero of psi - 1 on scan edge near {a}")));
        }
        return Ok(d);
    }
    let m = 0.5 * (a + b);
    let gm = g(spec, m).ok_or_else(|| Error::Pole(format!("psi at {m}")))?;
    Ok(arg_change_rec(spec, a, m, ga, gm, depth + 1)? + arg_change_rec(spec, m, b, gm, gb, depth + 1)?)
}

fn winding(spec: &WeightSpec, lo: Complex64, hi: Complex64) -> Result<i64> {
    let c = [
        lo,
        Complex64::new(hi.re, lo.im),
        hi,
        Complex64::new(lo.re, hi.im),
    ];
    let mut total = 0.0;
    for k in 0..4 {
        total += arg_change(spec, c[k], c[(k + 1) % 4])?;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Damped Newton on `psi - 1`; `None` if it stalls or leaves `bounds`.
pub(crate) fn damped_newton(spec: &WeightSpec, start: Complex64) -> Option<Complex64> {
    let mut z = start;
    let (mut v, mut dv) = psi_with_derivative(spec, z).ok()?;
    let mut r = (v - 1.0).norm();
    for _ in 0..200 {
        if r < 1e-15 {
            return Some(z);
        }
        if dv.norm() == 0.0 {
            return None;
        }
        let step = (v - 1.0) / dv;
        let mut lambda = 1.0;
        let mut moved = false;
        while lambda > 1e-6 {
            let cand = z - step * lambda;
            if let Ok((cv, cdv)) = psi_with_derivative(spec, cand) {
                let cr = (cv - 1.0).norm();
                if cr.is_finite() && cr < r {
                    z = cand;
                    v = cv;
                    dv = cdv;
                    r = cr;
                    moved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !moved || (step * lambda).norm() <= 1e-15 * z.norm().max(1.0) {
            return if r < 1e-9 { Some(z) } else { None };
        }
    }
    if r < 1e-9 {
        Some(z)
    } else {
        None
    }
}

fn locate(spec: &WeightSpec, lo: Complex64, hi: Complex64, count: i64, depth: u32, out: &mut Vec<(Complex64, usize)>) -> Result<()> {
    if count <= 0 {
        return Ok(());
    }
    if count == 1 || depth >= 8 {
        let pad = 0.1 * (hi - lo);
        let starts = [0.5 * (lo + hi), lo + pad, hi - pad, Complex64::new(lo.re + pad.re, hi.im - pad.im), Complex64::new(hi.re - pad.re, lo.im + pad.im)];
        for s in starts {
            if let Some(z) = damped_newton(spec, s) {
                let inside = z.re >= lo.re - pad.re && z.re <= hi.re + pad.re && z.im >= lo.im - pad.im && z.im <= hi.im + pad.im;
                if inside {
                    out.push((z, count as usize));
                    return Ok(());
                }
            }
        }
        return Err(Error::NonConvergence {
            what: format!("Newton search in cell [{lo}, {hi}]"),
            iterations: 200,
        });
    }
    let m = 0.5 * (lo + hi);
    let quads = [
        (lo, m),
        (Complex64::new(m.re, lo.im), Complex64::new(hi.re, m.im)),
        (Complex64::new(lo.re, m.im), Complex64::new(m.re, hi.im)),
        (m, hi),
    ];
    for (a, b) in quads {
        let k = winding(spec, a, b)?;
        locate(spec, a, b, k, depth + 1, out)?;
    }
    Ok(())
}

/// All zeros of `psi - 1` in `region`, with multiplicities.
pub fn direct_search(spec: &WeightSpec, region: SearchRegion) -> Result<Vec<(Complex64, usize)>> {
    let nx = ((region.re_max - region.re_min) / region.cell).ceil().max(1.0) as usize;
    // An odd row count keeps the real axis off the horizontal edges.
    let mut ny = ((2.0 * region.im_max) / region.cell).ceil().max(1.0) as usize;
    if ny.is_multiple_of(2) {
        ny += 1;
    }
    let hx = (region.re_max - region.re_min) / nx as f64;
    let hy = 2.0 * region.im_max / ny as f64;
    let rows: Vec<Result<Vec<(Complex64, usize)>>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let mut found = Vec::new();
            let y0 = -region.im_max + j as f64 * hy;
            for i in 0..nx {
                let lo = Complex64::new(region.re_min + i as f64 * hx, y0);
                let hi = lo + Complex64::new(hx, hy);
                let k = winding(spec, lo, hi)?;
                if k < 0 {
                    return Err(Error::Domain(format!("negative winding in cell at {lo}")));
                }
                locate(spec, lo, hi, k, 0, &mut found)?;
            }
            Ok(found)
        })
        .collect();
    let mut all: Vec<(Complex64, usize)> = Vec::new();
    for r in rows {
        for (z, m) in r? {
            if !all.iter().any(|(w, _)| (w - z).norm() < 1e-8 * z.norm().max(1.0)) {
                all.push((z, m));
            }
        }
    }
    Ok(all)
}
