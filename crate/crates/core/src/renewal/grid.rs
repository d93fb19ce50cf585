//! Phase portraits of `1 - f(gamma w) = 1 - psi(1 - w)` on a rectangle.

use super::psi::psi;
use crate::error::{Error, Result};
use crate::gbp::WeightSpec;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseCell {
    pub w: Complex64,
    /// In `(-pi, pi]`; NaN at poles.
    pub arg: f64,
    /// Infinite at poles.
    pub abs: f64,
}

impl PhaseCell {
    pub fn is_pole(&self) -> bool {
        self.abs.is_infinite()
    }
}

/// Row-major grid: rows run over the imaginary axis, columns over the real.
#[derive(Clone, Debug)]
pub struct PhaseGrid {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub cells: Vec<PhaseCell>,
}

fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64)
        .collect()
}

pub fn phase_value(spec: &WeightSpec, w: Complex64) -> PhaseCell {
    match psi(spec, 1.0 - w) {
        Ok(v) if v.re.is_finite() && v.im.is_finite() => {
            let z = 1.0 - v;
            let mut arg = z.arg();
            if arg == -PI {
                arg = PI;
            }
            PhaseCell { w, arg, abs: z.norm() }
        }
        _ => PhaseCell {
            w,
            arg: f64::NAN,
            abs: f64::INFINITY,
        },
    }
}

/// `resolution` points per axis, endpoints included.
pub fn phase_grid(spec: &WeightSpec, re_range: (f64, f64), im_range: (f64, f64), resolution: usize) -> Result<PhaseGrid> {
    if resolution < 2 {
        return Err(Error::Domain("phase grid needs at least 2 points per axis".into()));
    }
    if !(re_range.1 > re_range.0 && im_range.1 > im_range.0) {
        return Err(Error::Domain("phase grid ranges must be increasing".into()));
    }
    let re = axis(re_range, resolution);
    let im = axis(im_range, resolution);
    let cells = im
        .par_iter()
        .flat_map_iter(|&y| re.iter().map(move |&x| phase_value(spec, Complex64::new(x, y))))
        .collect();
    Ok(PhaseGrid { re, im, cells })
}

impl PhaseGrid {
    pub fn cell_width(&self) -> (f64, f64) {
        (self.re[1] - self.re[0], self.im[1] - self.im[0])
    }

    /// The non-pole cell of smallest modulus.
    pub fn min_modulus(&self) -> Option<&PhaseCell> {
        self.cells
            .iter()
            .filter(|c| !c.is_pole())
            .min_by(|a, b| a.abs.total_cmp(&b.abs))
    }

    /// CSV with header `w_re,w_im,arg,abs`; poles are written as `nan,inf`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "w_re,w_im,arg,abs")?;
        for c in &self.cells {
            if c.is_pole() {
                writeln!(out, "{:.16e},{:.16e},nan,inf", c.w.re, c.w.im)?;
            } else {
                writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", c.w.re, c.w.im, c.arg, c.abs)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_cells() {
        let spec = WeightSpec::new(vec![2.0, 3.0, 0.5], 0.5).unwrap();
        assert!(phase_value(&spec, Complex64::new(0.0, 0.0)).abs < 1e-13);
        // w = 1 is theta = 0 where psi = n.
        let c = phase_value(&spec, Complex64::new(1.0, 0.0));
        assert!((c.abs - 2.0).abs() < 1e-13);
        assert!((c.arg - PI).abs() < 1e-15);
    }

    #[test]
    fn poles_are_flagged() {
        let spec = WeightSpec::new(vec![2.0, 2.0], 0.5).unwrap();
        // theta = -2 is a pole: w = 3.
        assert!(phase_value(&spec, Complex64::new(3.0, 0.0)).is_pole());
        let g = phase_grid(&spec, (2.0, 4.0), (-1.0, 1.0), 3).unwrap();
        assert_eq!(g.cells.len(), 9);
        assert!(g.cells[4].is_pole());
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("w_re,w_im,arg,abs\n"));
        assert_eq!(text.lines().count(), 10);
        assert!(text.contains("nan,inf"));
    }

    #[test]
    fn row_major_order() {
        let spec = WeightSpec::new(vec![1.0, 1.0], 0.5).unwrap();
        let g = phase_grid(&spec, (0.0, 1.0), (5.0, 6.0), 4).unwrap();
        assert_eq!(g.cells[1].w, Complex64::new(1.0 / 3.0, 5.0));
        assert_eq!(g.cells[4].w, Complex64::new(0.0, 5.0 + 1.0 / 3.0));
    }
}
