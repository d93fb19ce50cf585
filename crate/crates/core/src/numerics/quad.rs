//! Adaptive Gauss-Kronrod (7/15) quadrature for complex-valued integrands.

use super::special::log_gamma;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Integral estimate with its absolute error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// Panel budget for the adaptive driver.
pub const MAX_PANELS: usize = 20_000;

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
    }
}

/// Adaptive integration of `f` over the union of consecutive `breakpoints`
/// panels until the summed error estimate is at most `tol`.
pub fn integrate_panels<F>(f: F, breakpoints: &[f64], tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    if breakpoints.len() < 2 {
        return Err(Error::Domain("need at least two breakpoints".into()));
    }
    let mut heap: BinaryHeap<Panel> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();
    let mut evaluations = 15 * heap.len();
    loop {
        let (value, error) = totals(&heap);
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Domain("integrand produced non-finite values".into()));
        }
        if error <= tol {
            return Ok(Integral {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::Tolerance {
                what: "adaptive quadrature panel budget exhausted".into(),
                requested: tol,
                achieved: error,
            });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel cannot be split further in double precision.
            return Err(Error::Tolerance {
                what: "adaptive quadrature reached machine resolution".into(),
                requested: tol,
                achieved: error,
            });
        }
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
        evaluations += 30;
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (Complex64, f64) {
    let mut v = super::sum::ComplexKahan::new();
    let mut e = super::sum::KahanSum::new();
    for p in heap.iter() {
        v.add(p.value);
        e.add(p.error);
    }
    (v.value(), e.value())
}

/// Adaptive integration over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    integrate_panels(f, &[a, b], tol)
}

/// Breakpoints on `[0, 1]` graded geometrically toward both endpoints.
pub fn graded_unit_breakpoints(levels: usize) -> Vec<f64> {
    let mut pts = vec![0.0];
    for k in (1..=levels).rev() {
        pts.push(0.5f64.powi(k as i32 + 1));
    }
    pts.push(0.5);
    for k in 1..=levels {
        pts.push(1.0 - 0.5f64.powi(k as i32 + 1));
    }
    pts.push(1.0);
    pts
}

/// Default error target for [`beta_weighted_integral`].
pub const BETA_TOL: f64 = 1e-9;

/// `E h(T)` for `T ~ Beta(alpha, alpha)`, i.e.
/// `int_0^1 h(t) t^{alpha-1} (1-t)^{alpha-1} dt / B(alpha, alpha)`.
pub fn beta_weighted_integral<H>(h: H, alpha: f64) -> Result<Integral>
where
    H: Fn(f64) -> Complex64,
{
    beta_weighted_integral_tol(h, alpha, BETA_TOL)
}

/// [`beta_weighted_integral`] with an explicit absolute error target.
pub fn beta_weighted_integral_tol<H>(h: H, alpha: f64, tol: f64) -> Result<Integral>
where
    H: Fn(f64) -> Complex64,
{
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("Beta parameter must be positive, got {alpha}")));
    }
    let log_beta = 2.0 * log_gamma(alpha)? - log_gamma(2.0 * alpha)?;
    // The density is symmetric about 1/2, so fold onto [0, 1/2] and take the
    // weight from the distance to the nearer endpoint; this keeps endpoint
    // singularities (alpha < 1) resolvable in double precision at both ends.
    let folded = |t: f64| {
        if t <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let log_w = (alpha - 1.0) * (t.ln() + (-t).ln_1p()) - log_beta;
        (h(t) + h(1.0 - t)) * log_w.exp()
    };
    let mut pts = vec![0.0];
    for k in (1..=60).rev() {
        pts.push(0.5f64.powi(k + 1));
    }
    pts.push(0.5);
    // Extra refinement around the mode when the density is concentrated.
    if alpha > 4.0 {
        let sd = 0.5 / (2.0 * alpha + 1.0).sqrt();
        for k in [1.0, 2.0, 4.0, 6.0] {
            let x = 0.5 - k * sd;
            if x > 0.0 {
                pts.push(x);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
    }
    integrate_panels(folded, &pts, tol)
}
