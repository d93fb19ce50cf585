//! Sample moments and normality diagnostics with estimated parameters.

use crate::error::{Error, Result};
use crate::numerics::sum::KahanSum;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Moment summary. Variance is the unbiased sample variance; skewness and
/// excess kurtosis are the plain moment ratios `m3 / m2^1.5` and
/// `m4 / m2^2 - 3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl Summary {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Half-width of the 99% normal-approximation CI for the mean.
    pub fn mean_ci99(&self) -> f64 {
        Z99 * (self.variance / self.n as f64).sqrt()
    }

    /// 99% CI for the variance from the asymptotic variance of `s^2`,
    /// `(mu4 - sigma^4 (n-3)/(n-1)) / n`, which does not assume normality.
    pub fn variance_ci99(&self) -> (f64, f64) {
        let n = self.n as f64;
        let s4 = self.variance * self.variance;
        let m2 = self.variance * (n - 1.0) / n;
        let mu4 = (self.excess_kurtosis + 3.0) * m2 * m2;
        let se = ((mu4 - s4 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt();
        (self.variance - Z99 * se, self.variance + Z99 * se)
    }
}

pub fn summarize(xs: &[f64]) -> Result<Summary> {
    let n = xs.len();
    if n < 4 {
        return Err(Error::Domain(format!("need at least 4 samples, got {n}")));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("non-finite sample".into()));
    }
    let nf = n as f64;
    let mean = xs.iter().copied().sum::<KahanSum>().value() / nf;
    let (mut s2, mut s3, mut s4) = (KahanSum::new(), KahanSum::new(), KahanSum::new());
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        s2.add(d2);
        s3.add(d2 * d);
        s4.add(d2 * d2);
    }
    let (m2, m3, m4) = (s2.value() / nf, s3.value() / nf, s4.value() / nf);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Ok(Summary {
        n,
        mean,
        variance: s2.value() / (nf - 1.0),
        skewness,
        excess_kurtosis,
    })
}

fn standardized_sorted(xs: &[f64]) -> Result<Vec<f64>> {
    let s = summarize(xs)?;
    let sd = s.std_dev();
    if !(sd > 0.0) {
        return Err(Error::Domain("zero sample variance".into()));
    }
    let mut z: Vec<f64> = xs.iter().map(|x| (x - s.mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    Ok(z)
}

/// Kolmogorov-Smirnov distance to the normal law with fitted mean and
/// variance (the Lilliefors statistic).
pub fn lilliefors_statistic(xs: &[f64]) -> Result<f64> {
    let z = standardized_sorted(xs)?;
    let n = z.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &zi) in z.iter().enumerate() {
        let f = normal_cdf(zi);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Lilliefors test: Dallal-Wilkinson approximation below 0.1 and Stephens'
/// modified-statistic polynomials above it.
pub fn lilliefors_test(xs: &[f64]) -> Result<(f64, f64)> {
    let k = lilliefors_statistic(xs)?;
    let n = xs.len() as f64;
    let (kd, nd) = if n <= 100.0 {
        (k, n)
    } else {
        (k * (n / 100.0).powf(0.49), 100.0)
    };
    let mut p = (-7.01256 * kd * kd * (nd + 2.78019) + 2.99587 * kd * (nd + 2.78019).sqrt() - 0.122119
        + 0.974598 / nd.sqrt()
        + 1.67997 / nd)
        .exp();
    if p > 0.1 {
        let kk = (n.sqrt() - 0.01 + 0.85 / n.sqrt()) * k;
        p = if kk <= 0.302 {
            1.0
        } else if kk <= 0.5 {
            2.76773 - 19.828315 * kk + 80.709644 * kk.powi(2) - 138.55152 * kk.powi(3) + 81.218052 * kk.powi(4)
        } else if kk <= 0.9 {
            -4.901232 + 40.662806 * kk - 97.490286 * kk.powi(2) + 94.029866 * kk.powi(3) - 32.355711 * kk.powi(4)
        } else if kk <= 1.31 {
            6.198765 - 19.558097 * kk + 23.186922 * kk.powi(2) - 12.234627 * kk.powi(3) + 2.423045 * kk.powi(4)
        } else {
            0.0
        };
    }
    Ok((k, p.clamp(0.0, 1.0)))
}

/// Anderson-Darling statistic `A^2` against the fitted normal.
pub fn anderson_darling_statistic(xs: &[f64]) -> Result<f64> {
    let z = standardized_sorted(xs)?;
    let n = z.len();
    let mut acc = KahanSum::new();
    for i in 0..n {
        // ln(1 - Phi(z)) = ln Phi(-z), evaluated without cancellation.
        let lo = normal_cdf(z[i]).ln();
        let hi = normal_cdf(-z[n - 1 - i]).ln();
        acc.add((2.0 * i as f64 + 1.0) * (lo + hi));
    }
    Ok(-(n as f64) - acc.value() / n as f64)
}

/// Anderson-Darling test with the small-sample factor
/// `1 + 0.75/n + 2.25/n^2` and D'Agostino-Stephens p-value segments.
pub fn anderson_darling_test(xs: &[f64]) -> Result<(f64, f64)> {
    let a = anderson_darling_statistic(xs)?;
    let n = xs.len() as f64;
    let aa = a * (1.0 + 0.75 / n + 2.25 / (n * n));
    let p = if aa < 0.2 {
        1.0 - (-13.436 + 101.14 * aa - 223.73 * aa * aa).exp()
    } else if aa < 0.34 {
        1.0 - (-8.318 + 42.796 * aa - 59.938 * aa * aa).exp()
    } else if aa < 0.6 {
        (0.9177 - 4.279 * aa - 1.38 * aa * aa).exp()
    } else if aa < 10.0 {
        (1.2937 - 5.709 * aa + 0.0186 * aa * aa).exp()
    } else {
        3.7e-24
    };
    Ok((a, p.clamp(0.0, 1.0)))
}

/// Ordinary least-squares slope and intercept of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Domain("regression needs two or more paired points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("regression on constant abscissae".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
