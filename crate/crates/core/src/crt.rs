//! The Dirichlet(1/2, 1/2, 1/2) skeleton of the Brownian CRT: Malthusian
//! parameter 2/3, `psi(x) = 3 / (1 + 2x)` and the checks built on them.

use crate::error::{Error, Result};
use crate::gbp::{grow_cut_set, martingale_value, DirichletSampler, WeightSpec};
use crate::renewal::{moments, psi_real, spectral_roots};
use crate::seed::{rng_from_seed, run_replicates};
use crate::stats;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const CRT_GAMMA: f64 = 2.0 / 3.0;

/// Weights `(1/2, 1/2, 1/2)` with `gamma = 2/3`.
pub fn crt_weight_spec() -> WeightSpec {
    WeightSpec::new(vec![0.5; 3], CRT_GAMMA).expect("CRT weights are valid")
}

pub fn psi_crt(x: f64) -> Result<f64> {
    if !(x > -0.5) {
        return Err(Error::Domain(format!("psi_crt needs x > -1/2, got {x}")));
    }
    Ok(3.0 / (1.0 + 2.0 * x))
}

/// One mass split of the tree and the birth-time increments it induces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrtSplit {
    pub masses: [f64; 3],
    /// `-(3/2) ln Delta_j`.
    pub birth_increments: [f64; 3],
}

impl CrtSplit {
    pub fn sample<R: Rng + ?Sized>(sampler: &DirichletSampler, rng: &mut R) -> Self {
        let mut masses = [0.0; 3];
        sampler.sample_into(rng, &mut masses);
        Self {
            masses,
            birth_increments: masses.map(|d| -d.ln() / CRT_GAMMA),
        }
    }

    /// `sum_j Delta_j |ln Delta_j|`.
    pub fn entropy(&self) -> f64 {
        self.masses.iter().map(|d| -d * d.ln()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyMoment {
    pub mean: f64,
    /// 99% half-width.
    pub ci: f64,
    pub replicates: usize,
}

/// Monte Carlo estimate of `E sum_j Delta_j |ln Delta_j|` (exactly 2/3).
pub fn entropy_moment(replicates: usize, master_seed: u64) -> Result<EntropyMoment> {
    if replicates < 1000 {
        return Err(Error::Precondition(format!("entropy moment needs >= 1000 replicates, got {replicates}")));
    }
    let sampler = DirichletSampler::new(&crt_weight_spec());
    let xs = run_replicates(replicates, master_seed, |_, seed| {
        Ok(CrtSplit::sample(&sampler, &mut rng_from_seed(seed)).entropy())
    })?;
    let s = stats::summarize(&xs)?;
    Ok(EntropyMoment {
        mean: s.mean,
        ci: s.mean_ci99(),
        replicates,
    })
}

/// `max_r |M_t - 1|` over independent cut-sets at horizon `t`.
pub fn crt_martingale_check(t: f64, replicates: usize, master_seed: u64) -> Result<f64> {
    let spec = crt_weight_spec();
    let devs = run_replicates(replicates, master_seed, |_, seed| {
        let cs = grow_cut_set(&spec, t, seed)?;
        Ok((martingale_value(&cs, &spec) - 1.0).abs())
    })?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiCheck {
    pub x: f64,
    pub closed_form: f64,
    pub psi: f64,
    pub abs_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrtReport {
    pub psi_checks: Vec<PsiCheck>,
    pub max_psi_diff: f64,
    pub mu1: f64,
    pub entropy_moment: EntropyMoment,
    pub martingale_max_dev: f64,
    /// Roots of `psi = 1` besides `theta = 1` with `Re theta` in `(0, 1)`.
    pub roots_in_strip: usize,
}

/// `psi` against `3/(1+2x)` on `grid` points spanning `[0, 5]`.
pub fn psi_checks(grid: usize) -> Result<Vec<PsiCheck>> {
    let spec = crt_weight_spec();
    let mut xs: Vec<f64> = (0..grid).map(|k| 5.0 * k as f64 / (grid - 1).max(1) as f64).collect();
    xs.extend([1.5, 2.0, 2.5]);
    xs.into_iter()
        .map(|x| {
            let closed_form = psi_crt(x)?;
            let psi = psi_real(&spec, x)?;
            Ok(PsiCheck {
                x,
                closed_form,
                psi,
                abs_diff: (psi - closed_form).abs(),
            })
        })
        .collect()
}

pub fn crt_report(entropy_replicates: usize, martingale_t: f64, martingale_replicates: usize, master_seed: u64) -> Result<CrtReport> {
    let spec = crt_weight_spec();
    let psi_checks = psi_checks(51)?;
    let max_psi_diff = psi_checks.iter().map(|c| c.abs_diff).fold(0.0, f64::max);
    let spectrum = spectral_roots(&spec)?;
    let roots_in_strip = spectrum
        .theta_roots
        .iter()
        .filter(|r| r.value.re > 0.0 && r.value.re < 1.0)
        .count();
    Ok(CrtReport {
        psi_checks,
        max_psi_diff,
        mu1: moments(&spec)?.mu1,
        entropy_moment: entropy_moment(entropy_replicates, crate::seed::splitmix64(master_seed))?,
        martingale_max_dev: crt_martingale_check(martingale_t, martingale_replicates, master_seed)?,
        roots_in_strip,
    })
}
