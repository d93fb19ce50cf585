//! Random self-similar Cantor strings, their Dirichlet eigenvalue counts and
//! the second-order spectral statistics.
//!
//! An interval of length `l` is replaced by `n` children of lengths
//! `T_i^{1/gamma} l` separated by `n - 1` equal gaps of length `S l`, with
//! `S = (1 - sum_i T_i^{1/gamma}) / (n - 1)`. The string is the union of the
//! gaps; its boundary has Lebesgue measure zero, so `vol(U) = 1`.

use crate::error::{Error, Result};
use crate::gbp::{covering_count, DirichletSampler, WeightSpec};
use crate::numerics::sum::KahanSum;
use crate::seed::{replicate_seed, rng_from_seed, run_replicates, splitmix64};
use crate::stats::{self, Summary};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Default cap on the number of stored gaps.
pub const DEFAULT_GAP_CAP: usize = 50_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct GapString {
    pub gaps: Vec<f64>,
    /// Intervals left unexpanded (below the cutoff or at the depth limit).
    pub residual_intervals: Vec<f64>,
    pub cutoff: f64,
    pub spec: WeightSpec,
    pub seed: u64,
}

/// Generation limits.
#[derive(Clone, Copy, Debug)]
pub struct GapLimits {
    pub cutoff: f64,
    /// Intervals at this depth are kept as residuals regardless of length.
    pub max_depth: Option<usize>,
    pub cap: usize,
}

impl GapLimits {
    pub fn cutoff(cutoff: f64) -> Self {
        Self {
            cutoff,
            max_depth: None,
            cap: DEFAULT_GAP_CAP,
        }
    }
}

/// Samples a string whose every interval of length `>= cutoff` is expanded.
pub fn generate_gaps(spec: &WeightSpec, cutoff: f64, seed: u64) -> Result<GapString> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::Precondition(format!("cutoff must lie in (0,1), got {cutoff}")));
    }
    generate_gaps_with(spec, GapLimits::cutoff(cutoff), seed)
}

pub fn generate_gaps_with(spec: &WeightSpec, limits: GapLimits, seed: u64) -> Result<GapString> {
    let (gaps, residual_intervals) = expand_from(spec, limits, root_key(seed))?;
    Ok(GapString {
        gaps,
        residual_intervals,
        cutoff: limits.cutoff,
        spec: spec.clone(),
        seed,
    })
}

/// Key of the root interval of the string with the given seed.
pub fn root_key(seed: u64) -> u64 {
    splitmix64(seed)
}

/// Key of child `i` (0-based). Each interval's weights are drawn from a
/// generator seeded by its own key, so a string refined with a smaller
/// cutoff extends the coarser one instead of resampling it.
pub fn child_key(key: u64, i: usize) -> u64 {
    splitmix64(key ^ splitmix64(i as u64 + 1))
}

/// Draws the scaled child lengths `R_i = T_i^{1/gamma}` of the interval
/// with the given key.
pub fn child_ratios(sampler: &DirichletSampler, inv_gamma: f64, key: u64, out: &mut [f64]) {
    let mut rng = rng_from_seed(key);
    sampler.sample_into(&mut rng, out);
    for r in out.iter_mut() {
        *r = r.powf(inv_gamma);
    }
}

/// Expands the unit interval with the given key.
pub fn expand_from(spec: &WeightSpec, limits: GapLimits, key: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(limits.cutoff >= 0.0) {
        return Err(Error::Precondition("cutoff must be non-negative".into()));
    }
    if limits.cutoff == 0.0 && limits.max_depth.is_none() {
        return Err(Error::Precondition("cutoff 0 needs a depth limit".into()));
    }
    let sampler = DirichletSampler::new(spec);
    let n = spec.n();
    let inv_gamma = 1.0 / spec.gamma();
    let mut r = vec![0.0; n];
    let mut gaps = Vec::new();
    let mut residual = Vec::new();
    let mut stack = vec![(1.0f64, 0usize, key)];
    while let Some((len, depth, key)) = stack.pop() {
        if len < limits.cutoff || limits.max_depth.is_some_and(|d| depth >= d) {
            residual.push(len);
            continue;
        }
        child_ratios(&sampler, inv_gamma, key, &mut r);
        let s = (1.0 - r.iter().sum::<f64>()) / (n - 1) as f64;
        if gaps.len() + n - 1 > limits.cap {
            return Err(Error::Budget {
                what: format!("gap string for {spec} at cutoff {:e}", limits.cutoff),
                cap: limits.cap,
            });
        }
        for _ in 0..n - 1 {
            gaps.push(s * len);
        }
        for (i, &ri) in r.iter().enumerate().rev() {
            stack.push((ri * len, depth + 1, child_key(key, i)));
        }
    }
    Ok((gaps, residual))
}

impl GapString {
    /// `1 - (sum of gaps + sum of residual intervals)`.
    pub fn mass_defect(&self) -> f64 {
        let mut k = KahanSum::new();
        for &g in self.gaps.iter().chain(&self.residual_intervals) {
            k.add(g);
        }
        1.0 - k.value()
    }

    pub fn max_residual(&self) -> f64 {
        self.residual_intervals.iter().copied().fold(0.0, f64::max)
    }

    fn check_resolution(&self, lambda: f64) -> Result<()> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
        }
        let limit = PI / lambda.sqrt();
        if self.cutoff > limit || self.max_residual() > limit {
            return Err(Error::Precondition(format!(
                "cutoff {:e} (largest residual {:e}) exceeds pi/sqrt(lambda) = {limit:e}",
                self.cutoff,
                self.max_residual()
            )));
        }
        Ok(())
    }
}

/// `N_U(lambda) = sum_gaps floor(g sqrt(lambda) / pi)`, exact when no
/// unexpanded interval is longer than `pi / sqrt(lambda)`.
pub fn count_eigenvalues(gs: &GapString, lambda: f64) -> Result<u64> {
    gs.check_resolution(lambda)?;
    Ok(count_gaps(&gs.gaps, lambda))
}

/// The count for an explicit list of intervals, without preconditions.
pub fn count_gaps(gaps: &[f64], lambda: f64) -> u64 {
    let k = lambda.sqrt() / PI;
    gaps.iter().map(|&g| (g * k).floor() as u64).sum()
}

/// `N-bar_U(lambda) = sqrt(lambda) / pi - N_U(lambda)`.
pub fn nbar(gs: &GapString, lambda: f64) -> Result<f64> {
    Ok(lambda.sqrt() / PI - count_eigenvalues(gs, lambda)? as f64)
}

/// One replicate of the spectral experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltSample {
    pub replicate: usize,
    pub seed: u64,
    pub lambda: f64,
    pub count: u64,
    pub nbar: f64,
    /// `lambda^{-gamma/2} nbar`.
    pub scaled: f64,
    /// `lambda^{gamma/4} (scaled - frak_N_hat)`.
    pub statistic: f64,
}

const JITTER_SALT: u64 = 0x5bd1_e995_c2b2_ae35;

impl CltSample {
    /// Offset in `[-1/2, 1/2)` added to the count before normality testing,
    /// derived from the replicate seed.
    pub fn jitter(&self) -> f64 {
        (splitmix64(self.seed ^ JITTER_SALT) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    /// The statistic with the count replaced by `count + jitter`.
    ///
    /// The raw statistic lives on a lattice of spacing `lambda^{-gamma/4}`
    /// (the count is an integer), which a test against a continuous law
    /// rejects at any useful sample size; the jitter spreads each atom over
    /// its lattice cell and vanishes in the limit.
    pub fn smoothed_statistic(&self, gamma: f64) -> f64 {
        self.statistic - self.lambda.powf(-gamma / 4.0) * self.jitter()
    }
}

pub fn sample_replicate(spec: &WeightSpec, lambda: f64, replicate: usize, seed: u64, center: f64) -> Result<CltSample> {
    let gs = generate_gaps(spec, PI / lambda.sqrt(), seed)?;
    let count = count_eigenvalues(&gs, lambda)?;
    let nbar = lambda.sqrt() / PI - count as f64;
    let g = spec.gamma();
    let scaled = lambda.powf(-g / 2.0) * nbar;
    Ok(CltSample {
        replicate,
        seed,
        lambda,
        count,
        nbar,
        scaled,
        statistic: lambda.powf(g / 4.0) * (scaled - center),
    })
}

/// Monte Carlo estimate of the second-order constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrakEstimate {
    pub lambda: f64,
    pub replicates: usize,
    pub mean: f64,
    /// 99% normal-approximation half-width.
    pub ci_half_width: f64,
    pub std_dev: f64,
}

pub fn estimate_frak_n(spec: &WeightSpec, lambda: f64, replicates: usize, master_seed: u64) -> Result<FrakEstimate> {
    if replicates < 30 {
        return Err(Error::Precondition(format!("need at least 30 replicates, got {replicates}")));
    }
    let samples = run_replicates(replicates, master_seed, |r, seed| sample_replicate(spec, lambda, r, seed, 0.0))?;
    let xs: Vec<f64> = samples.iter().map(|s| s.scaled).collect();
    let s = stats::summarize(&xs)?;
    Ok(FrakEstimate {
        lambda,
        replicates,
        mean: s.mean,
        ci_half_width: s.mean_ci99(),
        std_dev: s.std_dev(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltSummary {
    pub lambda: f64,
    pub frak_n_hat: f64,
    /// Moments and tests refer to the smoothed statistic.
    pub summary: Summary,
    pub variance_ci99: (f64, f64),
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub ad_statistic: f64,
    pub ad_p_value: f64,
    /// The same tests on the unsmoothed lattice values, for reference.
    pub raw_ks_p_value: f64,
    pub raw_ad_p_value: f64,
    #[serde(skip)]
    pub samples: Vec<CltSample>,
}

/// Normality diagnostics of the centred, rescaled statistic. `frak_n_hat`
/// must come from independent samples.
pub fn clt_experiment(spec: &WeightSpec, lambda: f64, replicates: usize, frak_n_hat: f64, master_seed: u64) -> Result<CltSummary> {
    let samples = run_replicates(replicates, master_seed, |r, seed| {
        sample_replicate(spec, lambda, r, seed, frak_n_hat)
    })?;
    let raw: Vec<f64> = samples.iter().map(|s| s.statistic).collect();
    let xs: Vec<f64> = samples.iter().map(|s| s.smoothed_statistic(spec.gamma())).collect();
    let summary = stats::summarize(&xs)?;
    let (ks_statistic, ks_p_value) = stats::lilliefors_test(&xs)?;
    let (ad_statistic, ad_p_value) = stats::anderson_darling_test(&xs)?;
    Ok(CltSummary {
        lambda,
        frak_n_hat,
        variance_ci99: summary.variance_ci99(),
        summary,
        ks_statistic,
        ks_p_value,
        ad_statistic,
        ad_p_value,
        raw_ks_p_value: stats::lilliefors_test(&raw)?.1,
        raw_ad_p_value: stats::anderson_darling_test(&raw)?.1,
        samples,
    })
}

/// Seed stream of the pilot run, disjoint from the test run's.
pub fn pilot_seed(master: u64) -> u64 {
    replicate_seed(master, u64::MAX)
}

/// Pilot estimate of the centring constant followed by the test run.
pub fn two_stage_clt(
    spec: &WeightSpec,
    lambda: f64,
    replicates: usize,
    pilot_lambda: f64,
    pilot_replicates: usize,
    master_seed: u64,
) -> Result<(FrakEstimate, CltSummary)> {
    let pilot = estimate_frak_n(spec, pilot_lambda, pilot_replicates, pilot_seed(master_seed))?;
    let run = clt_experiment(spec, lambda, replicates, pilot.mean, master_seed)?;
    Ok((pilot, run))
}

/// Per-replicate CSV rows.
pub fn write_samples_csv<W: Write>(samples: &[CltSample], mut out: W) -> std::io::Result<()> {
    writeln!(out, "replicate,seed,lambda,count,nbar,scaled,statistic")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{:.16e},{},{:.16e},{:.16e},{:.16e}",
            s.replicate, s.seed, s.lambda, s.count, s.nbar, s.scaled, s.statistic
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCounting {
    pub slope: f64,
    pub intercept: f64,
    /// `(eps, mean covering count)`.
    pub counts: Vec<(f64, f64)>,
}

/// Least-squares slope of `ln E N_eps` on `ln(1/eps)`, with `N_eps` the
/// covering count from the branching process.
pub fn box_counting_dimension(spec: &WeightSpec, eps_list: &[f64], replicates: usize, master_seed: u64) -> Result<BoxCounting> {
    if eps_list.len() < 3 {
        return Err(Error::Precondition("need at least 3 scales".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("eps values must be strictly decreasing".into()));
    }
    if replicates == 0 {
        return Err(Error::Precondition("need at least one replicate".into()));
    }
    let mut counts = Vec::with_capacity(eps_list.len());
    for (k, &eps) in eps_list.iter().enumerate() {
        let per = run_replicates(replicates, replicate_seed(master_seed, k as u64), |_, seed| {
            covering_count(spec, eps, seed)
        })?;
        let mean = per.iter().map(|&c| c as f64).sum::<KahanSum>().value() / replicates as f64;
        counts.push((eps, mean));
    }
    let x: Vec<f64> = counts.iter().map(|(e, _)| (1.0 / e).ln()).collect();
    let y: Vec<f64> = counts.iter().map(|(_, c)| c.ln()).collect();
    let (slope, intercept) = stats::ols_slope(&x, &y)?;
    Ok(BoxCounting { slope, intercept, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(alphas: &[f64], gamma: f64) -> WeightSpec {
        WeightSpec::new(alphas.to_vec(), gamma).unwrap()
    }

    fn string_of(gaps: Vec<f64>) -> GapString {
        GapString {
            gaps,
            residual_intervals: vec![],
            cutoff: 1e-12,
            spec: spec(&[1.0, 1.0], 0.5),
            seed: 0,
        }
    }

    #[test]
    fn unit_interval_counts() {
        let one = string_of(vec![1.0]);
        assert_eq!(count_eigenvalues(&one, (3.5 * PI).powi(2)).unwrap(), 3);
        assert!((nbar(&one, (2.5 * PI).powi(2)).unwrap() - 0.5).abs() < 1e-12);
        let two = string_of(vec![0.5, 0.3]);
        assert_eq!(count_eigenvalues(&two, (10.0 * PI).powi(2)).unwrap(), 8);
    }

    #[test]
    fn middle_third_first_gap() {
        let g = 2f64.ln() / 3f64.ln();
        let t: f64 = 0.5;
        let s = 1.0 - 2.0 * t.powf(1.0 / g);
        assert!((s - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn depth_limited_gap_count() {
        for (alphas, d) in [(&[1.0, 1.0][..], 6usize), (&[1.0, 1.0, 1.0], 4), (&[0.5, 2.0, 1.0, 3.0], 3)] {
            let s = spec(alphas, 0.6);
            let limits = GapLimits {
                cutoff: 0.0,
                max_depth: Some(d),
                cap: DEFAULT_GAP_CAP,
            };
            let gs = generate_gaps_with(&s, limits, 3).unwrap();
            assert_eq!(gs.gaps.len(), s.n().pow(d as u32) - 1);
            assert_eq!(gs.residual_intervals.len(), s.n().pow(d as u32));
            assert!(gs.mass_defect().abs() < 1e-12);
        }
    }

    #[test]
    fn mass_conservation() {
        let gs = generate_gaps(&spec(&[1.0, 1.0, 1.0], 0.6), 1e-4, 11).unwrap();
        assert!(gs.mass_defect().abs() < 1e-9);
        assert!(gs.residual_intervals.iter().all(|&r| r < 1e-4));
    }

    #[test]
    fn precondition_on_coarse_cutoff() {
        let gs = generate_gaps(&spec(&[1.0, 1.0], 0.5), 1e-2, 1).unwrap();
        assert!(matches!(count_eigenvalues(&gs, 1e8), Err(Error::Precondition(_))));
        assert!(count_eigenvalues(&gs, (PI / 1e-2).powi(2) * 0.99).is_ok());
    }

    #[test]
    fn gap_cap() {
        let limits = GapLimits {
            cutoff: 1e-6,
            max_depth: None,
            cap: 100,
        };
        let r = generate_gaps_with(&spec(&[1.0, 1.0], 0.9), limits, 1);
        assert!(matches!(r, Err(Error::Budget { .. })));
    }

    #[test]
    fn halving_cutoff_keeps_count() {
        for seed in 0..20u64 {
            let s = spec(&[1.0 + (seed % 3) as f64, 1.0], 0.5);
            let lambda = 1e6 * (1.0 + seed as f64 / 7.0);
            let c = PI / lambda.sqrt();
            let a = count_eigenvalues(&generate_gaps(&s, c, seed).unwrap(), lambda).unwrap();
            let b = count_eigenvalues(&generate_gaps(&s, c / 2.0, seed).unwrap(), lambda).unwrap();
            assert_eq!(a, b, "seed {seed}");
        }
    }

    #[test]
    fn depth_one_decomposition() {
        // N-bar_U(l) = (n-1) N-bar_[0,1](S^2 l) + sum_i N-bar_{U_i}(R_i^2 l).
        for seed in 0..10u64 {
            let s = spec(&[1.0, 2.0, 1.5], 0.55);
            let lambda: f64 = 4e6;
            let cutoff = PI / lambda.sqrt();
            let full = generate_gaps(&s, cutoff, seed).unwrap();
            let lhs = nbar(&full, lambda).unwrap();
            let key = root_key(seed);
            let mut r = vec![0.0; 3];
            child_ratios(&DirichletSampler::new(&s), 1.0 / s.gamma(), key, &mut r);
            let gap = (1.0 - r.iter().sum::<f64>()) / 2.0;
            let unit = string_of(vec![1.0]);
            let mut rhs = 2.0 * (gap * lambda.sqrt() / PI - count_gaps(&unit.gaps, gap * gap * lambda) as f64);
            for (i, &ri) in r.iter().enumerate() {
                let (gaps, _) = expand_from(&s, GapLimits::cutoff(cutoff / ri), child_key(key, i)).unwrap();
                let sub_lambda = ri * ri * lambda;
                rhs += sub_lambda.sqrt() / PI - count_gaps(&gaps, sub_lambda) as f64;
            }
            assert!((lhs - rhs).abs() < 1e-9, "seed {seed}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn replicate_statistic_arithmetic() {
        let s = spec(&[1.0, 1.0], 0.5);
        let x = sample_replicate(&s, 1e8, 0, 99, 0.3).unwrap();
        let expect_nbar = 1e4 / PI - x.count as f64;
        assert!((x.nbar - expect_nbar).abs() < 1e-12);
        assert!((x.scaled - expect_nbar / 100.0).abs() < 1e-12);
        assert!((x.statistic - 10.0 * (x.scaled - 0.3)).abs() < 1e-12);
        let j = x.jitter();
        assert!((-0.5..0.5).contains(&j));
        let smoothed = 10.0 * ((1e4 / PI - (x.count as f64 + j)) / 100.0 - 0.3);
        assert!((x.smoothed_statistic(0.5) - smoothed).abs() < 1e-12);
    }

    #[test]
    fn weyl_term_dominates() {
        // The relative deficit is about frak_N pi lambda^{(gamma-1)/2}, so 1%
        // needs lambda large enough for that factor to be small.
        for (alphas, gamma, lambda) in [(&[1.0, 1.0][..], 0.5, 1e12), (&[1.0, 1.0, 1.0], 0.3, 1e9), (&[2.0, 2.0], 0.5, 1e12)] {
            let s = spec(alphas, gamma);
            for seed in 0..5 {
                let gs = generate_gaps(&s, PI / f64::sqrt(lambda), seed).unwrap();
                let weyl = f64::sqrt(lambda) / PI;
                let n = count_eigenvalues(&gs, lambda).unwrap() as f64;
                assert!((n / weyl - 1.0).abs() < 0.01, "{alphas:?} {gamma} {seed}: {}", n / weyl);
            }
        }
    }

    #[test]
    fn csv_layout() {
        let s = spec(&[1.0, 1.0], 0.5);
        let x = sample_replicate(&s, 1e6, 0, 1, 0.0).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&[x], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "replicate,seed,lambda,count,nbar,scaled,statistic");
        assert_eq!(lines.next().unwrap().split(',').count(), 7);
    }

    proptest! {
        #[test]
        fn count_matches_enumeration(gaps in proptest::collection::vec(1e-4f64..1.0, 1..30), sqrt_l in 1.0f64..3000.0) {
            let lambda = sqrt_l * sqrt_l;
            let mut brute = 0u64;
            for &g in &gaps {
                let mut k = 1u64;
                while (k as f64 * PI / g).powi(2) <= lambda {
                    brute += 1;
                    k += 1;
                }
            }
            prop_assert_eq!(count_gaps(&gaps, lambda), brute);
        }

        #[test]
        fn nbar_bounds(seed in 0u64..1000, sqrt_l in 10.0f64..3000.0) {
            let s = spec(&[1.0, 1.0], 0.5);
            let gs = generate_gaps(&s, PI / sqrt_l, seed).unwrap();
            let v = nbar(&gs, sqrt_l * sqrt_l).unwrap();
            prop_assert!(v >= 0.0 && v <= sqrt_l / PI);
        }
    }
}
