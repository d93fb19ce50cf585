//! Simulation of general branching processes whose offspring birth weights
//! are Dirichlet distributed on the simplex.
//!
//! An individual with birth time `sigma` has `n` children born at
//! `sigma - ln(T_i) / gamma`, where `(T_1, .., T_n)` is a fresh
//! Dirichlet(alpha) draw. Hence `sum_i exp(-gamma (sigma_i - sigma)) = 1`
//! at every node and the fundamental martingale is identically one.

use crate::error::{Error, Result};
use crate::numerics::sum::KahanSum;
use crate::seed::{rng_from_seed, SimRng};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Dirichlet parameters together with the Malthusian parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    alphas: Vec<f64>,
    gamma: f64,
}

impl WeightSpec {
    pub fn new(alphas: Vec<f64>, gamma: f64) -> Result<Self> {
        if alphas.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least two weights, got {}",
                alphas.len()
            )));
        }
        if alphas.len() > u8::MAX as usize {
            return Err(Error::InvalidSpec("at most 255 weights supported".into()));
        }
        if let Some(a) = alphas.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidSpec(format!("alpha must be positive, got {a}")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidSpec(format!("gamma must lie in (0,1), got {gamma}")));
        }
        Ok(Self { alphas, gamma })
    }

    /// `n` equal weights `alpha`.
    pub fn symmetric(alpha: f64, n: usize, gamma: f64) -> Result<Self> {
        Self::new(vec![alpha; n], gamma)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn alpha0(&self) -> f64 {
        self.alphas.iter().sum()
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.alphas.clone(), gamma)
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.alphas.iter().map(|a| a.to_string()).collect();
        write!(f, "Dirichlet({}), gamma={}", a.join(","), self.gamma)
    }
}

/// Draws simplex vectors `(T_1, .., T_n) ~ Dirichlet(alpha)` by normalizing
/// independent Gamma(alpha_i, 1) variates.
#[derive(Clone, Debug)]
pub struct DirichletSampler {
    gammas: Vec<Gamma<f64>>,
}

impl DirichletSampler {
    pub fn new(spec: &WeightSpec) -> Self {
        let gammas = spec
            .alphas
            .iter()
            .map(|&a| Gamma::new(a, 1.0).expect("validated shape"))
            .collect();
        Self { gammas }
    }

    pub fn n(&self) -> usize {
        self.gammas.len()
    }

    /// Fills `out` with one simplex draw. Every entry is in `(0, 1)`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        loop {
            let mut total = 0.0;
            for (o, g) in out.iter_mut().zip(&self.gammas) {
                *o = g.sample(rng);
                total += *o;
            }
            if total > 0.0 && total.is_finite() {
                for o in out.iter_mut() {
                    *o /= total;
                }
                if out.iter().all(|&t| t > 0.0 && t < 1.0) {
                    return;
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        self.sample_into(rng, &mut out);
        out
    }
}

/// One Dirichlet(alpha) draw.
pub fn sample_simplex<R: Rng + ?Sized>(spec: &WeightSpec, rng: &mut R) -> Vec<f64> {
    DirichletSampler::new(spec).sample(rng)
}

/// Position in the Ulam-Harris tree; entries are 1-based child indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Address(pub Vec<u8>);

impl Address {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn child(&self, i: u8) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_ancestor_of(&self, other: &Address) -> bool {
        self.len() < other.len() && other.0.starts_with(&self.0)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub address: Address,
    pub sigma: f64,
}

/// The coming generation at a horizon: individuals born after `horizon`
/// whose parents were born at or before it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutSet {
    pub horizon: f64,
    pub members: Vec<Individual>,
    pub rng_seed: u64,
}

impl CutSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Default cap on cut-set size.
pub const DEFAULT_MEMBER_CAP: usize = 10_000_000;

/// Depth-first walk of all individuals born by `horizon`.
///
/// `expanded` is called for every individual with `sigma <= horizon`
/// (the root included), `crossed` for every child born after the horizon.
/// Children are visited in index order. Returns the number of crossings.
fn walk<E, C>(
    spec: &WeightSpec,
    horizon: f64,
    rng: &mut SimRng,
    cap: usize,
    mut expanded: E,
    mut crossed: C,
) -> Result<usize>
where
    E: FnMut(&[u8], f64),
    C: FnMut(&[u8], u8, f64),
{
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::Precondition(format!("horizon must be >= 0, got {horizon}")));
    }
    let sampler = DirichletSampler::new(spec);
    let n = spec.n();
    let inv_gamma = 1.0 / spec.gamma;
    let mut weights = vec![0.0; n];
    let mut path: Vec<u8> = Vec::new();
    // Pending siblings: (depth, child index, sigma). Pushed in reverse so
    // that index 1 pops first.
    let mut stack: Vec<(usize, u8, f64)> = Vec::new();
    let mut count = 0usize;
    let mut visit = |path: &mut Vec<u8>,
                     sigma: f64,
                     stack: &mut Vec<(usize, u8, f64)>,
                     rng: &mut SimRng,
                     count: &mut usize|
     -> Result<()> {
        expanded(path, sigma);
        sampler.sample_into(rng, &mut weights);
        let depth = path.len() + 1;
        for i in (0..n).rev() {
            let child_sigma = sigma - weights[i].ln() * inv_gamma;
            if child_sigma > horizon {
                // Emitted below in index order.
                continue;
            }
            stack.push((depth, i as u8 + 1, child_sigma));
        }
        for (i, &w) in weights.iter().enumerate() {
            let child_sigma = sigma - w.ln() * inv_gamma;
            if child_sigma > horizon {
                *count += 1;
                if *count > cap {
                    return Err(Error::Budget {
                        what: format!("cut-set at horizon {horizon} for {spec}"),
                        cap,
                    });
                }
                crossed(path, i as u8 + 1, child_sigma);
            }
        }
        Ok(())
    };
    visit(&mut path, 0.0, &mut stack, rng, &mut count)?;
    while let Some((depth, idx, sigma)) = stack.pop() {
        path.truncate(depth - 1);
        path.push(idx);
        visit(&mut path, sigma, &mut stack, rng, &mut count)?;
    }
    Ok(count)
}

/// Samples the cut-set at horizon `t`.
pub fn grow_cut_set(spec: &WeightSpec, t: f64, seed: u64) -> Result<CutSet> {
    grow_cut_set_capped(spec, t, seed, DEFAULT_MEMBER_CAP)
}

pub fn grow_cut_set_capped(spec: &WeightSpec, t: f64, seed: u64, cap: usize) -> Result<CutSet> {
    let mut rng = rng_from_seed(seed);
    let mut members = Vec::new();
    walk(
        spec,
        t,
        &mut rng,
        cap,
        |_, _| {},
        |path, i, sigma| {
            let mut a = Vec::with_capacity(path.len() + 1);
            a.extend_from_slice(path);
            a.push(i);
            members.push(Individual {
                address: Address(a),
                sigma,
            });
        },
    )?;
    Ok(CutSet {
        horizon: t,
        members,
        rng_seed: seed,
    })
}

/// `sum_{x in cut-set} exp(-gamma sigma_x)`, compensated.
pub fn martingale_value(cs: &CutSet, spec: &WeightSpec) -> f64 {
    cs.members
        .iter()
        .map(|x| (-spec.gamma * x.sigma).exp())
        .sum::<KahanSum>()
        .value()
}

/// Size of the cut-set at `t = ln(1/eps)`: the number of construction
/// pieces of diameter below `eps` whose parent piece has diameter at least
/// `eps`. Nothing beyond the count is stored.
pub fn covering_count(spec: &WeightSpec, eps: f64, seed: u64) -> Result<usize> {
    covering_count_capped(spec, eps, seed, DEFAULT_MEMBER_CAP)
}

pub fn covering_count_capped(spec: &WeightSpec, eps: f64, seed: u64, cap: usize) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!("eps must lie in (0,1), got {eps}")));
    }
    let mut rng = rng_from_seed(seed);
    walk(spec, (1.0 / eps).ln(), &mut rng, cap, |_, _| {}, |_, _, _| {})
}

/// One sample of `sum_x exp(-gamma sigma_x) 1{sigma_x <= t}` over all
/// individuals, the root included. Its mean is the renewal measure
/// `H(t)` of `nu_gamma`.
pub fn renewal_sum(spec: &WeightSpec, t: f64, seed: u64) -> Result<f64> {
    let mut rng = rng_from_seed(seed);
    let mut acc = KahanSum::new();
    let g = spec.gamma;
    walk(
        spec,
        t,
        &mut rng,
        DEFAULT_MEMBER_CAP,
        |_, sigma| acc.add((-g * sigma).exp()),
        |_, _, _| {},
    )?;
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::replicate_seed;

    fn spec(alphas: &[f64], gamma: f64) -> WeightSpec {
        WeightSpec::new(alphas.to_vec(), gamma).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(WeightSpec::new(vec![1.0], 0.5).is_err());
        assert!(WeightSpec::new(vec![1.0, 0.0], 0.5).is_err());
        assert!(WeightSpec::new(vec![1.0, 1.0], 1.0).is_err());
        assert!(WeightSpec::new(vec![1.0, 1.0], 0.0).is_err());
        assert!(WeightSpec::new(vec![1.0, f64::NAN], 0.5).is_err());
        let s = WeightSpec::symmetric(60.0, 2, 0.5).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.alpha0(), 120.0);
    }

    #[test]
    fn simplex_draws_sum_to_one() {
        let s = spec(&[0.3, 2.0, 7.5, 1.0], 0.5);
        let sampler = DirichletSampler::new(&s);
        let mut rng = rng_from_seed(1);
        for _ in 0..1000 {
            let t = sampler.sample(&mut rng);
            assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert!(t.iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }

    #[test]
    fn uniform_marginal_mean() {
        let s = spec(&[1.0, 1.0], 0.5);
        let mut rng = rng_from_seed(2);
        let m = 100_000;
        let draws: Vec<f64> = (0..m).map(|_| sample_simplex(&s, &mut rng)[0]).collect();
        let mean = draws.iter().sum::<f64>() / m as f64;
        let half_width = 3.0 * (1.0f64 / 12.0).sqrt() / (m as f64).sqrt();
        assert!((mean - 0.5).abs() < half_width, "{mean}");
    }

    #[test]
    fn dirichlet_means() {
        let s = spec(&[0.5, 2.0, 3.5], 0.5);
        let a0 = s.alpha0();
        let sampler = DirichletSampler::new(&s);
        let mut rng = rng_from_seed(3);
        let m = 50_000;
        let mut sums = [0.0; 3];
        for _ in 0..m {
            for (acc, t) in sums.iter_mut().zip(sampler.sample(&mut rng)) {
                *acc += t;
            }
        }
        for (i, &a) in s.alphas().iter().enumerate() {
            let p = a / a0;
            let var = p * (1.0 - p) / (a0 + 1.0);
            let hw = 3.0 * (var / m as f64).sqrt();
            assert!((sums[i] / m as f64 - p).abs() < hw, "component {i}");
        }
    }

    #[test]
    fn crt_marginal_is_beta_half_one() {
        // Kolmogorov-Smirnov against the Beta(1/2, 1) CDF sqrt(x).
        let s = spec(&[0.5, 0.5, 0.5], 2.0 / 3.0);
        let mut rng = rng_from_seed(4);
        let m = 10_000;
        let mut xs: Vec<f64> = (0..m).map(|_| sample_simplex(&s, &mut rng)[0]).collect();
        xs.sort_by(f64::total_cmp);
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = x.sqrt();
                (f - i as f64 / m as f64).max((i + 1) as f64 / m as f64 - f)
            })
            .fold(0.0, f64::max);
        assert!(d < 1.628 / (m as f64).sqrt(), "KS distance {d}");
    }

    #[test]
    fn horizon_zero_gives_first_generation() {
        let s = spec(&[1.0, 2.0, 3.0], 0.4);
        let cs = grow_cut_set(&s, 0.0, 11).unwrap();
        assert_eq!(cs.len(), 3);
        assert!(cs.members.iter().all(|x| x.address.len() == 1 && x.sigma > 0.0));
        assert!((martingale_value(&cs, &s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn martingale_is_one() {
        let cases = [
            (spec(&[1.0, 1.0], 0.5), 10.0),
            (spec(&[1.0, 1.0, 1.0], 0.6), 8.0),
            (spec(&[0.5, 0.5, 0.5], 2.0 / 3.0), 6.0),
        ];
        for (s, t) in cases {
            for r in 0..20 {
                let cs = grow_cut_set(&s, t, replicate_seed(9, r)).unwrap();
                assert!((martingale_value(&cs, &s) - 1.0).abs() <= 1e-9, "{s} t={t}");
            }
        }
    }

    #[test]
    fn cut_set_property_and_antichain() {
        let s = spec(&[1.0, 2.0], 0.5);
        let cs = grow_cut_set(&s, 5.0, 17).unwrap();
        assert!(cs.members.iter().all(|x| x.sigma > cs.horizon));
        let set: std::collections::HashSet<&Address> = cs.members.iter().map(|x| &x.address).collect();
        assert_eq!(set.len(), cs.len());
        for x in &cs.members {
            for k in 0..x.address.len() {
                let prefix = Address(x.address.0[..k].to_vec());
                assert!(!set.contains(&prefix), "{} has ancestor {}", x.address, prefix);
            }
        }
    }

    #[test]
    fn every_path_crosses_once() {
        // Follow random leaf-ward paths through a fresh cut-set: each must
        // meet exactly one member. The cut-set is an antichain covering all
        // infinite lines of descent, so a path of length max depth hits it.
        let s = spec(&[1.0, 1.0, 1.0], 0.6);
        let cs = grow_cut_set(&s, 4.0, 23).unwrap();
        let set: std::collections::HashSet<&Address> = cs.members.iter().map(|x| &x.address).collect();
        let depth = cs.members.iter().map(|x| x.address.len()).max().unwrap();
        let mut rng = rng_from_seed(99);
        for _ in 0..100 {
            let path: Vec<u8> = (0..depth).map(|_| rng.random_range(1..=3u8)).collect();
            let hits = (1..=depth)
                .filter(|&k| set.contains(&Address(path[..k].to_vec())))
                .count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let s = spec(&[1.0, 1.0], 0.5);
        let a = grow_cut_set(&s, 6.0, 5).unwrap();
        let b = grow_cut_set(&s, 6.0, 5).unwrap();
        assert_eq!(a, b);
        let c = grow_cut_set(&s, 6.0, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn covering_count_matches_cut_set_size() {
        let s = spec(&[1.0, 1.0, 1.0], 0.6);
        let eps: f64 = 0.01;
        let cs = grow_cut_set(&s, (1.0 / eps).ln(), 3).unwrap();
        assert_eq!(covering_count(&s, eps, 3).unwrap(), cs.len());
    }

    #[test]
    fn coarse_eps_gives_n() {
        let s = spec(&[1.0, 1.0, 1.0], 0.6);
        // Horizon ~ 1e-9 is below every first-generation birth time almost surely.
        assert_eq!(covering_count(&s, 1.0 - 1e-9, 8).unwrap(), 3);
    }

    #[test]
    fn member_cap_is_enforced() {
        let s = spec(&[1.0, 1.0], 0.5);
        let err = grow_cut_set_capped(&s, 20.0, 1, 100).unwrap_err();
        assert!(err.is_budget());
    }

    #[test]
    fn renewal_sum_at_zero_is_root_weight() {
        let s = spec(&[2.0, 2.0], 0.5);
        assert_eq!(renewal_sum(&s, 0.0, 4).unwrap(), 1.0);
    }
}
