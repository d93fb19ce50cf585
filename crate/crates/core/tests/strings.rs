use gbp_spectra::string::{count_eigenvalues, count_gaps, generate_gaps};
use gbp_spectra::WeightSpec;
use proptest::prelude::*;
use std::f64::consts::PI;

fn brute_force(gaps: &[f64], lambda: f64) -> u64 {
    gaps.iter()
        .map(|&l| (1..).take_while(|&k| (k as f64 * PI / l).powi(2) <= lambda).count() as u64)
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_match_enumeration(
        alphas in prop::collection::vec(0.3f64..6.0, 2..5),
        gamma in 0.3f64..0.8,
        seed in any::<u64>(),
        log_lambda in 1.0f64..6.0,
    ) {
        let spec = WeightSpec::new(alphas, gamma).unwrap();
        let lambda = 10f64.powf(log_lambda);
        let gs = generate_gaps(&spec, PI / lambda.sqrt(), seed).unwrap();
        prop_assert_eq!(count_eigenvalues(&gs, lambda).unwrap(), brute_force(&gs.gaps, lambda));
    }

    #[test]
    fn refining_the_cutoff_keeps_the_count(seed in any::<u64>(), log_lambda in 2.0f64..7.0) {
        let spec = WeightSpec::new(vec![1.0, 2.0], 0.5).unwrap();
        let lambda = 10f64.powf(log_lambda);
        let coarse = generate_gaps(&spec, PI / lambda.sqrt(), seed).unwrap();
        let fine = generate_gaps(&spec, 0.25 * PI / lambda.sqrt(), seed).unwrap();
        prop_assert_eq!(count_eigenvalues(&coarse, lambda).unwrap(), count_eigenvalues(&fine, lambda).unwrap());
    }
}

#[test]
fn count_is_monotone_in_lambda() {
    let spec = WeightSpec::new(vec![1.0, 1.0, 1.0], 0.6).unwrap();
    let gs = generate_gaps(&spec, 1e-4, 9).unwrap();
    let mut prev = 0;
    for k in 0..60 {
        let lambda = 10f64.powf(k as f64 / 10.0);
        let n = count_gaps(&gs.gaps, lambda);
        assert!(n >= prev);
        prev = n;
    }
}
