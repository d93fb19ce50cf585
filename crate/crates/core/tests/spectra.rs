use gbp_spectra::renewal::{spectral_roots, spectral_roots_with, Regime, RootMethod};
use gbp_spectra::{Complex64, WeightSpec};

fn spec(alphas: &[f64]) -> WeightSpec {
    WeightSpec::new(alphas.to_vec(), 0.5).unwrap()
}

#[test]
fn asymmetric_boundary_eta_matches_extended_precision() {
    // mpmath polyroots at 40 digits on the cleared characteristic polynomial.
    let oracle = [
        ([26.0, 1.0], 0.487227),
        ([27.0, 1.0], 0.501455),
        ([32.0, 2.0], 0.489092),
        ([33.0, 2.0], 0.501398),
        ([64.0, 7.0], 0.498639),
        ([65.0, 7.0], 0.505214),
    ];
    for (alphas, eta) in oracle {
        let s = spectral_roots(&spec(&alphas)).unwrap();
        assert!((s.eta.unwrap() - eta).abs() < 1e-6, "{alphas:?}: {:?}", s.eta);
        let expected = if eta < 0.5 { Regime::Clt } else { Regime::NoClt };
        assert_eq!(s.regime, expected);
    }
}

#[test]
fn leading_roots_of_symmetric_weights() {
    for (alpha, re, im) in [(59.0, 0.495347, 9.10306), (70.0, 0.574906, 9.09931), (80.0, 0.628203, 9.09631)] {
        let z = spectral_roots(&WeightSpec::symmetric(alpha, 2, 0.5).unwrap()).unwrap().leading_root().unwrap();
        assert!((z.re - re).abs() < 1e-5 && (z.im - im).abs() < 1e-4, "alpha = {alpha}: {z}");
    }
}

#[test]
fn cubic_closed_form() {
    let s = spectral_roots(&spec(&[3.0, 3.0])).unwrap();
    let d = (71.0f64).sqrt() / 2.0;
    let roots: Vec<Complex64> = s.theta_roots.iter().map(|r| r.value).collect();
    assert_eq!(roots.len(), 2);
    for z in [Complex64::new(-6.5, d), Complex64::new(-6.5, -d)] {
        assert!(roots.iter().any(|w| (w - z).norm() < 1e-12), "{z}");
    }
    assert!((s.w_roots[0] - 0.5 * (1.0 - s.theta_roots[0].value)).norm() < 1e-15);
}

#[test]
fn direct_search_agrees_with_polynomial_in_the_strip() {
    let s = spec(&[12.0, 12.0]);
    let poly = spectral_roots(&s).unwrap();
    let direct = spectral_roots_with(&s, RootMethod::DirectSearch).unwrap();
    assert_eq!(direct.method, RootMethod::DirectSearch);
    assert!((poly.eta.unwrap() - direct.eta.unwrap()).abs() < 1e-9);
    assert_eq!(poly.regime, direct.regime);
}

#[test]
fn regime_does_not_depend_on_gamma() {
    for alpha in [10.0, 59.0, 60.0] {
        let verdicts: Vec<Regime> = [0.3, 0.5, 0.7]
            .iter()
            .map(|&g| spectral_roots(&WeightSpec::symmetric(alpha, 2, g).unwrap()).unwrap().regime)
            .collect();
        assert!(verdicts.windows(2).all(|w| w[0] == w[1]), "alpha = {alpha}");
    }
}
