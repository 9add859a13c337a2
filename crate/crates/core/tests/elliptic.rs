use std::f64::consts::PI;

use pdkernel::elliptic::{
    bspline_direct_ratio, bspline_operator_bound, bspline_spectral_ratio, distributional_derivative_check,
    elliptic_descriptor, ellipticity_check, ellipticity_samples, random_bumps, solve_transcendental, support_check,
    verify_against_mercer, write_roots_csv, EllipticVerdict, TranscendentalSpec,
};
use pdkernel::mercer::{discretize, NystromConfig};
use pdkernel::rkhs::{smooth, Bump, TestFunction};
use pdkernel::PdKernel;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn exp_roots_and_trace() {
    let roots = solve_transcendental(TranscendentalSpec::ExpBvp, 400).unwrap();
    assert!(roots[0].k > 1.0 && roots[0].k < PI);
    // tan k (k² − 1) − 2k at the first root, by direct evaluation.
    let k = roots[0].k;
    assert!((k.tan() * (k * k - 1.0) - 2.0 * k).abs() < 1e-11);
    assert!(roots.iter().all(|r| r.residual < 1e-12));
    let mut sum = 0.0;
    for r in &roots {
        let next = sum + r.eigenvalue;
        assert!(next > sum && next < 1.0);
        sum = next;
    }
    assert!(1.0 - sum < 2.0 / (PI * PI * 399.0));
}

#[test]
fn quoted_triangle_equation_roots() {
    let roots = solve_transcendental(TranscendentalSpec::TriangleBvp, 60).unwrap();
    assert!(roots.iter().all(|r| r.residual < 1e-12));
    // tan(k/2) → 0 along the branches, so k approaches multiples of 2π.
    let last = roots.last().unwrap().k;
    assert!((last - 2.0 * PI * (last / (2.0 * PI)).round()).abs() < 0.01);
}

#[test]
fn exp_roots_match_nystrom() {
    let dec = discretize(&PdKernel::exp(), &NystromConfig::with_nodes(800)).unwrap();
    let r = verify_against_mercer(TranscendentalSpec::ExpBvp, &dec, 5, 1e-4).unwrap();
    assert!(r.unmatched.is_empty() && r.max_relative_error < 1e-4, "{r:?}");
    let one = verify_against_mercer(TranscendentalSpec::ExpBvp, &dec, 1, 1e-4).unwrap();
    let smallest = solve_transcendental(TranscendentalSpec::ExpBvp, 1).unwrap()[0].eigenvalue;
    assert_eq!(one.matches[0].mapped, Some(smallest));
}

#[test]
fn triangle_equations_against_nystrom() {
    let dec = discretize(&PdKernel::triangle(), &NystromConfig::with_nodes(800)).unwrap();
    let quoted = verify_against_mercer(TranscendentalSpec::TriangleBvp, &dec, 5, 1e-3).unwrap();
    assert!(!quoted.unmatched.is_empty());
    let full = verify_against_mercer(TranscendentalSpec::TriangleRederived, &dec, 5, 1e-3).unwrap();
    assert!(full.unmatched.is_empty(), "{full:?}");
    assert!(verify_against_mercer(TranscendentalSpec::ExpBvp, &dec, 5, 1e-3).is_err());
}

#[test]
fn rederived_triangle_trace() {
    let roots = solve_transcendental(TranscendentalSpec::TriangleRederived, 2000).unwrap();
    let sum: f64 = roots.iter().map(|r| r.eigenvalue).sum();
    assert!(sum < 0.5 && 0.5 - sum < 1e-3, "{sum}");
}

#[test]
fn delta_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    use rand::Rng;
    for k in [PdKernel::triangle(), PdKernel::exp()] {
        let a = k.half_width();
        let bumps: Vec<Bump> = (0..10)
            .map(|_| {
                let r = rng.random_range(0.1..0.45) * a;
                let c = rng.random_range(-a + r + 0.01 * a..a - r - 0.01 * a);
                Bump::new(c, r).unwrap()
            })
            .collect();
        let rep = distributional_derivative_check(&k, &bumps).unwrap();
        assert!(rep.max_error < 1e-6, "{}: {}", k.name(), rep.max_error);
    }
    let away = distributional_derivative_check(&PdKernel::triangle(), &[Bump::new(0.3, 0.1).unwrap()]).unwrap();
    assert!(away.entries[0].lhs.abs() < 1e-10);
    assert!(distributional_derivative_check(&PdKernel::exp(), &[Bump::new(0.5, 0.6).unwrap()]).is_err());
}

#[test]
fn boundary_functionals_vanish_on_the_range() {
    for k in [PdKernel::exp(), PdKernel::triangle()] {
        let a = k.half_width();
        let phi = TestFunction::from_bumps(a, 401, &[(1.0, Bump::new(0.45 * a, 0.3 * a).unwrap())]).unwrap();
        let fp = smooth(&phi, &k, 401).unwrap();
        let d = elliptic_descriptor(&k).unwrap();
        for r in d.boundary_residuals(&fp) {
            assert!(r.norm() < 1e-10, "{}: {r}", k.name());
        }
        assert!(d.symbol_min(100.0, 2001) >= 0.0);
    }
}

#[test]
fn ellipticity_constants_stabilize() {
    for k in [PdKernel::exp(), PdKernel::triangle()] {
        let dec = discretize(&k, &NystromConfig::with_nodes(400)).unwrap();
        let samples = ellipticity_samples(k.half_width(), 401).unwrap();
        let r = ellipticity_check(&dec, &samples, 50).unwrap();
        assert_eq!(r.verdict, EllipticVerdict::Stable, "{}: {r:?}", k.name());
        assert!(r.constants[1].is_finite() && r.constants[1] > 0.0);
    }
}

#[test]
fn bspline_bounds() {
    for (k, bound) in [(2, 1.0), (4, 4.0)] {
        let r = bspline_operator_bound(k, 50, 9).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.bound, bound);
    }
    let wide = [(1.0, Bump::new(0.25, 0.24).unwrap())];
    let r = bspline_spectral_ratio(2, &wide);
    assert!(r > 0.0 && r <= 1.0, "{r}");
}

#[test]
fn bspline_direct_ratio_is_the_angular_spectral_ratio() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..3 {
        let bumps = random_bumps(0.5, &mut rng);
        let spectral = bspline_spectral_ratio(2, &bumps);
        let direct = bspline_direct_ratio(2, &bumps, 1601).unwrap();
        assert!((direct - 4.0 * PI * PI * spectral).abs() < 1e-4 * direct, "{direct} vs {spectral}");
    }
}

#[test]
fn convolution_powers_have_the_stated_support() {
    for k in [1, 2, 4] {
        let r = support_check(k, 200).unwrap();
        assert_eq!(r.support, (-(k as f64) / 2.0, k as f64 / 2.0));
        assert!(r.outside_mass < 1e-12, "{r:?}");
        assert!(r.convolution_error < 1e-2, "{r:?}");
    }
    // Closed form of the fourfold power near 0.
    let x: f64 = 0.3;
    let want = (3.0 * x.powi(3) - 6.0 * x * x + 4.0) / 6.0;
    assert!((pdkernel::kernel::bspline_density(4, x) - want).abs() < 1e-14);
}

#[test]
fn roots_csv() {
    let roots = solve_transcendental(TranscendentalSpec::ExpBvp, 3).unwrap();
    let mut buf = Vec::new();
    write_roots_csv(&roots, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("i,k,eigenvalue,residual"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bspline_ratio_never_exceeds_bound(seed in 0u64..10_000, k in 1u32..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bumps = random_bumps(0.5, &mut rng);
        let r = bspline_spectral_ratio(k, &bumps);
        prop_assert!(r <= (k as f64 / 2.0).powi(2) * (1.0 + 1e-6));
    }
}
