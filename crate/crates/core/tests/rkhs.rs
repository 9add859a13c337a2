use std::f64::consts::PI;

use num_complex::Complex64;
use pdkernel::extension::solve_theta_spectrum;
use pdkernel::mercer::{apply_operator, discretize, NystromConfig};
use pdkernel::quad::GaussRule;
use pdkernel::rkhs::{
    e_lambda_sampled, element_measure_expansion, exp_inner_product, inner_product_combo, inner_product_smoothed,
    membership_test, reproducing_eval, smooth, Bump, RkhsElement, TestFunction, Verdict,
};
use pdkernel::PdKernel;
use proptest::prelude::*;

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn bump_phi(a: f64, n: usize) -> (Vec<(f64, Bump)>, TestFunction) {
    let bumps = vec![(1.0, Bump::new(0.4 * a, 0.25 * a).unwrap()), (-0.6, Bump::new(0.7 * a, 0.2 * a).unwrap())];
    let phi = TestFunction::from_bumps(a, n, &bumps).unwrap();
    (bumps, phi)
}

/// ∫|φ̂(λ)|² dλ/(π(1 + λ²)) with φ̂ computed directly from the bumps.
fn cauchy_energy(bumps: &[(f64, Bump)], range: f64) -> f64 {
    let rule = GaussRule::new(16);
    let hat = |l: f64| -> Complex64 {
        bumps
            .iter()
            .map(|&(w, b)| {
                let (lo, hi) = b.support();
                w * rule.composite(lo, hi, 8, |y| Complex64::from_polar(b.value(y), -l * y))
            })
            .sum()
    };
    GaussRule::new(12).composite(-range, range, 2000, |l| hat(l).norm_sqr() / (PI * (1.0 + l * l)))
}

#[test]
fn smoothed_inner_product_matches_spectral_side() {
    let k = PdKernel::exp();
    let (bumps, phi) = bump_phi(1.0, 801);
    let direct = inner_product_smoothed(&phi, &phi, &k).unwrap().re;
    let spectral = cauchy_energy(&bumps, 400.0);
    assert!((direct - spectral).abs() < 1e-6 * spectral, "{direct} vs {spectral}");
}

#[test]
fn sobolev_form_matches_double_integral() {
    let k = PdKernel::exp();
    let (_, phi) = bump_phi(1.0, 801);
    let psi = TestFunction::from_bumps(1.0, 801, &[(1.0, Bump::new(0.5, 0.3).unwrap())]).unwrap();
    let fp = smooth(&phi, &k, 1001).unwrap();
    let fq = smooth(&psi, &k, 1001).unwrap();
    let sob = exp_inner_product(&fp, &fq).unwrap();
    let dbl = inner_product_smoothed(&phi, &psi, &k).unwrap();
    assert!((sob - dbl).norm() < 1e-7 * dbl.norm(), "{sob} vs {dbl}");
}

#[test]
fn smoothing_agrees_with_the_operator() {
    let k = PdKernel::triangle();
    let (_, phi) = bump_phi(0.5, 401);
    let fp = smooth(&phi, &k, 401).unwrap();
    let direct = apply_operator(&k, phi.values());
    for (v, d) in fp.values().iter().zip(&direct) {
        assert!((v.re - d).abs() < 1e-8, "{} vs {d}", v.re);
    }
}

#[test]
fn reproducing_property() {
    let k = PdKernel::triangle();
    let combo = vec![(c(0.3), 0.1), (Complex64::new(0.0, -1.2), 0.45)];
    let elem = RkhsElement::KernelCombo(combo.clone());
    for x in [0.0, 0.2, 0.5] {
        let want: Complex64 = combo.iter().map(|&(w, y)| w * k.value(x - y)).sum();
        assert!((reproducing_eval(&elem, x, &k).unwrap() - want).norm() < 1e-15);
    }
    assert!(reproducing_eval(&elem, 0.6, &k).is_err());
}

#[test]
fn membership_separates_smooth_and_rough_functions() {
    let dec = discretize(&PdKernel::exp(), &NystromConfig::with_nodes(400)).unwrap();
    let smooth = membership_test(|x| c(x.exp()), &dec, 20).unwrap();
    assert_eq!(smooth.verdict, Verdict::In, "{smooth:?}");
    let step = membership_test(|x| c(if x < 0.5 { 0.0 } else { 1.0 }), &dec, 20).unwrap();
    assert_eq!(step.verdict, Verdict::Out, "{step:?}");
}

#[test]
fn measure_expansion_of_a_spectral_vector_reproduces_it() {
    let k = PdKernel::exp();
    let spec = solve_theta_spectrum(0.8, 3).unwrap();
    let l = spec.get(1).unwrap().lambda;
    let h = e_lambda_sampled(l, 1001);
    let mu = element_measure_expansion(&h, &spec, 3, 1001).unwrap();
    let back = pdkernel::rkhs::element_from_measure(&mu, &k, 1001).unwrap();
    let err = back.values().iter().zip(h.values()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn combo_inner_product_is_hermitian_and_positive(
        pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..1.0), 1..8),
        other in prop::collection::vec((-1.0f64..1.0, 0.0f64..1.0), 1..8),
    ) {
        let k = PdKernel::exp();
        let a: Vec<_> = pts.iter().map(|&(re, im, x)| (Complex64::new(re, im), x)).collect();
        let b: Vec<_> = other.iter().map(|&(re, x)| (c(re), x)).collect();
        let ab = inner_product_combo(&a, &b, &k).unwrap();
        let ba = inner_product_combo(&b, &a, &k).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-12);
        let aa = inner_product_combo(&a, &a, &k).unwrap();
        prop_assert!(aa.re >= -1e-12 && aa.im.abs() < 1e-12);
    }
}
