use std::f64::consts::PI;

use num_complex::Complex64;
use pdkernel::extension::{
    boundary_condition_check, defect_vectors, discrete_isometry_check, extend_type1, g_r_extension,
    sample_via_spectrum, solve_theta_spectrum, theta_residual, type1_from_spectrum, unitary_evolve, SpectralExpansion,
};
use pdkernel::mercer::volterra_apply;
use pdkernel::rkhs::{e_lambda_sampled, smooth, Bump, TestFunction, Verdict};
use pdkernel::{PdKernel, SpectralMeasure};
use proptest::prelude::*;

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

#[test]
fn exp_defect_vectors_have_unit_norm() {
    let d = defect_vectors(&PdKernel::exp(), 10).unwrap();
    assert!((d.norms_sq.0 - 1.0).abs() < 1e-12);
    assert!((d.norms_sq.1 - 1.0).abs() < 1e-12);
    assert_eq!(d.indices, Some((1, 1)));
    // ‖e^x‖² = e²‖e^{x−1}‖².
    assert!((d.growing_norm_sq - (2.0f64).exp()).abs() < 1e-10);
}

#[test]
fn triangle_defect_vectors_are_members() {
    let d = defect_vectors(&PdKernel::triangle(), 12).unwrap();
    assert_eq!(d.indices, Some((1, 1)));
    // Reflection x ↦ a − x maps e^{−x} to e^{x−a} and preserves the norm.
    assert!((d.norms_sq.0 - d.norms_sq.1).abs() < 1e-9);
}

#[test]
fn spectrum_json_shape() {
    let s = solve_theta_spectrum(0.8, 10).unwrap();
    assert_eq!(s.roots().len(), 21);
    let v: serde_json::Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
    assert_eq!(v["roots"].as_array().unwrap().len(), 21);
    assert!(v["tail_bound"].as_f64().unwrap() > 0.0);
    assert_eq!(solve_theta_spectrum(0.0, 1).unwrap().roots().len(), 3);
}

#[test]
fn negative_theta_is_reduced() {
    let s = solve_theta_spectrum(-1.0, 2).unwrap();
    assert!(s.was_reduced());
    assert!((s.theta() - (2.0 * PI - 1.0)).abs() < 1e-15);
    assert!(s.max_residual() < 1e-10);
}

#[test]
fn weights_approach_one_within_the_tail_bound() {
    let ext = extend_type1(0.8, 200).unwrap();
    let deficit = 1.0 - ext.total_weight();
    assert!(deficit > 0.0 && deficit <= ext.tail_bound);
    assert!(deficit > 0.9 * ext.tail_bound, "deficit {deficit} vs bound {}", ext.tail_bound);
}

#[test]
fn extension_measure_reproduces_the_extension() {
    let ext = extend_type1(0.3, 20).unwrap();
    let m = ext.measure().unwrap();
    assert!((m.total_mass() - ext.total_weight()).abs() < 1e-15);
    for x in [-3.0, 0.0, 0.4, 7.5] {
        assert!((m.bochner(x) - ext.eval(x)).norm() < 1e-13);
    }
}

#[test]
fn sampling_matches_volterra() {
    let n = 401;
    let bumps = [(1.0, Bump::new(0.5, 0.3).unwrap())];
    let phi = TestFunction::from_bumps(1.0, n, &bumps).unwrap();
    let t = volterra_apply(phi.values()).unwrap();
    let ext = extend_type1(1.1, 200).unwrap();
    for i in [100, 200, 300] {
        let x = i as f64 / (n - 1) as f64;
        let s = sample_via_spectrum(&phi, &ext, x).unwrap();
        assert!((s.re - t[i]).abs() < 1e-6 && s.im.abs() < 1e-6, "x = {x}: {s} vs {}", t[i]);
    }
    let zero = TestFunction::new(1.0, vec![0.0; 11]).unwrap();
    assert_eq!(sample_via_spectrum(&zero, &ext, 0.5).unwrap(), Complex64::ZERO);
}

#[test]
fn unitary_group_reproduces_the_extension() {
    let s = solve_theta_spectrum(0.8, 60).unwrap();
    let ext = type1_from_spectrum(&s);
    let f0 = SpectralExpansion::kernel_section_zero(&s);
    for t in [0.0, 0.5, 2.0, -3.7] {
        let ut = unitary_evolve(&f0, t);
        assert!((f0.inner(&ut).unwrap() - ext.eval(t)).norm() < 1e-12);
        assert!((ut.norm() - f0.norm()).abs() < 1e-12);
    }
    let a = unitary_evolve(&unitary_evolve(&f0, 0.7), 1.9);
    let b = unitary_evolve(&f0, 2.6);
    let diff = a.coeffs.iter().zip(&b.coeffs).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-12);
}

#[test]
fn expansion_of_a_sampled_section() {
    let s = solve_theta_spectrum(0.0, 40).unwrap();
    let h = e_lambda_sampled(s.get(2).unwrap().lambda, 2001);
    let e = SpectralExpansion::from_element(&h, &s).unwrap();
    for (l, a) in e.lambdas.iter().zip(&e.coeffs) {
        let want = if *l == s.get(2).unwrap().lambda { 1.0 } else { 0.0 };
        assert!((a - want).norm() < 1e-9);
    }
}

#[test]
fn type_two_family() {
    for r in [0.0, 0.3, 1.0] {
        let g = g_r_extension(r).unwrap();
        assert_eq!(g.eval(0.0), 1.0);
        assert!((g.eval(1.0) - (-1.0f64).exp()).abs() < 1e-16);
        assert!((g.eval(1.0 + 1e-12) - (-1.0f64).exp()).abs() < 1e-11);
        assert!(g.positivity_scan(200.0, 20001) >= 0.0, "r = {r}");
    }
    assert!(g_r_extension(1.5).is_err());
}

#[test]
fn isometry_failures() {
    let cauchy = SpectralMeasure::cauchy();
    let f = |u: f64| c((-u.abs()).exp());
    let single = discrete_isometry_check(&[0.0], f, &cauchy, 10, 1e-6, 1).unwrap();
    assert!(single.passed);
    let heavy = SpectralMeasure::new(
        cauchy.grid.clone(),
        cauchy.density.iter().map(|d| 1.1 * d).collect(),
        vec![],
        cauchy.tail.map(|mut t| {
            t.coeff *= 1.1;
            t
        }),
    )
    .unwrap();
    let r = discrete_isometry_check(&[0.0], f, &heavy, 10, 1e-6, 1).unwrap();
    assert!(!r.passed);
    assert!((r.max_relative_gap - 0.1).abs() < 1e-6);
    // 1 − |x|² is not positive definite: the Gram has a negative direction.
    let bad = discrete_isometry_check(&[0.0, 0.5, 1.0], |u| c(1.0 - u * u), &cauchy, 10, 1e-6, 1).unwrap();
    assert!(!bad.passed && bad.witness.is_some() && bad.min_eigenvalue < 0.0);
}

#[test]
fn boundary_law() {
    let theta = 0.8;
    let s = solve_theta_spectrum(theta, 3).unwrap();
    for r in s.roots() {
        assert!(boundary_condition_check(&e_lambda_sampled(r.lambda, 101), theta) < 1e-9);
    }
    // F_φ satisfies both boundary conditions separately.
    let phi = TestFunction::from_bumps(1.0, 401, &[(1.0, Bump::new(0.4, 0.3).unwrap())]).unwrap();
    let fp = smooth(&phi, &PdKernel::exp(), 401).unwrap();
    for t in [0.0, 1.0, 4.0] {
        assert!(boundary_condition_check(&fp, t) < 1e-10);
    }
    assert!(boundary_condition_check(&e_lambda_sampled(1.0, 101), theta) > 0.1);
}

/// The three-term system is not orthonormal for this kernel, and its
/// coefficient sums grow by a fixed amount per level.
#[test]
fn cubic_spline_defect_verdict() {
    let d = defect_vectors(&PdKernel::cubic_spline(), 7).unwrap();
    assert_eq!(d.verdicts.0, Verdict::Out, "{d:?}");
    assert_eq!(d.indices, Some((0, 0)));
    assert!(matches!(
        defect_vectors(&PdKernel::cubic_spline(), 8),
        Err(pdkernel::Error::LinearDependence { level: 8, .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectrum_invariants(theta in 0.0f64..(2.0 * PI)) {
        let s = solve_theta_spectrum(theta, 30).unwrap();
        let ls = s.lambdas();
        prop_assert!(s.max_residual() < 1e-10);
        prop_assert!(ls.windows(2).all(|w| w[0] < w[1]));
        let gap = ls[ls.len() - 1] - ls[ls.len() - 2];
        prop_assert!((gap - 2.0 * PI).abs() < 1e-3);
        // Far branches sit at the left edge of their window.
        let top = s.get(30).unwrap().lambda;
        prop_assert!((top - (theta + 59.0 * PI)).abs() < 0.02);
        for r in s.roots() {
            prop_assert!((theta_residual(theta, r.lambda) - r.residual).abs() < 1e-15);
        }
    }

    #[test]
    fn extension_grams_are_psd(theta in 0.0f64..(2.0 * PI), pts in prop::collection::vec(-5.0f64..5.0, 2..16)) {
        let ext = extend_type1(theta, 40).unwrap();
        let n = pts.len();
        let g = nalgebra::DMatrix::from_fn(n, n, |i, j| ext.eval(pts[i] - pts[j]));
        prop_assert!(pdkernel::linalg::hermitian_min_eigenvalue(g) >= -1e-9);
        let t2 = g_r_extension(0.6).unwrap();
        let g2 = nalgebra::DMatrix::from_fn(n, n, |i, j| t2.eval(pts[i] - pts[j]));
        prop_assert!(pdkernel::linalg::symmetric_min_eigenvalue(g2) >= -1e-9);
    }
}
