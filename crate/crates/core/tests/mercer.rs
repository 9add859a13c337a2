use num_complex::Complex64;
use pdkernel::mercer::{apply_operator, discretize, greens_inverse_apply, volterra_apply, NystromConfig};
use pdkernel::quad::{GaussRule, UniformGrid};
use pdkernel::rkhs::SampledElement;
use pdkernel::{Error, PdKernel};
use proptest::prelude::*;

/// ∫₀^a F(x − y) φ(y) dy by Gauss–Legendre split at y = x.
fn operator_oracle(k: &PdKernel, phi: impl Fn(f64) -> f64, x: f64) -> f64 {
    let rule = GaussRule::new(20);
    let g = |y: f64| k.value(x - y) * phi(y);
    rule.composite(0.0, x, 4, g) + rule.composite(x, k.half_width(), 4, g)
}

#[test]
fn eigenpairs_are_consistent() {
    for k in [PdKernel::exp(), PdKernel::triangle()] {
        let dec = discretize(&k, &NystromConfig::default()).unwrap();
        assert!(dec.orthonormality_defect(20) < 1e-10);
        for n in 0..5 {
            assert!(dec.eigen_residual(n) < 1e-12);
        }
        assert!(dec.eigenvalues().iter().all(|&l| l > -1e-12));
    }
}

#[test]
fn truncated_kernel_expansion_approaches_the_kernel() {
    let dec = discretize(&PdKernel::exp(), &NystromConfig::default()).unwrap();
    for (x, y) in [(0.2, 0.7), (0.5, 0.5), (0.05, 0.9)] {
        let r = dec.kernel_reconstruct(60, x, y).unwrap();
        assert!((r - (-(x - y).abs()).exp()).abs() < 1e-2, "({x}, {y}): {r}");
    }
    assert!(matches!(dec.kernel_reconstruct(1000, 0.1, 0.2), Err(Error::Rank { .. })));
}

#[test]
fn volterra_split_matches_direct_quadrature() {
    let n = 401;
    let grid = UniformGrid::new(0.0, 1.0, n);
    let phi = |x: f64| (3.0 * x).cos() + x * x;
    let f: Vec<f64> = grid.points().iter().map(|&x| phi(x)).collect();
    let k = PdKernel::exp();
    let exact: Vec<f64> = grid.points().iter().map(|&x| operator_oracle(&k, phi, x)).collect();
    let v = volterra_apply(&f).unwrap();
    let d = apply_operator(&k, &f);
    for approx in [&v, &d] {
        let err = approx.iter().zip(&exact).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
    }
    // The plain trapezoid Nyström product agrees at its own order.
    let dec = discretize(&k, &NystromConfig::with_nodes(n)).unwrap();
    let t = dec.apply(&f);
    let err = t.iter().zip(&exact).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    assert!(err < 1e-5, "{err}");
}

#[test]
fn greens_inverse_recovers_the_density() {
    let n = 801;
    let grid = UniformGrid::new(0.0, 1.0, n);
    let f: Vec<f64> =
        grid.points().iter().map(|&x| operator_oracle(&PdKernel::exp(), |y| (2.0 * y).sin() + 0.5, x)).collect();
    let elem = SampledElement::from_values(1.0, f.into_iter().map(|v| Complex64::new(v, 0.0)).collect()).unwrap();
    let g = greens_inverse_apply(&elem, &PdKernel::exp(), 1e-5).unwrap();
    assert!(!g.boundary_warning, "{:?}", g.boundary_residuals);
    for (x, p) in g.x.iter().zip(&g.phi) {
        assert!((p.re - ((2.0 * x).sin() + 0.5)).abs() < 1e-5, "x = {x}");
    }
    // A function outside the range of T_F trips the boundary warning.
    let bad = SampledElement::from_fn(1.0, 101, |x| Complex64::new(x, 0.0), |_| Complex64::new(1.0, 0.0)).unwrap();
    assert!(greens_inverse_apply(&bad, &PdKernel::exp(), 1e-6).unwrap().boundary_warning);
}

#[test]
fn triangle_green_inverse() {
    let n = 801;
    let a = 0.5;
    let grid = UniformGrid::new(0.0, a, n);
    let k = PdKernel::triangle();
    let f: Vec<f64> = grid.points().iter().map(|&x| operator_oracle(&k, |y| 1.0 + y, x)).collect();
    let elem = SampledElement::from_values(a, f.into_iter().map(|v| Complex64::new(v, 0.0)).collect()).unwrap();
    let g = greens_inverse_apply(&elem, &k, 1e-5).unwrap();
    assert!(!g.boundary_warning, "{:?}", g.boundary_residuals);
    for (x, p) in g.x.iter().zip(&g.phi) {
        assert!((p.re - (1.0 + x)).abs() < 1e-5, "x = {x}");
    }
}

#[test]
fn csv_export_has_full_precision() {
    let dec = discretize(&PdKernel::exp(), &NystromConfig::with_nodes(32)).unwrap();
    let mut buf = Vec::new();
    dec.write_eigenvalues_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(rows.len(), 32);
    assert_eq!(rows[0], dec.eigenvalues()[0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operator_is_positive(coefs in prop::collection::vec(-1.0f64..1.0, 1..6)) {
        let dec = discretize(&PdKernel::exp(), &NystromConfig::with_nodes(64)).unwrap();
        let f: Vec<f64> = dec.nodes().iter().map(|x| {
            coefs.iter().enumerate().map(|(j, c)| c * (j as f64 * 3.0 * x).cos()).sum()
        }).collect();
        let tf = dec.apply(&f);
        let q: f64 = (0..f.len()).map(|i| dec.weights()[i] * f[i] * tf[i]).sum();
        prop_assert!(q >= -1e-12);
    }
}
