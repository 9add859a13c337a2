use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pdkernel::{build_onb, discretize, expand, extend_type1, solve_theta_spectrum, Complex64, NystromConfig, PdKernel};

fn nystrom(c: &mut Criterion) {
    let mut g = c.benchmark_group("discretize");
    g.sample_size(10);
    for nodes in [400, 800] {
        g.bench_with_input(BenchmarkId::new("exp", nodes), &nodes, |b, &n| {
            b.iter(|| discretize(&PdKernel::exp(), &NystromConfig::with_nodes(n)).unwrap())
        });
    }
    g.finish();
}

fn theta_spectrum(c: &mut Criterion) {
    c.bench_function("solve_theta_spectrum N=100", |b| b.iter(|| solve_theta_spectrum(black_box(0.8), 100).unwrap()));
    let ext = extend_type1(0.8, 100).unwrap();
    let xs: Vec<f64> = (0..801).map(|i| -4.0 + i as f64 / 100.0).collect();
    c.bench_function("type-1 extension, 801 samples", |b| b.iter(|| ext.eval_batch(black_box(&xs))));
}

fn dyadic(c: &mut Criterion) {
    let k = PdKernel::exp();
    c.bench_function("expand e^x depth 14", |b| {
        b.iter(|| expand(|x| Complex64::new(x.exp(), 0.0), &k, black_box(14)).unwrap())
    });
    c.bench_function("build_onb depth 10", |b| b.iter(|| build_onb(&k, black_box(10)).unwrap()));
}

criterion_group!(benches, nystrom, theta_spectrum, dyadic);
criterion_main!(benches);
