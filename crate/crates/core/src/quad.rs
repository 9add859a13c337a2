//! Quadrature, interpolation and finite differences on intervals.
//!
//! Kernel integrals are done with composite Gauss–Legendre panels; the
//! callers split panels at the kernel kink so each panel sees a smooth
//! integrand. Sampled functions live on uniform grids and are integrated
//! with Gregory end-corrected weights (exact for quintics).

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Values that can be accumulated by a quadrature rule.
pub trait Scalar: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}
impl<T> Scalar for T where T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// n-point rule; nodes by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(&t, &w)| (c + h * t, h * w))
    }

    pub fn integrate<T: Scalar>(&self, a: f64, b: f64, f: impl Fn(f64) -> T) -> T {
        let mut s = T::default();
        for (x, w) in self.mapped(a, b) {
            s = s + f(x) * w;
        }
        s
    }

    /// Composite rule over `cells` equal panels of [a, b].
    pub fn composite<T: Scalar>(&self, a: f64, b: f64, cells: usize, f: impl Fn(f64) -> T) -> T {
        let h = (b - a) / cells as f64;
        let mut s = T::default();
        for c in 0..cells {
            let lo = a + c as f64 * h;
            s = s + self.integrate(lo, lo + h, &f);
        }
        s
    }

    /// Composite rule over [a, b] whose panel boundaries include every point
    /// of `breaks` that lies strictly inside (a, b).
    pub fn composite_split<T: Scalar>(&self, a: f64, b: f64, cells: usize, breaks: &[f64], f: impl Fn(f64) -> T) -> T {
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        cuts.push(a);
        cuts.push(b);
        cuts.sort_by(|p, q| p.total_cmp(q));
        let mut s = T::default();
        for seg in cuts.windows(2) {
            let len = seg[1] - seg[0];
            if len <= 0.0 {
                continue;
            }
            let k = ((len / (b - a)) * cells as f64).ceil().max(1.0) as usize;
            s = s + self.composite(seg[0], seg[1], k, &f);
        }
        s
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Uniform grid of `n` points on [lo, hi], endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        assert!(n >= 2 && hi > lo, "grid needs two points and positive length");
        UniformGrid { lo, hi, n }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Cell index and local coordinate in [0, 1] for x, clamped to the grid.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let s = ((x - self.lo) / self.step()).clamp(0.0, (self.n - 1) as f64);
        let i = (s.floor() as usize).min(self.n - 2);
        (i, s - i as f64)
    }

    /// Quadrature weights for the grid, see [`uniform_weights`].
    pub fn weights(&self) -> Vec<f64> {
        uniform_weights(self.n, self.step())
    }
}

const GREGORY_END: [f64; 5] = [95.0 / 288.0, 317.0 / 240.0, 23.0 / 30.0, 793.0 / 720.0, 157.0 / 160.0];

/// Weights for integrating samples on a uniform grid of `n` points, step `h`.
///
/// Gregory end corrections (O(h^6)) for n >= 10, Simpson or Simpson+3/8 for
/// smaller odd/even counts, trapezoid for n = 2.
pub fn uniform_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2);
    let mut w = vec![1.0; n];
    if n >= 10 {
        for (i, &g) in GREGORY_END.iter().enumerate() {
            w[i] = g;
            w[n - 1 - i] = g;
        }
    } else if n == 2 {
        w = vec![0.5, 0.5];
    } else {
        w = vec![0.0; n];
        let cells = n - 1;
        let simpson_cells = if cells.is_multiple_of(2) { cells } else { cells - 3 };
        let mut i = 0;
        while i < simpson_cells {
            w[i] += 1.0 / 3.0;
            w[i + 1] += 4.0 / 3.0;
            w[i + 2] += 1.0 / 3.0;
            i += 2;
        }
        if simpson_cells < cells {
            let s = simpson_cells;
            for (j, c) in [3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0].iter().enumerate() {
                w[s + j] += c;
            }
        }
    }
    w.iter_mut().for_each(|v| *v *= h);
    w
}

/// Integral of samples on a uniform grid.
pub fn integrate_samples<T: Scalar>(grid: &UniformGrid, values: &[T]) -> T {
    let w = grid.weights();
    values.iter().zip(&w).fold(T::default(), |s, (&v, &wi)| s + v * wi)
}

/// First derivative by fourth-order differences; one-sided five-point
/// stencils at the two ends of the grid.
pub fn derivative4<T: Scalar>(values: &[T], h: f64) -> Vec<T> {
    let n = values.len();
    assert!(n >= 5, "fourth-order differences need five samples");
    let v = values;
    let mut d = vec![T::default(); n];
    let inv = 1.0 / (12.0 * h);
    for i in 2..n - 2 {
        d[i] = (v[i - 2] - v[i + 2] + (v[i + 1] - v[i - 1]) * 8.0) * inv;
    }
    d[0] = (v[1] * 48.0 + v[3] * 16.0 - v[0] * 25.0 - v[2] * 36.0 - v[4] * 3.0) * inv;
    d[1] = (v[2] * 18.0 + v[4] * 1.0 - v[0] * 3.0 - v[1] * 10.0 - v[3] * 6.0) * inv;
    d[n - 1] = (v[n - 1] * 25.0 + v[n - 3] * 36.0 + v[n - 5] * 3.0 - v[n - 2] * 48.0 - v[n - 4] * 16.0) * inv;
    d[n - 2] = (v[n - 1] * 3.0 + v[n - 2] * 10.0 + v[n - 4] * 6.0 - v[n - 3] * 18.0 - v[n - 5] * 1.0) * inv;
    d
}

/// Second derivative by the five-point central stencil. Entries within two
/// cells of either end are left as `None`.
pub fn second_derivative4<T: Scalar>(values: &[T], h: f64) -> Vec<Option<T>> {
    let n = values.len();
    let v = values;
    let inv = 1.0 / (12.0 * h * h);
    (0..n)
        .map(|i| {
            if i < 2 || i + 2 >= n {
                None
            } else {
                Some(((v[i - 1] + v[i + 1]) * 16.0 - (v[i - 2] + v[i + 2]) - v[i] * 30.0) * inv)
            }
        })
        .collect()
}

/// Local cubic (four-point Lagrange) interpolation of grid samples.
pub fn cubic_interp<T: Scalar>(grid: &UniformGrid, values: &[T], x: f64) -> T {
    let n = grid.n;
    if n < 4 {
        let (i, t) = grid.locate(x);
        return values[i] * (1.0 - t) + values[i + 1] * t;
    }
    let (i, t) = grid.locate(x);
    let start = i.saturating_sub(1).min(n - 4);
    let s = t + (i - start) as f64;
    let l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
    let l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
    let l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
    let l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
    values[start] * l0 + values[start + 1] * l1 + values[start + 2] * l2 + values[start + 3] * l3
}

/// Cubic Hermite interpolation from values and first derivatives.
pub fn hermite_interp(grid: &UniformGrid, values: &[Complex64], derivs: &[Complex64], x: f64) -> Complex64 {
    let (i, t) = grid.locate(x);
    let h = grid.step();
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    values[i] * h00 + derivs[i] * (h10 * h) + values[i + 1] * h01 + derivs[i + 1] * (h11 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_for_high_degree() {
        let g = GaussRule::new(8);
        let v = g.integrate(0.0, 1.0, |x: f64| x.powi(15));
        assert!((v - 1.0 / 16.0).abs() < 1e-15);
        assert!((g.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gregory_weights_integrate_quintics() {
        for n in [10, 11, 57, 2000] {
            let g = UniformGrid::new(0.0, 1.0, n);
            let v: Vec<f64> = g.points().iter().map(|x| x.powi(5) - 2.0 * x * x).collect();
            let s = integrate_samples(&g, &v);
            assert!((s - (1.0 / 6.0 - 2.0 / 3.0)).abs() < 1e-13, "n = {n}");
        }
        for n in [3, 4, 5, 8, 9] {
            let g = UniformGrid::new(0.0, 2.0, n);
            let v: Vec<f64> = g.points().iter().map(|x| x * x * x).collect();
            assert!((integrate_samples(&g, &v) - 4.0).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn derivative_stencils_are_fourth_order_exact() {
        let g = UniformGrid::new(0.0, 1.0, 21);
        let v: Vec<f64> = g.points().iter().map(|x| x.powi(4)).collect();
        let d = derivative4(&v, g.step());
        for (i, x) in g.points().iter().enumerate() {
            assert!((d[i] - 4.0 * x.powi(3)).abs() < 1e-11, "i = {i}");
        }
        let d2 = second_derivative4(&v, g.step());
        for (i, x) in g.points().iter().enumerate() {
            if let Some(v) = d2[i] {
                assert!((v - 12.0 * x * x).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cubic_interp_reproduces_cubics() {
        let g = UniformGrid::new(-1.0, 2.0, 13);
        let v: Vec<f64> = g.points().iter().map(|x| x * x * x - x).collect();
        for x in [-1.0, -0.93, 0.11, 1.999, 2.0] {
            assert!((cubic_interp(&g, &v, x) - (x * x * x - x)).abs() < 1e-12);
        }
    }

    #[test]
    fn split_composite_handles_kink() {
        let g = GaussRule::new(6);
        let v = g.composite_split(0.0, 1.0, 4, &[0.3], |y: f64| (-(0.3f64 - y).abs()).exp());
        let exact = 2.0 - (-0.3f64).exp() - (-0.7f64).exp();
        assert!((v - exact).abs() < 1e-14);
    }
}
