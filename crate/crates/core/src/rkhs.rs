//! Elements of the reproducing kernel Hilbert space H_F and their inner products.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::ThetaSpectrum;
use crate::kernel::{cross_energy, KernelFamily, MeasureOnInterval, PdKernel};
use crate::mercer::MercerDecomposition;
use crate::quad::{cubic_interp, derivative4, hermite_interp, integrate_samples, UniformGrid};

/// Default number of grid nodes on [0, a] for sampled elements.
pub const DEFAULT_NODES: usize = 2000;

/// Three-way outcome of a numerical membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    In,
    Out,
    Indeterminate,
}

/// h(0), h'(0), h(a), h'(a).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub h0: Complex64,
    pub dh0: Complex64,
    pub ha: Complex64,
    pub dha: Complex64,
}

/// A function on [0, a] sampled on a uniform grid together with its derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledElement {
    a: f64,
    values: Vec<Complex64>,
    derivs: Vec<Complex64>,
}

impl SampledElement {
    pub fn new(a: f64, values: Vec<Complex64>, derivs: Vec<Complex64>) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Domain("interval length must be positive".into()));
        }
        if values.len() < 5 {
            return Err(Error::Invalid("sampled element needs at least five nodes".into()));
        }
        if derivs.len() != values.len() {
            return Err(Error::MissingDerivative);
        }
        Ok(SampledElement { a, values, derivs })
    }

    /// Derivatives by fourth-order differences.
    pub fn from_values(a: f64, values: Vec<Complex64>) -> Result<Self> {
        if values.len() < 5 {
            return Err(Error::Invalid("sampled element needs at least five nodes".into()));
        }
        let h = a / (values.len() - 1) as f64;
        let derivs = derivative4(&values, h);
        SampledElement::new(a, values, derivs)
    }

    pub fn from_fn(a: f64, n: usize, f: impl Fn(f64) -> Complex64, df: impl Fn(f64) -> Complex64) -> Result<Self> {
        let g = UniformGrid::new(0.0, a, n);
        let pts = g.points();
        SampledElement::new(a, pts.iter().map(|&x| f(x)).collect(), pts.iter().map(|&x| df(x)).collect())
    }

    pub fn half_width(&self) -> f64 {
        self.a
    }

    pub fn grid(&self) -> UniformGrid {
        UniformGrid::new(0.0, self.a, self.values.len())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn derivs(&self) -> &[Complex64] {
        &self.derivs
    }

    pub fn boundary(&self) -> BoundaryData {
        let n = self.values.len() - 1;
        BoundaryData { h0: self.values[0], dh0: self.derivs[0], ha: self.values[n], dha: self.derivs[n] }
    }

    /// Cubic Hermite interpolation of the stored values and derivatives.
    pub fn eval(&self, x: f64) -> Complex64 {
        hermite_interp(&self.grid(), &self.values, &self.derivs, x)
    }

    /// Max |h'_stored − h'_differenced| relative to max |h'|.
    pub fn derivative_consistency(&self) -> f64 {
        let fd = derivative4(&self.values, self.grid().step());
        let scale = self.derivs.iter().map(|d| d.norm()).fold(1e-300, f64::max);
        fd.iter().zip(&self.derivs).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max) / scale
    }

    /// ⟨h, k⟩ in L²(0, a).
    pub fn l2_inner(&self, other: &SampledElement) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let prod: Vec<Complex64> = self.values.iter().zip(&other.values).map(|(p, q)| p.conj() * q).collect();
        Ok(integrate_samples(&self.grid(), &prod))
    }

    /// ⟨h', k'⟩ in L²(0, a).
    pub fn l2_inner_derivative(&self, other: &SampledElement) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let prod: Vec<Complex64> = self.derivs.iter().zip(&other.derivs).map(|(p, q)| p.conj() * q).collect();
        Ok(integrate_samples(&self.grid(), &prod))
    }

    fn check_same_grid(&self, other: &SampledElement) -> Result<()> {
        if self.values.len() != other.values.len() || self.a != other.a {
            return Err(Error::Invalid("sampled elements live on different grids".into()));
        }
        Ok(())
    }
}

/// Smooth bump exp(−1/(1 − t²)), t = (x − center)/radius, with its first two
/// derivatives in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
}

impl Bump {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !center.is_finite() {
            return Err(Error::Invalid("bump radius must be positive".into()));
        }
        Ok(Bump { center, radius })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }

    /// (ψ, ψ', ψ'').
    pub fn eval_all(&self, x: f64) -> (f64, f64, f64) {
        let t = (x - self.center) / self.radius;
        if t.abs() >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let s = 1.0 - t * t;
        let v = (-1.0 / s).exp();
        // d/dt of −1/s is −2t/s².
        let g1 = -2.0 * t / (s * s);
        let g2 = -2.0 * (1.0 + 3.0 * t * t) / (s * s * s);
        let r = self.radius;
        (v, v * g1 / r, v * (g1 * g1 + g2) / (r * r))
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval_all(x).0
    }
}

/// A real test function on [0, a] sampled on a uniform grid; vanishes near both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    a: f64,
    values: Vec<f64>,
}

impl TestFunction {
    pub fn new(a: f64, values: Vec<f64>) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Domain("interval length must be positive".into()));
        }
        if values.len() < 5 {
            return Err(Error::Invalid("test function needs at least five samples".into()));
        }
        let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let n = values.len();
        let edge = values[..2].iter().chain(&values[n - 2..]).map(|v| v.abs()).fold(0.0, f64::max);
        if edge > 1e-12 * scale.max(1e-300) {
            return Err(Error::Domain("test function must vanish near both endpoints".into()));
        }
        Ok(TestFunction { a, values })
    }

    pub fn from_fn(a: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        TestFunction::new(a, UniformGrid::new(0.0, a, n).points().into_iter().map(f).collect())
    }

    pub fn from_bumps(a: f64, n: usize, bumps: &[(f64, Bump)]) -> Result<Self> {
        TestFunction::from_fn(a, n, |x| bumps.iter().map(|(c, b)| c * b.value(x)).sum())
    }

    /// Reads rows (y, φ(y)) on a uniform grid starting at y = 0.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_path(path)?;
        let mut ys = Vec::new();
        let mut vs = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let (Some(y), Some(v)) = (rec.get(0), rec.get(1)) else { continue };
            let (Ok(y), Ok(v)) = (y.trim().parse::<f64>(), v.trim().parse::<f64>()) else { continue };
            ys.push(y);
            vs.push(v);
        }
        if ys.len() < 5 || ys[0] != 0.0 {
            return Err(Error::Parse("test function CSV needs rows (y, phi) starting at y = 0".into()));
        }
        let h = ys[1] - ys[0];
        if ys.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
            return Err(Error::Parse("test function CSV must use a uniform grid".into()));
        }
        TestFunction::new(*ys.last().unwrap(), vs)
    }

    pub fn half_width(&self) -> f64 {
        self.a
    }

    pub fn grid(&self) -> UniformGrid {
        UniformGrid::new(0.0, self.a, self.values.len())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        cubic_interp(&self.grid(), &self.values, x)
    }

    /// φ' by fourth-order differences.
    pub fn derivative(&self) -> TestFunction {
        TestFunction { a: self.a, values: derivative4(&self.values, self.grid().step()) }
    }

    /// φ(y) dy as a measure on [0, a].
    pub fn measure(&self) -> MeasureOnInterval {
        MeasureOnInterval::from_samples(
            self.a,
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            Vec::new(),
        )
        .expect("validated test function")
    }
}

/// An element of H_F.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum RkhsElement {
    /// Σ c_j F(· − x_j), stored as (c_j, x_j).
    KernelCombo(Vec<(Complex64, f64)>),
    /// F_φ = ∫ φ(y) F(· − y) dy.
    Smoothed(TestFunction),
    Sampled(SampledElement),
}

impl RkhsElement {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_points(kernel: &PdKernel, combo: &[(Complex64, f64)]) -> Result<()> {
    let a = kernel.half_width();
    match combo.iter().find(|p| !(p.1 >= 0.0 && p.1 <= a)) {
        Some(p) => Err(Error::Domain(format!("point {} outside [0, {a}]", p.1))),
        None => Ok(()),
    }
}

fn check_interval(kernel: &PdKernel, a: f64) -> Result<()> {
    if a > kernel.half_width() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("interval [0, {a}] exceeds the kernel half width {}", kernel.half_width())));
    }
    Ok(())
}

/// Σ_i Σ_j conj(c_i) d_j F(x_i − y_j).
pub fn inner_product_combo(a: &[(Complex64, f64)], b: &[(Complex64, f64)], kernel: &PdKernel) -> Result<Complex64> {
    check_points(kernel, a)?;
    check_points(kernel, b)?;
    let mut s = Complex64::ZERO;
    for &(c, x) in a {
        for &(d, y) in b {
            s += c.conj() * d * kernel.value(x - y);
        }
    }
    Ok(s)
}

/// F_μ(x) = ∫ F(x − y) dμ(y) sampled on `nodes` points, with F_μ' from
/// ∫ F'(x − y) dμ(y).
pub fn element_from_measure(mu: &MeasureOnInterval, kernel: &PdKernel, nodes: usize) -> Result<SampledElement> {
    check_interval(kernel, mu.half_width())?;
    let grid = UniformGrid::new(0.0, mu.half_width(), nodes);
    let mut values = Vec::with_capacity(nodes);
    let mut derivs = Vec::with_capacity(nodes);
    for x in grid.points() {
        values.push(mu.convolve(|u| kernel.value(u), x));
        derivs.push(mu.convolve_derivative(|u, side| kernel.derivative_from(u, side), x));
    }
    SampledElement::new(mu.half_width(), values, derivs)
}

/// F_φ on `nodes` grid points; F_φ' = T_F φ' comes from ∫ φ(y) F'(x − y) dy.
pub fn smooth(phi: &TestFunction, kernel: &PdKernel, nodes: usize) -> Result<SampledElement> {
    element_from_measure(&phi.measure(), kernel, nodes)
}

/// ∬ φ(x) ψ(y) F(x − y) dx dy with φ conjugated.
pub fn inner_product_smoothed(phi: &TestFunction, psi: &TestFunction, kernel: &PdKernel) -> Result<Complex64> {
    check_interval(kernel, phi.half_width())?;
    check_interval(kernel, psi.half_width())?;
    Ok(cross_energy(&phi.measure(), &psi.measure(), |u| kernel.value(u)))
}

/// ⟨F(· − x), ξ⟩ = ξ(x).
pub fn reproducing_eval(xi: &RkhsElement, x: f64, kernel: &PdKernel) -> Result<Complex64> {
    let a = kernel.half_width();
    if !(x >= 0.0 && x <= a) {
        return Err(Error::Domain(format!("x = {x} outside [0, {a}]")));
    }
    match xi {
        RkhsElement::KernelCombo(c) => inner_product_combo(&[(Complex64::ONE, x)], c, kernel),
        RkhsElement::Smoothed(phi) => {
            check_interval(kernel, phi.half_width())?;
            Ok(phi.measure().convolve(|u| kernel.value(u), x))
        }
        RkhsElement::Sampled(s) => {
            if x > s.half_width() {
                return Err(Error::Domain(format!("x = {x} outside the sampled range")));
            }
            Ok(s.eval(x))
        }
    }
}

/// Estimates of sup_φ |∫φh|² / ‖F_φ‖² over the span of the top m, 2m, 4m
/// Mercer eigenfunctions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub basis_sizes: [usize; 3],
    pub estimates: [f64; 3],
    pub verdict: Verdict,
    pub bound: f64,
}

/// Membership of h in H_F from the growth of A_m = Σ_{n≤m} |⟨ξ_n, h⟩|²/λ_n.
///
/// "in" when A_m, A_2m, A_4m agree to 5%; "out" when the increments do not
/// shrink ((A_4m − A_2m) ≥ 0.9 (A_2m − A_m)) or A grows more than tenfold.
pub fn membership_test(h: impl Fn(f64) -> Complex64, dec: &MercerDecomposition, m: usize) -> Result<MembershipReport> {
    if m == 0 {
        return Err(Error::Invalid("basis size must be positive".into()));
    }
    let coeffs = dec.coefficients(&h, 4 * m)?;
    let partial = |k: usize| -> f64 { (0..k).map(|n| coeffs[n].norm_sqr() / dec.eigenvalues()[n]).sum() };
    let est = [partial(m), partial(2 * m), partial(4 * m)];
    let top = est[2].max(1e-300);
    let verdict = if (est[2] - est[0]).abs() < 0.05 * top {
        Verdict::In
    } else if est[2] > 10.0 * est[0].max(1e-300) || (est[2] - est[1]) >= 0.9 * (est[1] - est[0]) {
        Verdict::Out
    } else {
        Verdict::Indeterminate
    };
    Ok(MembershipReport { basis_sizes: [m, 2 * m, 4 * m], estimates: est, verdict, bound: est[2] })
}

/// ½(⟨h,k⟩ + ⟨h',k'⟩) + ½(conj h(0) k(0) + conj h(1) k(1)): the H_F inner
/// product of the exponential kernel on [0, 1].
pub fn exp_inner_product(h: &SampledElement, k: &SampledElement) -> Result<Complex64> {
    if (h.half_width() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("the Sobolev form is for e^{-|x|} on [0, 1]".into()));
    }
    let (bh, bk) = (h.boundary(), k.boundary());
    Ok(0.5 * (h.l2_inner(k)? + h.l2_inner_derivative(k)?) + 0.5 * (bh.h0.conj() * bk.h0 + bh.ha.conj() * bk.ha))
}

/// e_λ(x) = e^{iλx} on [0, 1] with its exact derivative.
pub fn e_lambda_sampled(lambda: f64, nodes: usize) -> SampledElement {
    SampledElement::from_fn(
        1.0,
        nodes,
        |x| Complex64::from_polar(1.0, lambda * x),
        |x| Complex64::new(0.0, lambda) * Complex64::from_polar(1.0, lambda * x),
    )
    .expect("valid grid")
}

/// dμ_λ = ½(1+λ²) e_λ dy + ½((1 − iλ)δ₀ + (1 + iλ)e^{iλ}δ₁), whose
/// F-transform under e^{−|x|} is e_λ.
pub fn e_lambda_measure(lambda: f64, nodes: usize) -> Result<MeasureOnInterval> {
    let c = 0.5 * (1.0 + lambda * lambda);
    let il = Complex64::new(0.0, lambda);
    MeasureOnInterval::from_density(
        1.0,
        nodes,
        |y| c * Complex64::from_polar(1.0, lambda * y),
        vec![(0.0, 0.5 * (1.0 - il)), (1.0, 0.5 * (1.0 + il) * Complex64::from_polar(1.0, lambda))],
    )
}

/// dμ_h = Σ_{|n|≤N} ⟨e_n, h⟩/‖e_n‖² dμ_n for the exponential kernel.
pub fn element_measure_expansion(
    h: &SampledElement,
    spectrum: &ThetaSpectrum,
    truncation: usize,
    nodes: usize,
) -> Result<MeasureOnInterval> {
    let mut terms = Vec::new();
    for root in spectrum.roots().iter().filter(|r| r.n.unsigned_abs() as usize <= truncation) {
        let e = e_lambda_sampled(root.lambda, h.values().len());
        let norm_sq = 0.5 * (root.lambda * root.lambda + 3.0);
        terms.push((root.lambda, exp_inner_product(&e, h)? / norm_sq));
    }
    let density = |y: f64| -> Complex64 {
        terms.iter().map(|&(l, c)| c * 0.5 * (1.0 + l * l) * Complex64::from_polar(1.0, l * y)).sum()
    };
    let (mut w0, mut w1) = (Complex64::ZERO, Complex64::ZERO);
    for &(l, c) in &terms {
        let il = Complex64::new(0.0, l);
        w0 += c * 0.5 * (1.0 - il);
        w1 += c * 0.5 * (1.0 + il) * Complex64::from_polar(1.0, l);
    }
    MeasureOnInterval::from_density(1.0, nodes, density, vec![(0.0, w0), (1.0, w1)])
}

/// Requires the exponential kernel on [0, 1].
pub fn require_exp(kernel: &PdKernel) -> Result<()> {
    if kernel.family() != KernelFamily::Exp || (kernel.half_width() - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(format!("operation needs e^(-|x|) on (-1, 1), got {}", kernel.name())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_derivatives_match_differences() {
        let b = Bump::new(0.4, 0.2).unwrap();
        let h = 1e-5;
        for &x in &[0.3, 0.41, 0.55] {
            let (_, d1, d2) = b.eval_all(x);
            let fd1 = (b.value(x + h) - b.value(x - h)) / (2.0 * h);
            let fd2 = (b.value(x + h) - 2.0 * b.value(x) + b.value(x - h)) / (h * h);
            assert!((d1 - fd1).abs() < 1e-6 * d1.abs().max(1.0));
            assert!((d2 - fd2).abs() < 1e-3 * d2.abs().max(1.0));
        }
    }

    #[test]
    fn combo_inner_product_is_kernel_value() {
        let k = PdKernel::exp();
        let v = inner_product_combo(&[(Complex64::ONE, 0.2)], &[(Complex64::ONE, 0.7)], &k).unwrap();
        assert!((v.re - (-0.5f64).exp()).abs() < 1e-15);
        assert!(inner_product_combo(&[(Complex64::ONE, 1.2)], &[], &k).is_err());
    }

    #[test]
    fn test_function_must_vanish_at_ends() {
        assert!(TestFunction::from_fn(1.0, 101, |x| x).is_err());
        assert!(TestFunction::from_fn(1.0, 101, |x| Bump { center: 0.5, radius: 0.3 }.value(x)).is_ok());
    }

    #[test]
    fn element_json_round_trip() {
        let e = RkhsElement::KernelCombo(vec![(Complex64::new(1.0, -2.0), 0.25)]);
        assert_eq!(RkhsElement::from_json(&e.to_json().unwrap()).unwrap(), e);
    }
}
