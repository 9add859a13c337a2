//! Self-adjoint extensions of the derivative operator for e^{−|x|} on (−1, 1):
//! defect vectors, the spectra Λ_θ, type-1 and type-2 positive definite
//! extensions to ℝ, the unitary group, and the discrete isometry test.

use std::f64::consts::{E, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dyadic::{expand, membership_by_coefficients, parseval_norm};
use crate::error::{Error, Result};
use crate::kernel::{PdKernel, SpectralMeasure, TailDescriptor, EPS_PSD};
use crate::quad::GaussRule;
use crate::rkhs::{exp_inner_product, SampledElement, TestFunction, Verdict};
use crate::roots::{bisect, newton_polish};
use crate::special::shifted_square_tail;

const TAU: f64 = 2.0 * PI;

/// Solutions of D*ξ = ±ξ sampled on [0, a], with their squared H_F norms from
/// dyadic Parseval sums.
#[derive(Debug, Clone, Serialize)]
pub struct DefectPair {
    /// e^{−x}.
    #[serde(skip)]
    pub plus: SampledElement,
    /// e^{x−a}.
    #[serde(skip)]
    pub minus: SampledElement,
    /// Squared norms of e^{−x} and e^{x−a}.
    pub norms_sq: (f64, f64),
    /// ‖e^x‖², the unscaled growing solution.
    pub growing_norm_sq: f64,
    pub verdicts: (Verdict, Verdict),
    /// (1, 1) when both vectors lie in H_F, (0, 0) when either is out.
    pub indices: Option<(u8, u8)>,
    pub depth: u32,
}

pub fn defect_vectors(kernel: &PdKernel, depth: u32) -> Result<DefectPair> {
    let a = kernel.half_width();
    let decay = |x: f64| Complex64::new((-x).exp(), 0.0);
    let rise = move |x: f64| Complex64::new((x - a).exp(), 0.0);
    let growing = |x: f64| Complex64::new(x.exp(), 0.0);
    let n_plus = parseval_norm(&expand(decay, kernel, depth)?);
    let n_minus = parseval_norm(&expand(rise, kernel, depth)?);
    let n_grow = parseval_norm(&expand(growing, kernel, depth)?);
    let v_plus = membership_by_coefficients(decay, kernel, depth)?.verdict;
    let v_minus = membership_by_coefficients(rise, kernel, depth)?.verdict;
    let indices = match (v_plus, v_minus) {
        (Verdict::In, Verdict::In) => Some((1, 1)),
        (Verdict::Out, _) | (_, Verdict::Out) => Some((0, 0)),
        _ => None,
    };
    let plus = SampledElement::from_fn(a, 201, decay, |x| -decay(x))?;
    let minus = SampledElement::from_fn(a, 201, rise, rise)?;
    Ok(DefectPair {
        plus,
        minus,
        norms_sq: (n_plus, n_minus),
        growing_norm_sq: n_grow,
        verdicts: (v_plus, v_minus),
        indices,
        depth,
    })
}

/// θ mod 2π in [0, 2π).
pub fn reduce_theta(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// |e^{iλ}(1 + iλ) − e^{iθ}(1 − iλ)|.
pub fn theta_residual(theta: f64, lambda: f64) -> f64 {
    let il = Complex64::new(0.0, lambda);
    (Complex64::from_polar(1.0, lambda) * (1.0 + il) - Complex64::from_polar(1.0, theta) * (1.0 - il)).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaRoot {
    pub n: i64,
    pub lambda: f64,
    pub residual: f64,
}

/// Λ_θ for branches n ∈ [−N, N], sorted by n (equivalently by λ).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaSpectrum {
    pub theta: f64,
    pub roots: Vec<ThetaRoot>,
    pub tail_bound: f64,
    #[serde(skip)]
    truncation: usize,
    #[serde(skip)]
    requested_theta: f64,
}

impl ThetaSpectrum {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// True when the caller's θ was outside [0, 2π).
    pub fn was_reduced(&self) -> bool {
        self.requested_theta != self.theta
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn roots(&self) -> &[ThetaRoot] {
        &self.roots
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.lambda).collect()
    }

    pub fn get(&self, n: i64) -> Option<&ThetaRoot> {
        self.roots.iter().find(|r| r.n == n)
    }

    pub fn max_residual(&self) -> f64 {
        self.roots.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Upper bound on Σ_{|n|>N} 2/(λ_n² + 3) from the branch windows
/// λ_n ∈ (θ + (2n−1)π, θ + (2n+1)π).
pub fn type_one_tail_bound(theta: f64, big_n: usize) -> Result<f64> {
    if big_n < 1 {
        return Err(Error::Invalid("tail bound needs N ≥ 1".into()));
    }
    let theta = reduce_theta(theta);
    let n = big_n as u64;
    let pos = shifted_square_tail(n, (theta - PI) / TAU);
    let neg = shifted_square_tail(n, -(theta + PI) / TAU);
    Ok((pos + neg) / (2.0 * PI * PI))
}

/// Solves λ + 2 arctan λ = θ + 2nπ for |n| ≤ N, the phase form of
/// e^{iλ}(1 + iλ) = e^{iθ}(1 − iλ). Each branch has exactly one root, in
/// the window (θ + (2n−1)π, θ + (2n+1)π).
pub fn solve_theta_spectrum(theta: f64, big_n: usize) -> Result<ThetaSpectrum> {
    if !theta.is_finite() {
        return Err(Error::Domain("θ must be finite".into()));
    }
    let requested_theta = theta;
    let theta = reduce_theta(theta);
    let n = big_n as i64;
    let mut roots = Vec::with_capacity(2 * big_n + 1);
    for k in -n..=n {
        let target = theta + TAU * k as f64;
        let g = |l: f64| l + 2.0 * l.atan() - target;
        let dg = |l: f64| 1.0 + 2.0 / (1.0 + l * l);
        let (lo, hi) = (target - PI, target + PI);
        let x0 = bisect(g, lo, hi, &format!("branch n = {k}"))?;
        let lambda = newton_polish(g, dg, x0, lo, hi);
        roots.push(ThetaRoot { n: k, lambda, residual: theta_residual(theta, lambda) });
    }
    let tail_bound = if big_n >= 1 { type_one_tail_bound(theta, big_n)? } else { f64::NAN };
    Ok(ThetaSpectrum { theta, roots, tail_bound, truncation: big_n, requested_theta })
}

/// F̃_θ(x) = Σ_{|n|≤N} 2/(λ_n² + 3) e^{iλ_n x}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeOneExtension {
    pub theta: f64,
    /// (λ_n, 2/(λ_n² + 3)).
    pub atoms: Vec<(f64, f64)>,
    pub truncation: usize,
    pub tail_bound: f64,
}

pub fn extend_type1(theta: f64, big_n: usize) -> Result<TypeOneExtension> {
    let spec = solve_theta_spectrum(theta, big_n.max(1))?;
    Ok(type1_from_spectrum(&spec))
}

pub fn type1_from_spectrum(spec: &ThetaSpectrum) -> TypeOneExtension {
    TypeOneExtension {
        theta: spec.theta,
        atoms: spec.roots.iter().map(|r| (r.lambda, 2.0 / (r.lambda * r.lambda + 3.0))).collect(),
        truncation: spec.truncation,
        tail_bound: spec.tail_bound,
    }
}

impl TypeOneExtension {
    pub fn eval(&self, x: f64) -> Complex64 {
        self.atoms.iter().map(|&(l, w)| Complex64::from_polar(w, l * x)).sum()
    }

    pub fn eval_batch(&self, xs: &[f64]) -> Vec<Complex64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// sup over `samples` evenly spaced |x| ≤ xmax of |F̃_θ(x) − e^{−|x|}|.
    pub fn restriction_error(&self, xmax: f64, samples: usize) -> f64 {
        sup_gap(|x| self.eval(x), xmax, samples)
    }

    /// Same comparison on 1 ≤ |x| ≤ xmax, i.e. against the trivial extension.
    pub fn trivial_extension_gap(&self, xmax: f64, samples: usize) -> f64 {
        let samples = samples.max(2);
        (0..samples)
            .map(|i| 1.0 + (xmax - 1.0) * i as f64 / (samples - 1) as f64)
            .map(|x| (self.eval(x) - (-x).exp()).norm())
            .fold(0.0, f64::max)
    }

    pub fn measure(&self) -> Result<SpectralMeasure> {
        extension_measure(self)
    }
}

fn sup_gap(f: impl Fn(f64) -> Complex64, xmax: f64, samples: usize) -> f64 {
    let samples = samples.max(2);
    (0..samples)
        .map(|i| -xmax + 2.0 * xmax * i as f64 / (samples - 1) as f64)
        .map(|x| (f(x) - (-x.abs()).exp()).norm())
        .fold(0.0, f64::max)
}

/// The atomic measure Σ 2δ_{λ_n}/(λ_n² + 3).
pub fn extension_measure(ext: &TypeOneExtension) -> Result<SpectralMeasure> {
    SpectralMeasure::atomic(ext.atoms.clone())
}

/// φ̂(λ) = ∫₀¹ φ(y) e^{−iλy} dy.
pub fn fourier_on_unit(phi: &TestFunction, lambda: f64) -> Complex64 {
    let g = phi.grid();
    let rule = GaussRule::new(8);
    let mut s = Complex64::ZERO;
    for c in 0..g.n - 1 {
        s += rule.integrate(g.x(c), g.x(c + 1), |y| Complex64::from_polar(phi.eval(y), -lambda * y));
    }
    s
}

/// 2 Σ φ̂(λ_n)/(λ_n² + 3) e^{iλ_n x}, which converges to (T_F φ)(x).
pub fn sample_via_spectrum(phi: &TestFunction, ext: &TypeOneExtension, x: f64) -> Result<Complex64> {
    if (phi.half_width() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("test function must live on [0, 1]".into()));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x = {x} outside (0, 1)")));
    }
    Ok(ext.atoms.iter().map(|&(l, w)| w * fourier_on_unit(phi, l) * Complex64::from_polar(1.0, l * x)).sum())
}

/// G_r(x) = e^{−|x|} on [−1, 1] and e^{−1} e^{r(1−|x|)} beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeTwoExtension {
    pub r: f64,
}

pub fn g_r_extension(r: f64) -> Result<TypeTwoExtension> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("r = {r} outside [0, 1]")));
    }
    Ok(TypeTwoExtension { r })
}

impl TypeTwoExtension {
    pub fn eval(&self, x: f64) -> f64 {
        let u = x.abs();
        if u <= 1.0 {
            (-u).exp()
        } else {
            (-1.0f64).exp() * (self.r * (1.0 - u)).exp()
        }
    }

    pub fn eval_batch(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// Ĝ_r(λ) = ∫ G_r(x) e^{−iλx} dx without the atom at 0 that appears for
    /// r = 0.
    pub fn transform(&self, lambda: f64) -> f64 {
        let il = Complex64::new(0.0, lambda);
        let inner = 2.0 * ((1.0 - Complex64::from_polar(1.0 / E, -lambda)) / (1.0 + il)).re;
        let outer = if self.r > 0.0 {
            2.0 / E * (Complex64::from_polar(1.0, lambda) / (self.r - il)).re
        } else if lambda.abs() < 1e-6 {
            -2.0 / E * (1.0 - lambda * lambda / 6.0)
        } else {
            -2.0 / E * lambda.sin() / lambda
        };
        inner + outer
    }

    /// ĝ_r = Ĝ_r / 2π.
    pub fn density(&self, lambda: f64) -> f64 {
        self.transform(lambda) / TAU
    }

    /// Mass of the atom at λ = 0 (e^{−1} for r = 0, else 0).
    pub fn atom_mass(&self) -> f64 {
        if self.r == 0.0 {
            1.0 / E
        } else {
            0.0
        }
    }

    /// ĝ_r on [−2000, 2000] with a 1/(πλ²) tail. Negative samples, if any,
    /// are clamped to 0 here; use [`positivity_scan`](Self::positivity_scan)
    /// to see them.
    pub fn spectral_measure(&self) -> Result<SpectralMeasure> {
        let step = if self.r > 0.0 { (self.r / 20.0).min(0.02) } else { 0.02 };
        let range = 2000.0;
        let m = SpectralMeasure::from_density(
            |l| self.density(l).max(0.0),
            range,
            step,
            Some(TailDescriptor { exponent: 2.0, coeff: 1.0 / PI }),
        );
        let atoms = if self.r == 0.0 { vec![(0.0, self.atom_mass())] } else { Vec::new() };
        SpectralMeasure::new(m.grid, m.density, atoms, m.tail)
    }

    /// Smallest ĝ_r over `samples` points of [0, range] (ĝ_r is even).
    pub fn positivity_scan(&self, range: f64, samples: usize) -> f64 {
        let samples = samples.max(2);
        (0..samples).map(|i| self.density(range * i as f64 / (samples - 1) as f64)).fold(f64::INFINITY, f64::min)
    }

    /// sup_{|x|≤xmax} |∫ e^{iλx} ĝ_r dλ − e^{−|x|}|.
    pub fn reconstruction_error(&self, xmax: f64, samples: usize) -> Result<f64> {
        let m = self.spectral_measure()?;
        Ok(sup_gap(|x| m.bochner(x), xmax, samples))
    }
}

/// h = Σ a_n e_{λ_n} over a truncated Λ_θ, with ‖e_λ‖² = (λ² + 3)/2 and the
/// e_{λ_n} mutually orthogonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralExpansion {
    pub theta: f64,
    pub lambdas: Vec<f64>,
    pub coeffs: Vec<Complex64>,
}

fn e_norm_sq(l: f64) -> f64 {
    0.5 * (l * l + 3.0)
}

impl SpectralExpansion {
    /// a_n = ⟨e_n, h⟩ / ‖e_n‖² through the exponential-kernel inner product.
    pub fn from_element(h: &SampledElement, spec: &ThetaSpectrum) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(spec.roots.len());
        for r in &spec.roots {
            let e = crate::rkhs::e_lambda_sampled(r.lambda, h.values().len());
            coeffs.push(exp_inner_product(&e, h)? / e_norm_sq(r.lambda));
        }
        Ok(SpectralExpansion { theta: spec.theta, lambdas: spec.lambdas(), coeffs })
    }

    /// F₀ = e^{−x}, with a_n = 2/(λ_n² + 3).
    pub fn kernel_section_zero(spec: &ThetaSpectrum) -> Self {
        let lambdas = spec.lambdas();
        let coeffs = lambdas.iter().map(|&l| Complex64::new(1.0 / e_norm_sq(l), 0.0)).collect();
        SpectralExpansion { theta: spec.theta, lambdas, coeffs }
    }

    pub fn inner(&self, other: &SpectralExpansion) -> Result<Complex64> {
        if self.lambdas != other.lambdas {
            return Err(Error::Invalid("expansions use different spectra".into()));
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(&self.lambdas)
            .map(|((a, b), &l)| a.conj() * b * e_norm_sq(l))
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().zip(&self.lambdas).map(|(a, &l)| a.norm_sqr() * e_norm_sq(l)).sum::<f64>().sqrt()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.coeffs.iter().zip(&self.lambdas).map(|(a, &l)| a * Complex64::from_polar(1.0, l * x)).sum()
    }
}

/// U(t): a_n ↦ e^{iλ_n t} a_n.
pub fn unitary_evolve(h: &SpectralExpansion, t: f64) -> SpectralExpansion {
    let coeffs = h.coeffs.iter().zip(&h.lambdas).map(|(a, &l)| a * Complex64::from_polar(1.0, l * t)).collect();
    SpectralExpansion { theta: h.theta, lambdas: h.lambdas.clone(), coeffs }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryReport {
    pub passed: bool,
    pub trials: usize,
    pub max_relative_gap: f64,
    pub min_eigenvalue: f64,
    /// Coefficients with negative quadratic form when the Gram is not PSD.
    pub witness: Option<Vec<Complex64>>,
}

/// Compares Σ conj(c_j) c_k F(s_k − s_j) with ∫ |Σ c_k e^{i s_k λ}|² dμ for
/// random c. The sign convention matches F(x) = ∫ e^{iλx} dμ.
pub fn discrete_isometry_check(
    points: &[f64],
    f: impl Fn(f64) -> Complex64,
    mu: &SpectralMeasure,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<IsometryReport> {
    if points.is_empty() {
        return Err(Error::Invalid("point set is empty".into()));
    }
    let m = points.len();
    let gram = DMatrix::from_fn(m, m, |j, k| f(points[k] - points[j]));
    for j in 0..m {
        for k in 0..m {
            if (gram[(j, k)] - gram[(k, j)].conj()).norm() > 1e-12 * (1.0 + gram[(j, k)].norm()) {
                return Err(Error::Invalid("F values are not Hermitian on S − S".into()));
            }
        }
    }
    let eig = gram.clone().symmetric_eigen();
    let (imin, min_eigenvalue) =
        eig.eigenvalues.iter().copied().enumerate().fold((0, f64::INFINITY), |p, q| if q.1 < p.1 { q } else { p });
    if min_eigenvalue < -EPS_PSD {
        let witness = eig.eigenvectors.column(imin).iter().copied().collect();
        return Ok(IsometryReport {
            passed: false,
            trials: 0,
            max_relative_gap: f64::INFINITY,
            min_eigenvalue,
            witness: Some(witness),
        });
    }
    // Tail contributions are bilinear in c, so precompute them per pair.
    let tails = DMatrix::from_fn(m, m, |j, k| mu.tail_fourier(points[k] - points[j]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let c: Vec<Complex64> =
            (0..m).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let mut lhs = Complex64::ZERO;
        let mut tail = Complex64::ZERO;
        for j in 0..m {
            for k in 0..m {
                lhs += c[j].conj() * c[k] * gram[(j, k)];
                tail += c[j].conj() * c[k] * tails[(j, k)];
            }
        }
        let grid = mu.integrate_grid(|l| {
            let p: Complex64 = c.iter().zip(points).map(|(ck, &s)| ck * Complex64::from_polar(1.0, s * l)).sum();
            p.norm_sqr()
        });
        let rhs = grid + tail.re;
        let gap = (lhs.re - rhs).abs().max(lhs.im.abs()) / lhs.norm().max(1e-300);
        worst = worst.max(gap);
    }
    Ok(IsometryReport { passed: worst < tol, trials, max_relative_gap: worst, min_eigenvalue, witness: None })
}

/// |h(1) + h'(1) − e^{iθ}(h(0) − h'(0))|.
pub fn boundary_condition_check(h: &SampledElement, theta: f64) -> f64 {
    let b = h.boundary();
    (b.ha + b.dha - Complex64::from_polar(1.0, theta) * (b.h0 - b.dh0)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_theta_wraps() {
        assert!((reduce_theta(-1.0) - (TAU - 1.0)).abs() < 1e-15);
        assert_eq!(reduce_theta(0.0), 0.0);
        assert!(reduce_theta(TAU) < 1e-15);
    }

    #[test]
    fn theta_zero_has_root_at_zero() {
        let s = solve_theta_spectrum(0.0, 2).unwrap();
        assert!(s.get(0).unwrap().lambda.abs() < 1e-15);
        assert!(s.max_residual() < 1e-12);
    }

    #[test]
    fn tail_bound_dominates_direct_sum() {
        let theta = 0.8;
        let s = solve_theta_spectrum(theta, 4000).unwrap();
        let direct: f64 = s.roots.iter().filter(|r| r.n.abs() > 10).map(|r| 2.0 / (r.lambda * r.lambda + 3.0)).sum();
        let bound = type_one_tail_bound(theta, 10).unwrap();
        assert!(direct < bound);
        assert!(direct > 0.8 * bound);
    }

    #[test]
    fn g_r_transform_matches_quadrature() {
        let g = g_r_extension(0.5).unwrap();
        let rule = GaussRule::new(20);
        for &l in &[0.0, 0.7, 3.0] {
            let inner = rule.composite(0.0, 1.0, 8, |x| 2.0 * (-x).exp() * (l * x).cos());
            let outer = rule.composite(1.0, 80.0, 800, |x| 2.0 * g.eval(x) * (l * x).cos());
            assert!((inner + outer - g.transform(l)).abs() < 1e-10, "λ = {l}");
        }
    }
}
