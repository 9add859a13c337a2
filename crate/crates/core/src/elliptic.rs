//! Boundary-value view of T_F⁻¹ for the two model kernels: transcendental
//! eigenvalue equations, boundary functionals, distributional second
//! derivatives, ellipticity estimates and the B-spline derivative bound.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{bspline_density, bspline_kernel, KernelFamily, PdKernel};
use crate::mercer::MercerDecomposition;
use crate::quad::GaussRule;
use crate::rkhs::{inner_product_smoothed, Bump, SampledElement, TestFunction};
use crate::roots::{bisect, newton_polish};

/// Eigenvalue equations of T_F with their boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TranscendentalSpec {
    /// tan k = 2k/(k² − 1), k² > 1; λ = 2/(1 + k²). Kernel e^{−|x|} on (0, 1).
    ExpBvp,
    /// tan(k/2) = 4/(3k); λ = 2/k². Kernel 1 − |x| on (0, ½), equation as
    /// usually quoted.
    TriangleBvp,
    /// The full determinant for 1 − |x| on (0, ½):
    /// cos(k/4)·(3k sin(k/4) − 4 cos(k/4)) = 0; λ = 2/k².
    TriangleRederived,
}

impl TranscendentalSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exp" | "exp-bvp" => Ok(TranscendentalSpec::ExpBvp),
            "triangle" | "triangle-bvp" => Ok(TranscendentalSpec::TriangleBvp),
            "triangle-rederived" => Ok(TranscendentalSpec::TriangleRederived),
            _ => Err(Error::Parse(format!("unknown equation {s:?}"))),
        }
    }

    /// Kernel whose Mercer operator the equation describes.
    pub fn kernel(&self) -> PdKernel {
        match self {
            TranscendentalSpec::ExpBvp => PdKernel::exp(),
            _ => PdKernel::triangle(),
        }
    }

    /// Residual cleared of tan poles and scaled to stay O(1).
    pub fn residual(&self, k: f64) -> f64 {
        match self {
            TranscendentalSpec::ExpBvp => (k.sin() * (k * k - 1.0) - 2.0 * k * k.cos()) / (k * k + 1.0),
            TranscendentalSpec::TriangleBvp => (3.0 * k * (0.5 * k).sin() - 4.0 * (0.5 * k).cos()) / (3.0 * k + 4.0),
            TranscendentalSpec::TriangleRederived => (0.25 * k).cos() * quarter_factor(k),
        }
    }

    pub fn mercer_map(&self, k: f64) -> f64 {
        match self {
            TranscendentalSpec::ExpBvp => 2.0 / (1.0 + k * k),
            _ => 2.0 / (k * k),
        }
    }
}

fn quarter_factor(k: f64) -> f64 {
    (3.0 * k * (0.25 * k).sin() - 4.0 * (0.25 * k).cos()) / (3.0 * k + 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TranscendentalRoot {
    pub index: usize,
    pub k: f64,
    pub eigenvalue: f64,
    pub residual: f64,
}

fn polish(f: impl Fn(f64) -> f64 + Copy, lo: f64, hi: f64, label: &str) -> Result<f64> {
    let x = bisect(f, lo, hi, label)?;
    let h = 1e-7 * x.abs().max(1.0);
    Ok(newton_polish(f, |t| (f(t + h) - f(t - h)) / (2.0 * h), x, lo, hi))
}

/// The first `count` positive roots, ascending.
pub fn solve_transcendental(spec: TranscendentalSpec, count: usize) -> Result<Vec<TranscendentalRoot>> {
    if count == 0 {
        return Err(Error::Invalid("need at least one root".into()));
    }
    let mut ks = Vec::with_capacity(count);
    match spec {
        TranscendentalSpec::ExpBvp => {
            let f = |k: f64| spec.residual(k);
            ks.push(polish(f, 1.0, 0.5 * PI, "exp window 1")?);
            for m in 1..count {
                let c = m as f64 * PI;
                ks.push(polish(f, c - 0.5 * PI, c + 0.5 * PI, &format!("exp window {}", m + 1))?);
            }
        }
        TranscendentalSpec::TriangleBvp => {
            let f = |k: f64| spec.residual(k);
            ks.push(polish(f, 1e-9, PI, "triangle window 1")?);
            for m in 1..count {
                let c = 2.0 * m as f64 * PI;
                ks.push(polish(f, c - PI, c + PI, &format!("triangle window {}", m + 1))?);
            }
        }
        TranscendentalSpec::TriangleRederived => {
            // Tan-family roots interleave with the exact roots (4j + 2)π.
            let mut m = 0usize;
            while ks.len() < count {
                let root = if m == 0 {
                    polish(quarter_factor, 1e-9, 2.0 * PI, "quarter window 1")?
                } else {
                    let c = 4.0 * m as f64 * PI;
                    polish(quarter_factor, c - 2.0 * PI, c + 2.0 * PI, &format!("quarter window {}", m + 1))?
                };
                ks.push(root);
                if ks.len() < count {
                    ks.push((4 * m + 2) as f64 * PI);
                }
                m += 1;
            }
        }
    }
    Ok(ks
        .into_iter()
        .enumerate()
        .map(|(i, k)| TranscendentalRoot {
            index: i + 1,
            k,
            eigenvalue: spec.mercer_map(k),
            residual: spec.residual(k).abs(),
        })
        .collect())
}

/// CSV rows (i, k_i, λ_i, residual).
pub fn write_roots_csv<W: Write>(roots: &[TranscendentalRoot], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "k", "eigenvalue", "residual"])?;
    for r in roots {
        w.write_record([
            r.index.to_string(),
            format!("{:.16e}", r.k),
            format!("{:.16e}", r.eigenvalue),
            format!("{:.16e}", r.residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenMatch {
    pub index: usize,
    pub nystrom: f64,
    /// Closest mapped root, if any lies within the tolerance.
    pub mapped: Option<f64>,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MercerMatchReport {
    pub spec: TranscendentalSpec,
    pub matches: Vec<EigenMatch>,
    pub max_relative_error: f64,
    /// Nyström eigenvalues with no mapped root within the tolerance.
    pub unmatched: Vec<usize>,
}

/// Pairs each of the top `count` Nyström eigenvalues with the nearest mapped
/// root among the first count + 8.
pub fn verify_against_mercer(
    spec: TranscendentalSpec,
    dec: &MercerDecomposition,
    count: usize,
    tol: f64,
) -> Result<MercerMatchReport> {
    let want = spec.kernel();
    let have = dec.kernel();
    if want.family() != have.family() || (want.half_width() - have.half_width()).abs() > 1e-12 {
        return Err(Error::Invalid(format!("equation is for {}, decomposition uses {}", want.name(), have.name())));
    }
    if count > dec.eigenvalues().len() {
        return Err(Error::Rank { requested: count, available: dec.eigenvalues().len() });
    }
    let mapped: Vec<f64> = solve_transcendental(spec, count + 8)?.iter().map(|r| r.eigenvalue).collect();
    let mut matches = Vec::with_capacity(count);
    let mut unmatched = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, &l) in dec.eigenvalues().iter().take(count).enumerate() {
        let best = mapped.iter().copied().min_by(|p, q| (p - l).abs().total_cmp(&(q - l).abs())).unwrap();
        let rel = (best - l).abs() / l.abs();
        worst = worst.max(rel);
        let ok = rel < tol;
        if !ok {
            unmatched.push(i + 1);
        }
        matches.push(EigenMatch { index: i + 1, nystrom: l, mapped: ok.then_some(best), relative_error: rel });
    }
    Ok(MercerMatchReport { spec, matches, max_relative_error: worst, unmatched })
}

/// P(ξ) = Σ p_j ξ^j of the operator P(−i d/dx) ⊂ T_F⁻¹ and the boundary
/// functionals, each a row acting on (h(0), h'(0), h(a), h'(a)).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticDescriptor {
    pub kernel: String,
    pub half_width: f64,
    pub symbol: Vec<f64>,
    pub boundary: Vec<[f64; 4]>,
}

pub fn elliptic_descriptor(kernel: &PdKernel) -> Result<EllipticDescriptor> {
    let a = kernel.half_width();
    let (symbol, boundary) = match kernel.family() {
        KernelFamily::Exp => (vec![0.5, 0.0, 0.5], vec![[1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]]),
        KernelFamily::Triangle => (vec![0.0, 0.0, 0.5], vec![[0.0, 1.0, 0.0, 1.0], [1.0, -(2.0 - a), 1.0, 0.0]]),
        _ => return Err(Error::Invalid(format!("no elliptic descriptor for {}", kernel.name()))),
    };
    Ok(EllipticDescriptor { kernel: kernel.name(), half_width: a, symbol, boundary })
}

impl EllipticDescriptor {
    pub fn symbol_at(&self, xi: f64) -> f64 {
        self.symbol.iter().rev().fold(0.0, |acc, &c| acc * xi + c)
    }

    /// min P(ξ) over `samples` points of [−range, range].
    pub fn symbol_min(&self, range: f64, samples: usize) -> f64 {
        let samples = samples.max(2);
        (0..samples)
            .map(|i| self.symbol_at(-range + 2.0 * range * i as f64 / (samples - 1) as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// The boundary functionals applied to h.
    pub fn boundary_residuals(&self, h: &SampledElement) -> Vec<Complex64> {
        let b = h.boundary();
        let v = [b.h0, b.dh0, b.ha, b.dha];
        self.boundary.iter().map(|row| row.iter().zip(&v).map(|(c, x)| x * *c).sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaEntry {
    pub bump: Bump,
    pub lhs: f64,
    pub rhs: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaCheckReport {
    pub kernel: String,
    pub entries: Vec<DeltaEntry>,
    pub max_error: f64,
}

/// ∫F ψ'' against the distributional identity: −2ψ(0) for 1 − |x|,
/// ∫Fψ − 2ψ(0) for e^{−|x|}.
pub fn distributional_derivative_check(kernel: &PdKernel, bumps: &[Bump]) -> Result<DeltaCheckReport> {
    let exp = match kernel.family() {
        KernelFamily::Exp => true,
        KernelFamily::Triangle => false,
        _ => return Err(Error::Invalid(format!("no distributional identity for {}", kernel.name()))),
    };
    let a = kernel.half_width();
    let rule = GaussRule::new(20);
    let mut entries = Vec::with_capacity(bumps.len());
    for &b in bumps {
        let (lo, hi) = b.support();
        if lo <= -a || hi >= a {
            return Err(Error::Domain(format!("bump support [{lo}, {hi}] not inside (−{a}, {a})")));
        }
        let integral = |g: &dyn Fn(f64) -> f64| -> f64 {
            let mut s = 0.0;
            let pieces: Vec<(f64, f64)> =
                if lo < 0.0 && hi > 0.0 { vec![(lo, 0.0), (0.0, hi)] } else { vec![(lo, hi)] };
            for (p, q) in pieces {
                s += rule.composite(p, q, 64, g);
            }
            s
        };
        let lhs = integral(&|x| kernel.value(x) * b.eval_all(x).2);
        let psi0 = b.value(0.0);
        let rhs = if exp { integral(&|x| kernel.value(x) * b.value(x)) - 2.0 * psi0 } else { -2.0 * psi0 };
        entries.push(DeltaEntry { bump: b, lhs, rhs, error: (lhs - rhs).abs() });
    }
    let max_error = entries.iter().map(|e| e.error).fold(0.0, f64::max);
    Ok(DeltaCheckReport { kernel: kernel.name(), entries, max_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EllipticVerdict {
    /// Relative change below 10% between ranks m and 2m.
    Stable,
    /// Growth by more than 2× between ranks.
    NotElliptic,
    Unsettled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub ranks: [usize; 2],
    pub constants: [f64; 2],
    pub verdict: EllipticVerdict,
}

/// max over samples of ⟨h, T_F⁻¹h⟩ / (‖h‖² + ‖h'‖²) at ranks m and 2m.
pub fn ellipticity_check(dec: &MercerDecomposition, samples: &[SampledElement], m: usize) -> Result<EllipticityReport> {
    if samples.is_empty() {
        return Err(Error::Invalid("no sample functions".into()));
    }
    let ranks = [m, 2 * m];
    let mut constants = [0.0f64; 2];
    for h in samples {
        let l2 = h.l2_inner(h)?.re + h.l2_inner_derivative(h)?.re;
        for (c, &r) in constants.iter_mut().zip(&ranks) {
            let q = dec.hf_inner_via_inverse(|x| h.eval(x), |x| h.eval(x), r)?.re;
            *c = c.max(q / l2);
        }
    }
    let verdict = if constants[1] > 2.0 * constants[0] {
        EllipticVerdict::NotElliptic
    } else if (constants[1] - constants[0]).abs() < 0.1 * constants[0] {
        EllipticVerdict::Stable
    } else {
        EllipticVerdict::Unsettled
    };
    Ok(EllipticityReport { ranks, constants, verdict })
}

/// Smooth sample functions on [0, a] with exact derivatives.
pub fn ellipticity_samples(a: f64, nodes: usize) -> Result<Vec<SampledElement>> {
    let w = PI / a;
    let c = |v: f64| Complex64::new(v, 0.0);
    Ok(vec![
        SampledElement::from_fn(a, nodes, |_| c(1.0), |_| c(0.0))?,
        SampledElement::from_fn(a, nodes, c, |_| c(1.0))?,
        SampledElement::from_fn(a, nodes, |x| c((w * x).cos()), |x| c(-w * (w * x).sin()))?,
        SampledElement::from_fn(a, nodes, |x| c(x.exp()), |x| c(x.exp()))?,
        SampledElement::from_fn(a, nodes, |x| c((2.0 * w * x).sin()), |x| c(2.0 * w * (2.0 * w * x).cos()))?,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BsplineBoundReport {
    pub k: u32,
    /// (k/2)².
    pub bound: f64,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub passed: bool,
}

/// Random sums of bumps inside (0, a).
pub fn random_bumps(a: f64, rng: &mut ChaCha8Rng) -> Vec<(f64, Bump)> {
    let count = rng.random_range(1..=4);
    (0..count)
        .map(|_| {
            let radius = rng.random_range(0.05..0.45) * a;
            let center = rng.random_range(radius + 0.01 * a..a - radius - 0.01 * a);
            (rng.random_range(-1.0..1.0), Bump { center, radius })
        })
        .collect()
}

fn bump_fourier_cycles(bumps: &[(f64, Bump)], nu: f64, rule: &GaussRule) -> Complex64 {
    let mut s = Complex64::ZERO;
    for &(c, b) in bumps {
        let (lo, hi) = b.support();
        s += c * rule.composite(lo, hi, 16, |y| Complex64::from_polar(b.value(y), -2.0 * PI * nu * y));
    }
    s
}

/// ∫ν²|φ̂(ν)|² B^{*k}(ν) dν / ∫|φ̂(ν)|² B^{*k}(ν) dν with φ̂(ν) = ∫φ(y)e^{−2πiνy}dy.
pub fn bspline_spectral_ratio(k: u32, bumps: &[(f64, Bump)]) -> f64 {
    let rule = GaussRule::new(12);
    let half = k as f64 / 2.0;
    let pieces = (2.0 * half).round() as usize * 2;
    let (mut num, mut den) = (0.0, 0.0);
    for p in 0..pieces {
        let lo = -half + 0.5 * p as f64;
        let hi = lo + 0.5;
        for (nu, w) in rule.mapped(lo, hi) {
            let f = bump_fourier_cycles(bumps, nu, &rule).norm_sqr() * bspline_density(k, nu) * w;
            num += nu * nu * f;
            den += f;
        }
    }
    num / den
}

/// ‖F_{φ'}‖² / ‖F_φ‖² in H_F of (sin πx/πx)^k, from sampled φ.
pub fn bspline_direct_ratio(k: u32, bumps: &[(f64, Bump)], nodes: usize) -> Result<f64> {
    let kernel = bspline_kernel(k)?;
    let phi = TestFunction::from_bumps(kernel.half_width(), nodes, bumps)?;
    let dphi = phi.derivative();
    Ok(inner_product_smoothed(&dphi, &dphi, &kernel)?.re / inner_product_smoothed(&phi, &phi, &kernel)?.re)
}

/// Checks the spectral ratio never exceeds (k/2)² over random test functions.
pub fn bspline_operator_bound(k: u32, trials: usize, seed: u64) -> Result<BsplineBoundReport> {
    if k == 0 {
        return Err(Error::Domain("B-spline order must be positive".into()));
    }
    let a = bspline_kernel(k)?.half_width();
    let bound = (k as f64 / 2.0).powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ratios: Vec<f64> = (0..trials).map(|_| bspline_spectral_ratio(k, &random_bumps(a, &mut rng))).collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(BsplineBoundReport { k, bound, passed: max_ratio <= bound * (1.0 + 1e-6), ratios, max_ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportReport {
    pub k: u32,
    pub support: (f64, f64),
    /// max |numerical k-fold convolution − closed form| on the grid.
    pub convolution_error: f64,
    /// max of the numerical convolution outside the support.
    pub outside_mass: f64,
}

/// Convolves the indicator of (−½, ½) with itself k times on a grid of
/// spacing 1/`per_unit` and compares with the closed-form density.
pub fn support_check(k: u32, per_unit: usize) -> Result<SupportReport> {
    if k == 0 {
        return Err(Error::Domain("B-spline order must be positive".into()));
    }
    let h = 1.0 / per_unit as f64;
    let half = k as f64 / 2.0;
    let span = half + 1.0;
    let n = (2.0 * span * per_unit as f64).round() as usize + 1;
    let x = |i: usize| -span + i as f64 * h;
    let box_at = |t: f64| {
        if t.abs() < 0.5 - 1e-12 {
            1.0
        } else if (t.abs() - 0.5).abs() <= 1e-12 {
            0.5
        } else {
            0.0
        }
    };
    let indicator: Vec<f64> = (0..n).map(|i| box_at(x(i))).collect();
    let mut cur = indicator.clone();
    let centre = (n - 1) / 2;
    for _ in 1..k {
        let mut next = vec![0.0; n];
        for (i, out) in next.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, &cj) in cur.iter().enumerate() {
                let shifted = i as i64 - j as i64 + centre as i64;
                if shifted < 0 || shifted >= n as i64 {
                    continue;
                }
                let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                s += w * cj * indicator[shifted as usize];
            }
            *out = s * h;
        }
        cur = next;
    }
    let mut err: f64 = 0.0;
    let mut outside: f64 = 0.0;
    for (i, &v) in cur.iter().enumerate() {
        let t = x(i);
        if t.abs() > half + 1e-12 {
            outside = outside.max(v.abs());
        } else {
            // Skip the knots, where the indicator takes its midpoint value.
            let off = t + half;
            if (off - off.round()).abs() > 1e-9 {
                err = err.max((v - bspline_density(k, t)).abs());
            }
        }
    }
    Ok(SupportReport { k, support: (-half, half), convolution_error: err, outside_mass: outside })
}
