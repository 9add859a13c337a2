//! Closed-form Gram–Schmidt basis over kernel sections at the dyadic points
//! k·a/2ⁿ of [0, a].
//!
//! For kernels with the Markov property (e^{−|x|}, 1 − |x| on [0, ½]) the
//! three-term elements are exactly orthonormal; for other kernels they are
//! built the same way and [`orthonormality_defect`] reports the deviation.

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::PdKernel;
use crate::rkhs::{inner_product_combo, Verdict};

/// Smallest admissible determinant of the Gram matrix of F_{x−δ}, F_x, F_{x+δ}.
pub const GRAM_DET_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DyadicIndex {
    /// h₀ = F₀.
    Seed0,
    /// h₁ from F_a.
    Seed1,
    /// Level n ≥ 1, k odd, 0 < k < 2ⁿ.
    Level { n: u32, k: u64 },
}

impl DyadicIndex {
    pub fn label(&self) -> String {
        match self {
            DyadicIndex::Seed0 => "h0".into(),
            DyadicIndex::Seed1 => "h1".into(),
            DyadicIndex::Level { n, k } => format!("h_{n},{k}"),
        }
    }

    pub fn center(&self, a: f64) -> f64 {
        match *self {
            DyadicIndex::Seed0 => 0.0,
            DyadicIndex::Seed1 => a,
            DyadicIndex::Level { n, k } => a * k as f64 / (1u64 << n) as f64,
        }
    }
}

/// Indices up to `depth`: depth 0 is {h₀}; depth d ≥ 1 adds h₁ and the odd
/// positions of levels 1..=d.
pub fn enumerate_indices(depth: u32) -> Vec<DyadicIndex> {
    let mut out = vec![DyadicIndex::Seed0];
    if depth == 0 {
        return out;
    }
    out.push(DyadicIndex::Seed1);
    for n in 1..=depth {
        out.extend((1..(1u64 << n)).step_by(2).map(|k| DyadicIndex::Level { n, k }));
    }
    out
}

/// normalization × Σ weight·F(· − center).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnbElement {
    pub index: DyadicIndex,
    pub terms: Vec<(f64, f64)>,
    pub normalization: f64,
    /// ‖Σ weight·F(· − center)‖² before normalization.
    pub raw_norm_sq: f64,
}

impl OnbElement {
    pub fn as_combo(&self) -> Vec<(Complex64, f64)> {
        self.terms.iter().map(|&(w, x)| (Complex64::new(w * self.normalization, 0.0), x)).collect()
    }

    pub fn eval(&self, kernel: &PdKernel, x: f64) -> f64 {
        self.normalization * self.terms.iter().map(|&(w, c)| w * kernel.value(x - c)).sum::<f64>()
    }
}

/// Level constants: δ = a/2ⁿ, c = F(δ)/(1 + F(2δ)), ‖v‖² and the Gram determinant.
#[derive(Debug, Clone, Copy)]
struct Level {
    delta: f64,
    c: f64,
    raw_norm_sq: f64,
}

fn level(kernel: &PdKernel, n: u32) -> Result<Level> {
    let delta = kernel.half_width() / (1u64 << n) as f64;
    let f1 = kernel.value(delta);
    let f2 = kernel.value(2.0 * delta);
    let det = 1.0 - 2.0 * f1 * f1 + 2.0 * f1 * f1 * f2 - f2 * f2;
    if !(det >= GRAM_DET_MIN) {
        return Err(Error::LinearDependence { level: n as usize, det });
    }
    Ok(Level { delta, c: f1 / (1.0 + f2), raw_norm_sq: (1.0 + f2 - 2.0 * f1 * f1) / (1.0 + f2) })
}

fn seed1_norm_sq(kernel: &PdKernel) -> Result<f64> {
    let fa = kernel.value(kernel.half_width());
    let s = 1.0 - fa * fa;
    if !(s >= GRAM_DET_MIN) {
        return Err(Error::LinearDependence { level: 0, det: s });
    }
    Ok(s)
}

pub fn build_onb(kernel: &PdKernel, depth: u32) -> Result<Vec<OnbElement>> {
    let a = kernel.half_width();
    let mut out =
        vec![OnbElement { index: DyadicIndex::Seed0, terms: vec![(1.0, 0.0)], normalization: 1.0, raw_norm_sq: 1.0 }];
    if depth == 0 {
        return Ok(out);
    }
    let s1 = seed1_norm_sq(kernel)?;
    out.push(OnbElement {
        index: DyadicIndex::Seed1,
        terms: vec![(1.0, a), (-kernel.value(a), 0.0)],
        normalization: 1.0 / s1.sqrt(),
        raw_norm_sq: s1,
    });
    for n in 1..=depth {
        let lv = level(kernel, n)?;
        for k in (1..(1u64 << n)).step_by(2) {
            let x = a * k as f64 / (1u64 << n) as f64;
            out.push(OnbElement {
                index: DyadicIndex::Level { n, k },
                terms: vec![(1.0, x), (-lv.c, x - lv.delta), (-lv.c, x + lv.delta)],
                normalization: 1.0 / lv.raw_norm_sq.sqrt(),
                raw_norm_sq: lv.raw_norm_sq,
            });
        }
    }
    Ok(out)
}

/// Max |⟨h_i, h_j⟩ − δ_ij| with the exact kernel-section inner product.
pub fn orthonormality_defect(elements: &[OnbElement], kernel: &PdKernel) -> Result<f64> {
    let combos: Vec<_> = elements.iter().map(|e| e.as_combo()).collect();
    let mut worst: f64 = 0.0;
    for i in 0..combos.len() {
        for j in i..combos.len() {
            let g = inner_product_combo(&combos[i], &combos[j], kernel)?;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    Ok(worst)
}

/// CSV rows (element, label, squared_norm) with the pre-normalization norms.
pub fn write_onb_table<W: Write>(elements: &[OnbElement], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["element", "label", "squared_norm"])?;
    for (i, e) in elements.iter().enumerate() {
        w.write_record([i.to_string(), e.index.label(), format!("{:.16e}", e.raw_norm_sq)])?;
    }
    w.flush()?;
    Ok(())
}

/// Coefficients ⟨h, f⟩ through `depth`; `levels[n − 1][j]` belongs to k = 2j + 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionCoefficients {
    pub depth: u32,
    pub c0: Complex64,
    pub c1: Option<Complex64>,
    pub levels: Vec<Vec<Complex64>>,
}

impl ExpansionCoefficients {
    /// |c₀|² + |c₁|² + Σ_{n ≤ depth} Σ_k |c_{n,k}|².
    pub fn partial_sum(&self, depth: u32) -> f64 {
        let mut s = self.c0.norm_sqr();
        if depth == 0 {
            return s;
        }
        s += self.c1.map_or(0.0, |c| c.norm_sqr());
        for lv in self.levels.iter().take(depth as usize) {
            s += lv.iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// c₀ = f(0), c₁ = (f(a) − F(a) f(0))/√(1 − F(a)²),
/// c_{n,k} = N_n [f(x) − c_n (f(x − δ) + f(x + δ))] at x = k·δ, δ = a/2ⁿ.
pub fn expand(f: impl Fn(f64) -> Complex64, kernel: &PdKernel, depth: u32) -> Result<ExpansionCoefficients> {
    let a = kernel.half_width();
    let c0 = f(0.0);
    if depth == 0 {
        return Ok(ExpansionCoefficients { depth, c0, c1: None, levels: Vec::new() });
    }
    let s1 = seed1_norm_sq(kernel)?;
    let fa = f(a);
    let c1 = (fa - kernel.value(a) * c0) / s1.sqrt();
    // Samples at all points of the finest level, reused by coarser ones.
    let m = 1u64 << depth;
    let samples: Vec<Complex64> = (0..=m)
        .map(|i| {
            if i == 0 {
                c0
            } else if i == m {
                fa
            } else {
                f(a * i as f64 / m as f64)
            }
        })
        .collect();
    let mut levels = Vec::with_capacity(depth as usize);
    for n in 1..=depth {
        let lv = level(kernel, n)?;
        let stride = (1u64 << (depth - n)) as usize;
        let norm = 1.0 / lv.raw_norm_sq.sqrt();
        levels.push(
            (1..(1u64 << n))
                .step_by(2)
                .map(|k| {
                    let i = k as usize * stride;
                    norm * (samples[i] - lv.c * (samples[i - stride] + samples[i + stride]))
                })
                .collect(),
        );
    }
    Ok(ExpansionCoefficients { depth, c0, c1: Some(c1), levels })
}

pub fn parseval_norm(coeffs: &ExpansionCoefficients) -> f64 {
    coeffs.partial_sum(coeffs.depth)
}

/// Parseval partial sums at depths d − 4, d − 2, d and the resulting verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicMembership {
    pub depths: [u32; 3],
    pub sums: [f64; 3],
    pub verdict: Verdict,
}

/// "in" when the last increment is below 1e−4 of the sum, "out" when the
/// increments fail to shrink by half across two levels, else indeterminate.
pub fn membership_by_coefficients(
    f: impl Fn(f64) -> Complex64,
    kernel: &PdKernel,
    depth: u32,
) -> Result<DyadicMembership> {
    if depth < 4 {
        return Err(Error::Invalid(format!("membership needs depth ≥ 4, got {depth}")));
    }
    let c = expand(f, kernel, depth)?;
    let depths = [depth - 4, depth - 2, depth];
    let sums = depths.map(|d| c.partial_sum(d));
    let prev = sums[1] - sums[0];
    let last = sums[2] - sums[1];
    let verdict = if last <= 1e-4 * sums[2] {
        Verdict::In
    } else if last >= 0.5 * prev {
        Verdict::Out
    } else {
        Verdict::Indeterminate
    };
    Ok(DyadicMembership { depths, sums, verdict })
}

/// P_L f = Σ w_j F(· − s_j) with Σ_j F(s_i − s_j) w_j = f(s_i).
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub nodes: Vec<f64>,
    pub weights: Vec<Complex64>,
}

impl Projection {
    pub fn eval(&self, kernel: &PdKernel, x: f64) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(&s, w)| w * kernel.value(x - s)).sum()
    }

    pub fn as_combo(&self) -> Vec<(Complex64, f64)> {
        self.weights.iter().copied().zip(self.nodes.iter().copied()).collect()
    }
}

pub fn projection_interpolation(f: impl Fn(f64) -> Complex64, nodes: &[f64], kernel: &PdKernel) -> Result<Projection> {
    let a = kernel.half_width();
    if let Some(s) = nodes.iter().find(|&&s| !(s >= 0.0 && s <= a)) {
        return Err(Error::Domain(format!("node {s} outside [0, {a}]")));
    }
    let m = nodes.len();
    let gram = DMatrix::from_fn(m, m, |i, j| kernel.value(nodes[i] - nodes[j]));
    let min = crate::linalg::symmetric_min_eigenvalue(gram.clone());
    let chol = Cholesky::new(gram).filter(|_| min > GRAM_DET_MIN);
    let Some(chol) = chol else {
        return Err(Error::LinearDependence { level: 0, det: min });
    };
    let vals: Vec<Complex64> = nodes.iter().map(|&s| f(s)).collect();
    let re = chol.solve(&DVector::from_iterator(m, vals.iter().map(|v| v.re)));
    let im = chol.solve(&DVector::from_iterator(m, vals.iter().map(|v| v.im)));
    let weights = (0..m).map(|i| Complex64::new(re[i], im[i])).collect();
    Ok(Projection { nodes: nodes.to_vec(), weights })
}

/// The dyadic points of levels 0..=depth in [0, a], ascending.
pub fn dyadic_points(a: f64, depth: u32) -> Vec<f64> {
    let m = 1u64 << depth;
    (0..=m).map(|i| a * i as f64 / m as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_count() {
        assert_eq!(enumerate_indices(0).len(), 1);
        assert_eq!(enumerate_indices(3).len(), 9);
        assert_eq!(enumerate_indices(14).len(), 16385);
    }

    #[test]
    fn triangle_level_norms() {
        let k = PdKernel::triangle();
        let onb = build_onb(&k, 2).unwrap();
        let norms: Vec<f64> = onb.iter().map(|e| e.raw_norm_sq).collect();
        for (got, want) in norms.iter().zip([1.0, 0.75, 0.25, 0.125, 0.125]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_section_expands_to_one() {
        let k = PdKernel::exp();
        let c = expand(|x| Complex64::new((-x).exp(), 0.0), &k, 6).unwrap();
        assert!((parseval_norm(&c) - 1.0).abs() < 1e-12);
    }
}
