use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{bspline_density, PdKernel};
use crate::error::{Error, Result};
use crate::special::power_tail_fourier;

/// Power-law description of the density beyond the grid: c·|λ|^{−p}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailDescriptor {
    pub exponent: f64,
    pub coeff: f64,
}

/// Finite positive measure on ℝ: density on a symmetric uniform grid,
/// atoms, and an optional power-law tail beyond the grid.
///
/// Without a tail descriptor the measure is supported on the grid range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    #[serde(default)]
    pub atoms: Vec<(f64, f64)>,
    #[serde(default)]
    pub tail: Option<TailDescriptor>,
}

const DEFAULT_RANGE: f64 = 2000.0;
const DEFAULT_STEP: f64 = 0.02;

impl SpectralMeasure {
    pub fn new(
        grid: Vec<f64>,
        density: Vec<f64>,
        atoms: Vec<(f64, f64)>,
        tail: Option<TailDescriptor>,
    ) -> Result<Self> {
        let m = SpectralMeasure { grid, density, atoms, tail };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        if n != self.density.len() {
            return Err(Error::Invalid("grid and density lengths differ".into()));
        }
        if n == 1 {
            return Err(Error::Invalid("density grid needs at least two points".into()));
        }
        if n >= 2 {
            let h = self.step();
            if !(h > 0.0) {
                return Err(Error::Invalid("grid must be increasing".into()));
            }
            for (i, w) in self.grid.windows(2).enumerate() {
                if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
                    return Err(Error::Invalid(format!("grid is not uniform at index {i}")));
                }
            }
            if (self.grid[0] + self.grid[n - 1]).abs() > 1e-9 * self.grid[n - 1].abs().max(1.0) {
                return Err(Error::Invalid("grid is not symmetric about 0".into()));
            }
        }
        if let Some(v) = self.density.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Invalid(format!("negative or non-finite density value {v}")));
        }
        if let Some(a) = self.atoms.iter().find(|a| !(a.1 > 0.0) || !a.0.is_finite()) {
            return Err(Error::Invalid(format!("atom weight must be positive, got {:?}", a)));
        }
        if let Some(t) = &self.tail {
            if n < 2 {
                return Err(Error::Invalid("a tail descriptor needs a density grid".into()));
            }
            if !(t.exponent > 1.0) || !(t.coeff >= 0.0) {
                return Err(Error::Invalid("tail needs exponent > 1 and coeff ≥ 0".into()));
            }
        }
        Ok(())
    }

    /// Samples `f` on [−range, range] with spacing ≈ `step`.
    pub fn from_density(f: impl Fn(f64) -> f64, range: f64, step: f64, tail: Option<TailDescriptor>) -> Self {
        let cells = ((2.0 * range / step).round() as usize).max(2);
        let h = 2.0 * range / cells as f64;
        let grid: Vec<f64> = (0..=cells).map(|i| if i == cells { range } else { -range + i as f64 * h }).collect();
        let density = grid.iter().map(|&l| f(l)).collect();
        SpectralMeasure { grid, density, atoms: Vec::new(), tail }
    }

    pub fn atomic(atoms: Vec<(f64, f64)>) -> Result<Self> {
        SpectralMeasure::new(Vec::new(), Vec::new(), atoms, None)
    }

    /// dλ / (π(1+λ²)), the measure of e^{−|x|}.
    pub fn cauchy() -> Self {
        SpectralMeasure::from_density(
            |l| 1.0 / (PI * (1.0 + l * l)),
            DEFAULT_RANGE,
            DEFAULT_STEP,
            Some(TailDescriptor { exponent: 2.0, coeff: 1.0 / PI }),
        )
    }

    /// (1/2π)(sin(λ/2)/(λ/2))² dλ, the measure of (1 − |x|)₊.
    pub fn triangle() -> Self {
        SpectralMeasure::from_density(
            |l| half_sinc(l).powi(2) / (2.0 * PI),
            DEFAULT_RANGE,
            DEFAULT_STEP,
            Some(TailDescriptor { exponent: 2.0, coeff: 1.0 / PI }),
        )
    }

    /// (3/4π)(sin(λ/2)/(λ/2))⁴ dλ, the measure of the normalized cubic B-spline.
    pub fn cubic_spline() -> Self {
        SpectralMeasure::from_density(
            |l| 3.0 * half_sinc(l).powi(4) / (4.0 * PI),
            DEFAULT_RANGE,
            DEFAULT_STEP,
            Some(TailDescriptor { exponent: 4.0, coeff: 4.5 / PI }),
        )
    }

    /// (1/2π) B^{*k}(λ/2π) dλ on [−kπ, kπ], the measure of (sin πx/πx)^k.
    pub fn bspline(k: u32) -> Self {
        let range = k as f64 * PI;
        SpectralMeasure::from_density(|l| bspline_density(k, l / (2.0 * PI)) / (2.0 * PI), range, range / 4000.0, None)
    }

    pub fn step(&self) -> f64 {
        if self.grid.len() < 2 {
            0.0
        } else {
            (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1) as f64
        }
    }

    /// Largest |λ| covered by the grid.
    pub fn range(&self) -> f64 {
        self.grid.last().copied().unwrap_or(0.0)
    }

    fn weight(&self, i: usize) -> f64 {
        let h = self.step();
        if i == 0 || i + 1 == self.grid.len() {
            0.5 * h
        } else {
            h
        }
    }

    /// ∫ g dμ over the grid and the atoms (tail excluded).
    pub fn integrate_grid(&self, g: impl Fn(f64) -> f64) -> f64 {
        let mut s = 0.0;
        for (i, (&l, &d)) in self.grid.iter().zip(&self.density).enumerate() {
            if d != 0.0 {
                s += self.weight(i) * d * g(l);
            }
        }
        s + self.atoms.iter().map(|&(l, w)| w * g(l)).sum::<f64>()
    }

    /// ∫_{|λ| > range} c|λ|^{−p} e^{iλω} dλ.
    pub fn tail_fourier(&self, omega: f64) -> Complex64 {
        match &self.tail {
            Some(t) if t.coeff > 0.0 => {
                let v = power_tail_fourier(t.exponent, self.range(), omega);
                Complex64::new(2.0 * t.coeff * v.re, 0.0)
            }
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.integrate_grid(|_| 1.0) + self.tail_fourier(0.0).re
    }

    /// μ̂(x) = ∫ e^{iλx} dμ(λ).
    pub fn bochner(&self, x: f64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        let n = self.grid.len();
        if n >= 2 {
            let h = self.step();
            let rot = Complex64::from_polar(1.0, h * x);
            let mut ph = Complex64::new(0.0, 0.0);
            for i in 0..n {
                if i % 512 == 0 {
                    ph = Complex64::from_polar(1.0, self.grid[i] * x);
                }
                let d = self.density[i];
                if d != 0.0 {
                    s += ph * (self.weight(i) * d);
                }
                ph *= rot;
            }
        }
        for &(l, w) in &self.atoms {
            s += Complex64::from_polar(w, l * x);
        }
        s + self.tail_fourier(x)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: SpectralMeasure = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }
}

fn half_sinc(l: f64) -> f64 {
    let u = 0.5 * l;
    if u.abs() < 1e-4 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// μ̂(x) = ∫ e^{iλx} dμ(λ).
pub fn bochner_transform(measure: &SpectralMeasure, x: f64) -> Complex64 {
    measure.bochner(x)
}

/// Verdict on ∫ λ² dμ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MomentVerdict {
    Finite(f64),
    Divergent { exponent: f64 },
    Indeterminate(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    /// ∫_{|λ| ≤ cutoff} λ² dμ.
    pub truncated: f64,
    /// Fitted tail exponent p in density ~ c|λ|^{−p}, when a tail is present.
    pub fitted_exponent: Option<f64>,
    pub verdict: MomentVerdict,
}

const GUARD_LO: f64 = 2.8;
const GUARD_HI: f64 = 3.2;

/// Truncated second moment and a divergence verdict from the tail exponent.
pub fn second_moment(measure: &SpectralMeasure, cutoff: f64) -> Result<MomentReport> {
    if !(cutoff > 0.0) {
        return Err(Error::Invalid("cutoff must be positive".into()));
    }
    let l = measure.range();
    let mut truncated = measure.integrate_grid(|x| if x.abs() <= cutoff { x * x } else { 0.0 });
    if let Some(t) = &measure.tail {
        if cutoff > l {
            truncated += 2.0 * t.coeff * power_integral(2.0 - t.exponent, l, cutoff);
        }
    }
    let Some(tail) = measure.tail else {
        let total = measure.integrate_grid(|x| x * x);
        return Ok(MomentReport { truncated, fitted_exponent: None, verdict: MomentVerdict::Finite(total) });
    };
    let (p, r2) = match fit_tail_exponent(measure) {
        Ok(v) => v,
        Err(reason) => {
            return Ok(MomentReport { truncated, fitted_exponent: None, verdict: MomentVerdict::Indeterminate(reason) })
        }
    };
    let verdict = if r2 < 0.98 {
        MomentVerdict::Indeterminate(format!("tail fit is ill-conditioned (R² = {r2:.4})"))
    } else if (p - tail.exponent).abs() > 0.3 {
        MomentVerdict::Indeterminate(format!(
            "fitted exponent {p:.3} disagrees with the declared tail exponent {}",
            tail.exponent
        ))
    } else if p < GUARD_LO {
        MomentVerdict::Divergent { exponent: p }
    } else if p > GUARD_HI {
        let total =
            measure.integrate_grid(|x| x * x) + 2.0 * tail.coeff * l.powf(3.0 - tail.exponent) / (tail.exponent - 3.0);
        MomentVerdict::Finite(total)
    } else {
        MomentVerdict::Indeterminate(format!("tail exponent {p:.3} inside the guard band [{GUARD_LO}, {GUARD_HI}]"))
    };
    Ok(MomentReport { truncated, fitted_exponent: Some(p), verdict })
}

fn power_integral(q: f64, a: f64, b: f64) -> f64 {
    if (q + 1.0).abs() < 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(q + 1.0) - a.powf(q + 1.0)) / (q + 1.0)
    }
}

/// Least-squares slope of log window mass against log λ over six octaves
/// ending at the grid edge. Window masses average out oscillating factors
/// such as sin²(λ/2). Returns (p, R²).
fn fit_tail_exponent(m: &SpectralMeasure) -> std::result::Result<(f64, f64), String> {
    const OCTAVES: usize = 6;
    let l = m.range();
    let lowest = l / 2f64.powi(OCTAVES as i32);
    if lowest < 4.0 || m.grid.len() < 64 {
        return Err("grid too short for a tail fit".into());
    }
    let h = m.step();
    let mut pts = Vec::with_capacity(OCTAVES);
    for j in 0..OCTAVES {
        let hi = l / 2f64.powi(j as i32);
        let lo = hi / 2.0;
        let mass: f64 = m.grid.iter().zip(&m.density).filter(|(x, _)| **x >= lo && **x < hi).map(|(_, d)| d * h).sum();
        if !(mass > 0.0) {
            return Err(format!("empty tail window [{lo}, {hi})"));
        }
        pts.push(((lo * hi).sqrt().ln(), mass.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 0.0 };
    // Window mass over [λ, 2λ] scales like λ^{1−p}.
    Ok((1.0 - slope, r2))
}

/// (1,1) iff the attached measure has divergent second moment, else (0,0).
pub fn deficiency_indices(kernel: &PdKernel) -> Result<(u8, u8)> {
    let m = kernel.spectral_measure().ok_or(Error::MissingMeasure)?;
    let report = second_moment(&m, m.range().max(1.0))?;
    match report.verdict {
        MomentVerdict::Divergent { .. } => Ok((1, 1)),
        MomentVerdict::Finite(_) => Ok((0, 0)),
        MomentVerdict::Indeterminate(why) => Err(Error::Invalid(format!("moment test indeterminate: {why}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_transform_is_exp() {
        let m = SpectralMeasure::cauchy();
        assert!((m.total_mass() - 1.0).abs() < 1e-9);
        for x in [0.0, 0.25, 0.5, 0.9] {
            assert!((m.bochner(x).re - (-x).exp()).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn unit_atom_transform() {
        let m = SpectralMeasure::atomic(vec![(2.5, 1.0)]).unwrap();
        let v = m.bochner(0.7);
        assert!((v - Complex64::from_polar(1.0, 1.75)).norm() < 1e-15);
        let r = second_moment(&SpectralMeasure::atomic(vec![(0.0, 1.0)]).unwrap(), 1.0).unwrap();
        assert_eq!(r.verdict, MomentVerdict::Finite(0.0));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m = SpectralMeasure::from_density(|l| (-l * l).exp(), 3.0, 0.5, None);
        let s = m.to_json().unwrap();
        assert!(s.contains("\"grid\"") && s.contains("\"tail\""));
        assert_eq!(SpectralMeasure::from_json(&s).unwrap(), m);
        assert!(SpectralMeasure::new(vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 1.0], vec![], None).is_err());
        assert!(SpectralMeasure::atomic(vec![(0.0, 0.0)]).is_err());
    }
}
