use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{cubic_interp, integrate_samples, GaussRule, UniformGrid};

const CELL_ORDER: usize = 8;

/// Complex measure of bounded variation on [0, a]: a density sampled on a
/// uniform grid plus point masses.
///
/// The density is held as its Jordan decomposition (Re⁺, Re⁻, Im⁺, Im⁻),
/// each part nonnegative. Between grid points every part is interpolated by
/// local cubics, so the recombined density is the cubic interpolant of the
/// complex samples.
#[derive(Debug, Clone)]
pub struct MeasureOnInterval {
    a: f64,
    grid: Option<UniformGrid>,
    parts: [Vec<f64>; 4],
    atoms: Vec<(f64, Complex64)>,
    complex: bool,
    rule: GaussRule,
    /// Gauss nodes of every grid cell with weight × density.
    cell_nodes: Vec<Vec<(f64, Complex64)>>,
}

impl MeasureOnInterval {
    /// Density samples on the uniform grid of `samples.len()` points over [0, a].
    pub fn from_samples(a: f64, samples: Vec<Complex64>, atoms: Vec<(f64, Complex64)>) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Domain("interval length must be positive".into()));
        }
        if let Some(p) = atoms.iter().find(|p| !(p.0 >= 0.0 && p.0 <= a)) {
            return Err(Error::Domain(format!("atom at {} outside [0, {a}]", p.0)));
        }
        if samples.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) || atoms.iter().any(|p| !p.1.is_finite()) {
            return Err(Error::Invalid("measure has non-finite values".into()));
        }
        let grid = match samples.len() {
            0 => None,
            1 => return Err(Error::Invalid("density needs at least two samples".into())),
            n => Some(UniformGrid::new(0.0, a, n)),
        };
        let parts = [
            samples.iter().map(|v| v.re.max(0.0)).collect(),
            samples.iter().map(|v| (-v.re).max(0.0)).collect(),
            samples.iter().map(|v| v.im.max(0.0)).collect(),
            samples.iter().map(|v| (-v.im).max(0.0)).collect(),
        ];
        let complex = samples.iter().any(|v| v.im != 0.0) || atoms.iter().any(|p| p.1.im != 0.0);
        let mut m = MeasureOnInterval {
            a,
            grid,
            parts,
            atoms,
            complex,
            rule: GaussRule::new(CELL_ORDER),
            cell_nodes: Vec::new(),
        };
        m.cell_nodes = m.build_cell_nodes();
        Ok(m)
    }

    /// Samples the density `f` at `n` grid points.
    pub fn from_density(a: f64, n: usize, f: impl Fn(f64) -> Complex64, atoms: Vec<(f64, Complex64)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid("density needs at least two samples".into()));
        }
        let g = UniformGrid::new(0.0, a, n);
        MeasureOnInterval::from_samples(a, g.points().into_iter().map(f).collect(), atoms)
    }

    pub fn atoms_only(a: f64, atoms: Vec<(f64, Complex64)>) -> Result<Self> {
        MeasureOnInterval::from_samples(a, Vec::new(), atoms)
    }

    /// Point mass at x.
    pub fn dirac(a: f64, x: f64) -> Result<Self> {
        MeasureOnInterval::atoms_only(a, vec![(x, Complex64::new(1.0, 0.0))])
    }

    /// Normalized Lebesgue measure on [0, a].
    pub fn uniform(a: f64, n: usize) -> Result<Self> {
        MeasureOnInterval::from_density(a, n, |_| Complex64::new(1.0 / a, 0.0), Vec::new())
    }

    fn build_cell_nodes(&self) -> Vec<Vec<(f64, Complex64)>> {
        let Some(g) = self.grid else { return Vec::new() };
        (0..g.n - 1)
            .map(|c| {
                self.rule
                    .mapped(g.x(c), g.x(c + 1))
                    .map(|(y, w)| (y, self.density_at(y) * w))
                    .filter(|p| p.1 != Complex64::ZERO)
                    .collect()
            })
            .collect()
    }

    pub fn half_width(&self) -> f64 {
        self.a
    }

    pub fn is_complex(&self) -> bool {
        self.complex
    }

    pub fn atoms(&self) -> &[(f64, Complex64)] {
        &self.atoms
    }

    pub fn grid(&self) -> Option<UniformGrid> {
        self.grid
    }

    /// Jordan parts (Re⁺, Re⁻, Im⁺, Im⁻) of the density samples.
    pub fn jordan_parts(&self) -> &[Vec<f64>; 4] {
        &self.parts
    }

    /// Density samples recombined from the Jordan parts.
    pub fn samples(&self) -> Vec<Complex64> {
        (0..self.parts[0].len())
            .map(|i| Complex64::new(self.parts[0][i] - self.parts[1][i], self.parts[2][i] - self.parts[3][i]))
            .collect()
    }

    pub fn density_at(&self, y: f64) -> Complex64 {
        let Some(g) = self.grid else { return Complex64::new(0.0, 0.0) };
        let p = |k: usize| cubic_interp(&g, &self.parts[k], y);
        Complex64::new(p(0) - p(1), p(2) - p(3))
    }

    pub fn total_mass(&self) -> Complex64 {
        let d = match self.grid {
            Some(g) => integrate_samples(&g, &self.samples()),
            None => Complex64::new(0.0, 0.0),
        };
        d + self.atoms.iter().map(|p| p.1).sum::<Complex64>()
    }

    /// ∫|ρ| + Σ|w_j|.
    pub fn total_variation(&self) -> f64 {
        let d = match self.grid {
            Some(g) => integrate_samples(&g, &self.samples().iter().map(|v| v.norm()).collect::<Vec<_>>()),
            None => 0.0,
        };
        d + self.atoms.iter().map(|p| p.1.norm()).sum::<f64>()
    }

    /// Nonnegative with total mass 1 (within 1e−9).
    pub fn is_probability(&self) -> bool {
        !self.complex
            && self.parts[1].iter().all(|&v| v == 0.0)
            && self.atoms.iter().all(|p| p.1.re >= 0.0)
            && (self.total_mass().re - 1.0).abs() < 1e-9
    }

    /// ∫ k(x − y) dμ(y) for a kernel `k` that may have a kink at 0.
    pub fn convolve(&self, k: impl Fn(f64) -> f64, x: f64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        if let Some(g) = self.grid {
            let (cell, t) = g.locate(x);
            let split = x > g.lo && x < g.hi && t > 0.0 && t < 1.0;
            for (c, nodes) in self.cell_nodes.iter().enumerate() {
                if split && c == cell {
                    let (lo, hi) = (g.x(c), g.x(c + 1));
                    for (a, b) in [(lo, x), (x, hi)] {
                        for (y, w) in self.rule.mapped(a, b) {
                            s += self.density_at(y) * (w * k(x - y));
                        }
                    }
                } else {
                    for &(y, wd) in nodes {
                        s += wd * k(x - y);
                    }
                }
            }
        }
        for &(y, w) in &self.atoms {
            s += w * k(x - y);
        }
        s
    }

    /// Like [`convolve`](Self::convolve) but with a derivative kernel whose
    /// value at 0 depends on the side: `k(u, side)`; atoms sitting at x use
    /// the side facing into the interval.
    pub fn convolve_derivative(&self, k: impl Fn(f64, f64) -> f64, x: f64) -> Complex64 {
        let mut s = self.convolve(|u| k(u, 0.0), x);
        for &(y, w) in &self.atoms {
            if y == x {
                let side = if x <= 0.0 {
                    1.0
                } else if x >= self.a {
                    -1.0
                } else {
                    0.0
                };
                s += w * (k(0.0, side) - k(0.0, 0.0));
            }
        }
        s
    }

    /// Quadrature nodes (y, weight × density) of the density part followed
    /// by the atoms; integrates smooth functions against μ.
    pub fn quadrature_nodes(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.cell_nodes.iter().flatten().copied().chain(self.atoms.iter().copied())
    }

    /// ∫∫ k(x − y) conj(dμ(x)) dμ(y).
    pub fn energy(&self, k: impl Fn(f64) -> f64 + Copy) -> Complex64 {
        cross_energy(self, self, k)
    }
}

/// ∫∫ k(x − y) conj(dμ(x)) dν(y).
pub fn cross_energy(mu: &MeasureOnInterval, nu: &MeasureOnInterval, k: impl Fn(f64) -> f64 + Copy) -> Complex64 {
    mu.quadrature_nodes().map(|(x, w)| w.conj() * nu.convolve(k, x)).sum()
}

/// Degree of concentration q(μ) and dispersion δ(μ) = −log q(μ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Concentration {
    pub q: f64,
    pub dispersion: f64,
}

/// q(μ) = ∬ e^{−|x−y|} dμ(x) dμ(y) for a probability measure μ.
pub fn concentration(mu: &MeasureOnInterval) -> Result<Concentration> {
    if !mu.is_probability() {
        return Err(Error::Domain("concentration needs a probability measure".into()));
    }
    let q = mu.energy(|u: f64| (-u.abs()).exp()).re;
    let dispersion = 0.0 - q.ln();
    Ok(Concentration { q, dispersion })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_concentration_is_exact() {
        let c = concentration(&MeasureOnInterval::dirac(1.0, 0.3).unwrap()).unwrap();
        assert_eq!(c.q, 1.0);
        assert_eq!(c.dispersion, 0.0);
    }

    #[test]
    fn two_atoms() {
        let h = Complex64::new(0.5, 0.0);
        let m = MeasureOnInterval::atoms_only(1.0, vec![(0.0, h), (1.0, h)]).unwrap();
        let c = concentration(&m).unwrap();
        assert!((c.q - (1.0 + (-1f64).exp()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_concentration_matches_closed_form() {
        let c = concentration(&MeasureOnInterval::uniform(1.0, 201).unwrap()).unwrap();
        assert!((c.q - 2.0 / std::f64::consts::E).abs() < 1e-12);
        assert!((c.dispersion - (1.0 - 2f64.ln())).abs() < 1e-11);
    }

    #[test]
    fn rejects_non_probability() {
        let m = MeasureOnInterval::atoms_only(1.0, vec![(0.2, Complex64::new(0.7, 0.0))]).unwrap();
        assert!(concentration(&m).is_err());
        assert!(MeasureOnInterval::dirac(1.0, 1.5).is_err());
    }

    #[test]
    fn jordan_parts_recombine() {
        let m = MeasureOnInterval::from_density(1.0, 101, |y| Complex64::from_polar(1.0, 7.0 * y), vec![]).unwrap();
        for p in m.jordan_parts() {
            assert!(p.iter().all(|&v| v >= 0.0));
        }
        let y = 0.3337;
        assert!((m.density_at(y) - Complex64::from_polar(1.0, 7.0 * y)).norm() < 1e-6);
        assert!((m.total_variation() - 1.0).abs() < 1e-12);
    }
}
