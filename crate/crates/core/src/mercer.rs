//! Nyström discretization of the Mercer operator (T_F φ)(x) = ∫₀^a φ(y) F(x − y) dy.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, PdKernel, EPS_PSD};
use crate::linalg::symmetric_eigen_desc;
use crate::quad::{second_derivative4, uniform_weights, UniformGrid};
use crate::rkhs::{require_exp, SampledElement};

/// Node rule of the Nyström discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRule {
    /// Uniform nodes with trapezoid weights. The kernel kink sits on the
    /// diagonal, which coincides with a node in every row.
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NystromConfig {
    pub nodes: usize,
    pub rule: NodeRule,
}

impl Default for NystromConfig {
    fn default() -> Self {
        NystromConfig { nodes: 400, rule: NodeRule::Trapezoid }
    }
}

impl NystromConfig {
    pub fn with_nodes(nodes: usize) -> Self {
        NystromConfig { nodes, ..Default::default() }
    }
}

/// Eigenvalues (descending) and node samples of L²-orthonormal eigenfunctions.
#[derive(Debug, Clone)]
pub struct MercerDecomposition {
    kernel: PdKernel,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    eigenvalues: Vec<f64>,
    /// Column n holds ξ_n at the nodes.
    eigenfunctions: DMatrix<f64>,
}

/// Builds √w_i F(x_i − x_j) √w_j, diagonalizes it and rescales the
/// eigenvectors by 1/√w_i.
pub fn discretize(kernel: &PdKernel, cfg: &NystromConfig) -> Result<MercerDecomposition> {
    if cfg.nodes < 16 {
        return Err(Error::Invalid(format!("Nyström needs at least 16 nodes, got {}", cfg.nodes)));
    }
    let a = kernel.half_width();
    let grid = UniformGrid::new(0.0, a, cfg.nodes);
    let nodes = grid.points();
    let h = grid.step();
    let n = cfg.nodes;
    let mut weights = vec![h; n];
    weights[0] = 0.5 * h;
    weights[n - 1] = 0.5 * h;
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| sw[i] * kernel.value(nodes[i] - nodes[j]) * sw[j]);
    let (eigenvalues, vectors) = symmetric_eigen_desc(m);
    let min = *eigenvalues.last().unwrap();
    if min < -EPS_PSD {
        return Err(Error::NotPositiveDefinite(min));
    }
    let eigenfunctions = DMatrix::from_fn(n, n, |i, k| vectors[(i, k)] / sw[i]);
    Ok(MercerDecomposition { kernel: kernel.clone(), nodes, weights, eigenvalues, eigenfunctions })
}

impl MercerDecomposition {
    pub fn kernel(&self) -> &PdKernel {
        &self.kernel
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Number of strictly positive eigenvalues.
    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().take_while(|&&l| l > 0.0).count()
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// ξ_n at the nodes.
    pub fn eigenfunction(&self, n: usize) -> Vec<f64> {
        self.eigenfunctions.column(n).iter().copied().collect()
    }

    /// ξ_n(x) off the nodes by Nyström extension (1/λ_n) Σ w_j F(x − x_j) ξ_n(x_j).
    pub fn eval_eigenfunction(&self, n: usize, x: f64) -> f64 {
        let col = self.eigenfunctions.column(n);
        let s: f64 =
            (0..self.nodes.len()).map(|j| self.weights[j] * self.kernel.value(x - self.nodes[j]) * col[j]).sum();
        s / self.eigenvalues[n]
    }

    /// Discrete T_F applied to node samples.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.nodes.len())
            .map(|i| {
                (0..self.nodes.len())
                    .map(|j| self.weights[j] * self.kernel.value(self.nodes[i] - self.nodes[j]) * f[j])
                    .sum()
            })
            .collect()
    }

    /// Max-norm residual |T ξ_n − λ_n ξ_n| of the discrete operator.
    pub fn eigen_residual(&self, n: usize) -> f64 {
        let xi = self.eigenfunction(n);
        let t = self.apply(&xi);
        t.iter().zip(&xi).map(|(p, q)| (p - self.eigenvalues[n] * q).abs()).fold(0.0, f64::max)
    }

    /// Max deviation of the weighted Gram of the first `count` eigenfunctions from I.
    pub fn orthonormality_defect(&self, count: usize) -> f64 {
        let count = count.min(self.nodes.len());
        let mut worst: f64 = 0.0;
        for p in 0..count {
            for q in p..count {
                let g: f64 = (0..self.nodes.len())
                    .map(|i| self.weights[i] * self.eigenfunctions[(i, p)] * self.eigenfunctions[(i, q)])
                    .sum();
                let target = if p == q { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    fn check_rank(&self, m: usize) -> Result<()> {
        let available = self.rank();
        if m > available {
            return Err(Error::Rank { requested: m, available });
        }
        Ok(())
    }

    /// ⟨ξ_n, h⟩ for n < m, with the Nyström weights.
    pub fn coefficients(&self, h: impl Fn(f64) -> Complex64, m: usize) -> Result<Vec<Complex64>> {
        self.check_rank(m)?;
        let hv: Vec<Complex64> = self.nodes.iter().map(|&x| h(x)).collect();
        Ok((0..m)
            .map(|n| {
                let col = self.eigenfunctions.column(n);
                (0..self.nodes.len()).map(|i| hv[i] * (self.weights[i] * col[i])).sum()
            })
            .collect())
    }

    /// Σ_{n<N} λ_n ξ_n(x) ξ_n(y).
    pub fn kernel_reconstruct(&self, n_terms: usize, x: f64, y: f64) -> Result<f64> {
        self.check_rank(n_terms)?;
        Ok((0..n_terms)
            .map(|n| self.eigenvalues[n] * self.eval_eigenfunction(n, x) * self.eval_eigenfunction(n, y))
            .sum())
    }

    /// Σ_{n<m} λ_n⁻¹ conj⟨ξ_n, h⟩ ⟨ξ_n, k⟩, the H_F inner product through the
    /// rank-m truncation of T_F⁻¹.
    pub fn hf_inner_via_inverse(
        &self,
        h: impl Fn(f64) -> Complex64,
        k: impl Fn(f64) -> Complex64,
        m: usize,
    ) -> Result<Complex64> {
        let ch = self.coefficients(h, m)?;
        let ck = self.coefficients(k, m)?;
        Ok((0..m).map(|n| ch[n].conj() * ck[n] / self.eigenvalues[n]).sum())
    }

    /// CSV rows (n, λ_n) at full precision.
    pub fn write_eigenvalues_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "eigenvalue"])?;
        for (n, l) in self.eigenvalues.iter().enumerate() {
            w.write_record([(n + 1).to_string(), format!("{l:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV rows (x, ξ_1(x), …, ξ_count(x)) at the nodes.
    pub fn write_eigenfunctions_csv<W: Write>(&self, out: W, count: usize) -> Result<()> {
        let count = count.min(self.nodes.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["x".to_string()];
        header.extend((1..=count).map(|n| format!("xi_{n}")));
        w.write_record(&header)?;
        for (i, x) in self.nodes.iter().enumerate() {
            let mut row = vec![format!("{x:.16e}")];
            row.extend((0..count).map(|n| format!("{:.16e}", self.eigenfunctions[(i, n)])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            kernel: String,
            nodes: usize,
            trace: f64,
            eigenvalues: &'a [f64],
        }
        Ok(serde_json::to_string_pretty(&Summary {
            kernel: self.kernel.name(),
            nodes: self.nodes.len(),
            trace: self.trace(),
            eigenvalues: &self.eigenvalues,
        })?)
    }
}

/// T_F f on a uniform grid of [0, a] with the integral split at the diagonal
/// and Gregory weights on each side.
pub fn apply_operator(kernel: &PdKernel, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let grid = UniformGrid::new(0.0, kernel.half_width(), n);
    let h = grid.step();
    let x = grid.points();
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            if i > 0 {
                let w = uniform_weights(i + 1, h);
                s += (0..=i).map(|j| w[j] * kernel.value(x[i] - x[j]) * f[j]).sum::<f64>();
            }
            if i + 1 < n {
                let w = uniform_weights(n - i, h);
                s += (i..n).map(|j| w[j - i] * kernel.value(x[i] - x[j]) * f[j]).sum::<f64>();
            }
            s
        })
        .collect()
}

/// 2∫₀^x sinh(y − x) f(y) dy + e^x ∫₀¹ e^{−y} f(y) dy: T_F for e^{−|x|} on
/// [0, 1] as a Volterra operator plus a rank-one term.
pub fn volterra_apply(f: &[f64]) -> Result<Vec<f64>> {
    let n = f.len();
    if n < 5 {
        return Err(Error::Invalid("need at least five samples".into()));
    }
    let grid = UniformGrid::new(0.0, 1.0, n);
    let h = grid.step();
    let x = grid.points();
    let cumulative = |g: &dyn Fn(usize) -> f64, i: usize| -> f64 {
        if i == 0 {
            return 0.0;
        }
        let w = uniform_weights(i + 1, h);
        (0..=i).map(|j| w[j] * g(j)).sum()
    };
    let up = |j: usize| x[j].exp() * f[j];
    let down = |j: usize| (-x[j]).exp() * f[j];
    let rank_one = cumulative(&down, n - 1);
    Ok((0..n)
        .map(|i| {
            let p = cumulative(&up, i);
            let q = cumulative(&down, i);
            (-x[i]).exp() * p - x[i].exp() * q + x[i].exp() * rank_one
        })
        .collect())
}

/// φ recovered from f = T_F φ on the interior grid, with the boundary
/// conditions that the range of T_F must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreensInverse {
    pub x: Vec<f64>,
    pub phi: Vec<Complex64>,
    /// Residuals of the two boundary conditions.
    pub boundary_residuals: [f64; 2],
    /// Set when a boundary residual exceeds the tolerance.
    pub boundary_warning: bool,
}

/// Exponential kernel: φ = ½(f − f''), boundary conditions f(0) = f'(0),
/// f(1) = −f'(1). Triangle kernel on (0, a): φ = −½ f'', boundary conditions
/// f'(0) + f'(a) = 0 and f(0) + f(a) = (2 − a) f'(0).
pub fn greens_inverse_apply(f: &SampledElement, kernel: &PdKernel, tol: f64) -> Result<GreensInverse> {
    let b = f.boundary();
    let a = f.half_width();
    let (scale, identity, residuals) = match kernel.family() {
        KernelFamily::Exp => {
            require_exp(kernel)?;
            (0.5, 0.5, [(b.h0 - b.dh0).norm(), (b.ha + b.dha).norm()])
        }
        KernelFamily::Triangle => (0.5, 0.0, [(b.dh0 + b.dha).norm(), (b.h0 + b.ha - (2.0 - a) * b.dh0).norm()]),
        _ => return Err(Error::Invalid(format!("no Green's inverse for kernel {}", kernel.name()))),
    };
    let grid = f.grid();
    let d2 = second_derivative4(f.values(), grid.step());
    let mut x = Vec::new();
    let mut phi = Vec::new();
    for (i, d) in d2.iter().enumerate() {
        if let Some(d) = d {
            x.push(grid.x(i));
            phi.push(identity * f.values()[i] - scale * d);
        }
    }
    let boundary_warning = residuals.iter().any(|&r| r > tol);
    Ok(GreensInverse { x, phi, boundary_residuals: residuals, boundary_warning })
}
