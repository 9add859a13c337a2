//! Positive definite functions on a symmetric interval (−a, a).
//!
//! All built-in families are real, even and normalized so that F(0) = 1.
//! Each family knows its Bochner measure in the angular convention
//! F(x) = ∫ e^{iλx} dμ(λ).

mod interval;
mod spectral;

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_min_eigenvalue;

pub use interval::{concentration, cross_energy, Concentration, MeasureOnInterval};
pub use spectral::{
    bochner_transform, deficiency_indices, second_moment, MomentReport, MomentVerdict, SpectralMeasure, TailDescriptor,
};

/// Absolute tolerance on Gram minimum eigenvalues.
pub const EPS_PSD: f64 = 1e-9;

/// Kernel family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    /// e^{−|x|}
    Exp,
    /// 1 − |x|
    Triangle,
    /// (sin πx / πx)^k
    BSpline(u32),
    /// Cubic B-spline B^{*4}, rescaled to value 1 at the origin.
    CubicSpline,
    /// Cubic Hermite interpolation of a table (x, F, F').
    Tabulated,
}

/// Tabulated even kernel: rows (x, F(x), F'(x)) with x ascending from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    x: Vec<f64>,
    f: Vec<f64>,
    df: Vec<f64>,
}

impl KernelTable {
    /// Rows must be sorted by x. A table starting at x = 0 is extended evenly;
    /// a table covering [−a, a] is used as is.
    pub fn new(x: Vec<f64>, f: Vec<f64>, df: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.len() != f.len() || x.len() != df.len() {
            return Err(Error::Invalid("table needs at least two rows of (x, F, F')".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("table abscissae must be strictly increasing".into()));
        }
        if x[0] != 0.0 && (x[0] + x[x.len() - 1]).abs() > 1e-12 * x[x.len() - 1].abs().max(1.0) {
            return Err(Error::Invalid("table must start at 0 or be symmetric about 0".into()));
        }
        if x[x.len() - 1] <= 0.0 {
            return Err(Error::Invalid("table must extend to positive x".into()));
        }
        Ok(KernelTable { x, f, df })
    }

    /// Reads CSV rows `x,F,F'`; non-numeric rows (headers) are skipped.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
        let (mut x, mut f, mut df) = (Vec::new(), Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec.iter().filter_map(|s| s.parse::<f64>().ok()).collect();
            if vals.len() < 3 || rec.len() < 3 {
                continue;
            }
            x.push(vals[0]);
            f.push(vals[1]);
            df.push(vals[2]);
        }
        KernelTable::new(x, f, df)
    }

    fn half_width(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn even(&self) -> bool {
        self.x[0] == 0.0
    }

    /// (F, F') at x by cubic Hermite interpolation.
    fn eval(&self, x: f64) -> (f64, f64) {
        let (xx, sign) = if self.even() { (x.abs(), if x < 0.0 { -1.0 } else { 1.0 }) } else { (x, 1.0) };
        let n = self.x.len();
        let i = match self.x.binary_search_by(|p| p.total_cmp(&xx)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let t = ((xx - self.x[i]) / h).clamp(0.0, 1.0);
        let (t2, t3) = (t * t, t * t * t);
        let f = (2.0 * t3 - 3.0 * t2 + 1.0) * self.f[i]
            + (t3 - 2.0 * t2 + t) * h * self.df[i]
            + (-2.0 * t3 + 3.0 * t2) * self.f[i + 1]
            + (t3 - t2) * h * self.df[i + 1];
        let d = (6.0 * t2 - 6.0 * t) / h * self.f[i]
            + (3.0 * t2 - 4.0 * t + 1.0) * self.df[i]
            + (-6.0 * t2 + 6.0 * t) / h * self.f[i + 1]
            + (3.0 * t2 - 2.0 * t) * self.df[i + 1];
        (f, sign * d)
    }
}

/// A continuous positive definite function on (−a, a).
#[derive(Debug, Clone)]
pub struct PdKernel {
    family: KernelFamily,
    half_width: f64,
    table: Option<Arc<KernelTable>>,
    measure: Option<Arc<SpectralMeasure>>,
}

impl PdKernel {
    /// e^{−|x|} on (−1, 1).
    pub fn exp() -> Self {
        PdKernel { family: KernelFamily::Exp, half_width: 1.0, table: None, measure: None }
    }

    /// 1 − |x| on (−½, ½).
    pub fn triangle() -> Self {
        PdKernel { family: KernelFamily::Triangle, half_width: 0.5, table: None, measure: None }
    }

    /// Normalized cubic B-spline 1 − (3/2)x² + (3/4)|x|³ on (−½, ½).
    pub fn cubic_spline() -> Self {
        PdKernel { family: KernelFamily::CubicSpline, half_width: 0.5, table: None, measure: None }
    }

    pub fn tabulated(table: KernelTable) -> Self {
        PdKernel {
            family: KernelFamily::Tabulated,
            half_width: table.half_width(),
            table: Some(Arc::new(table)),
            measure: None,
        }
    }

    /// Same kernel on a different interval (−a, a).
    pub fn with_half_width(mut self, a: f64) -> Result<Self> {
        let max = match self.family {
            KernelFamily::Exp | KernelFamily::BSpline(_) => f64::INFINITY,
            KernelFamily::Triangle => 1.0,
            KernelFamily::CubicSpline => 2.0,
            KernelFamily::Tabulated => self.half_width,
        };
        if !(a > 0.0 && a <= max) {
            return Err(Error::Domain(format!("half width {a} not in (0, {max}]")));
        }
        self.half_width = a;
        Ok(self)
    }

    /// Attaches an extension measure (a μ with μ̂ = F on the interval).
    pub fn with_measure(mut self, measure: SpectralMeasure) -> Self {
        self.measure = Some(Arc::new(measure));
        self
    }

    /// Parses "exp", "triangle", "cubic", "bspline:k" or "table:<path>".
    pub fn from_spec(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(k) = spec.strip_prefix("bspline:") {
            let k: u32 = k.parse().map_err(|_| Error::Parse(format!("bad B-spline order in {spec:?}")))?;
            return bspline_kernel(k);
        }
        if let Some(path) = spec.strip_prefix("table:") {
            return Ok(PdKernel::tabulated(KernelTable::from_csv(Path::new(path))?));
        }
        match spec {
            "exp" => Ok(PdKernel::exp()),
            "triangle" => Ok(PdKernel::triangle()),
            "cubic" => Ok(PdKernel::cubic_spline()),
            _ => Err(Error::Parse(format!("unknown kernel {spec:?}"))),
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value(0.0)
    }

    pub fn name(&self) -> String {
        match self.family {
            KernelFamily::Exp => "exp".into(),
            KernelFamily::Triangle => "triangle".into(),
            KernelFamily::BSpline(k) => format!("bspline:{k}"),
            KernelFamily::CubicSpline => "cubic".into(),
            KernelFamily::Tabulated => "table".into(),
        }
    }

    fn in_domain(&self, x: f64) -> bool {
        x.abs() <= self.half_width * (1.0 + 1e-12)
    }

    /// F(x) without the domain check (the closed forms are valid beyond a).
    pub fn value(&self, x: f64) -> f64 {
        let ax = x.abs();
        match self.family {
            KernelFamily::Exp => (-ax).exp(),
            KernelFamily::Triangle => (1.0 - ax).max(0.0),
            KernelFamily::BSpline(k) => sinc_pi(x).powi(k as i32),
            KernelFamily::CubicSpline => {
                if ax <= 1.0 {
                    1.0 - 1.5 * ax * ax + 0.75 * ax * ax * ax
                } else if ax <= 2.0 {
                    0.25 * (2.0 - ax).powi(3)
                } else {
                    0.0
                }
            }
            KernelFamily::Tabulated => self.table.as_ref().expect("table").eval(x).0,
        }
    }

    /// F(x) with the domain check |x| ≤ a.
    pub fn evaluate(&self, x: f64) -> Result<Complex64> {
        if !self.in_domain(x) {
            return Err(Error::Domain(format!("|x| = {} exceeds half width {}", x.abs(), self.half_width)));
        }
        Ok(Complex64::new(self.value(x), 0.0))
    }

    /// F'(x) for x ≠ 0; at 0 the mean of the one-sided derivatives.
    pub fn derivative(&self, x: f64) -> f64 {
        if x == 0.0 {
            let (l, r) = self.one_sided_at_zero();
            return 0.5 * (l + r);
        }
        let ax = x.abs();
        let s = x.signum();
        match self.family {
            KernelFamily::Exp => -s * (-ax).exp(),
            KernelFamily::Triangle => {
                if ax < 1.0 {
                    -s
                } else {
                    0.0
                }
            }
            KernelFamily::BSpline(k) => {
                let k = k as i32;
                k as f64 * sinc_pi(x).powi(k - 1) * sinc_pi_derivative(x)
            }
            KernelFamily::CubicSpline => {
                if ax <= 1.0 {
                    -3.0 * x + 2.25 * x * ax
                } else if ax <= 2.0 {
                    -0.75 * s * (2.0 - ax).powi(2)
                } else {
                    0.0
                }
            }
            KernelFamily::Tabulated => self.table.as_ref().expect("table").eval(x).1,
        }
    }

    /// (F'(0−), F'(0+)).
    pub fn one_sided_at_zero(&self) -> (f64, f64) {
        match self.family {
            KernelFamily::Exp | KernelFamily::Triangle => (1.0, -1.0),
            KernelFamily::BSpline(_) | KernelFamily::CubicSpline => (0.0, 0.0),
            KernelFamily::Tabulated => {
                let t = self.table.as_ref().expect("table");
                let r = t.eval(0.0).1;
                if t.even() {
                    (-r, r)
                } else {
                    (r, r)
                }
            }
        }
    }

    /// F'(u) where u → 0 is approached from the side given by `side`
    /// (positive: from the right).
    pub fn derivative_from(&self, u: f64, side: f64) -> f64 {
        if u == 0.0 {
            let (l, r) = self.one_sided_at_zero();
            if side > 0.0 {
                r
            } else if side < 0.0 {
                l
            } else {
                0.5 * (l + r)
            }
        } else {
            self.derivative(u)
        }
    }

    /// The Bochner measure of the family, if one is known or attached.
    pub fn spectral_measure(&self) -> Option<SpectralMeasure> {
        if let Some(m) = &self.measure {
            return Some((**m).clone());
        }
        match self.family {
            KernelFamily::Exp => Some(SpectralMeasure::cauchy()),
            KernelFamily::Triangle => Some(SpectralMeasure::triangle()),
            KernelFamily::BSpline(k) => Some(SpectralMeasure::bspline(k)),
            KernelFamily::CubicSpline => Some(SpectralMeasure::cubic_spline()),
            KernelFamily::Tabulated => None,
        }
    }
}

/// sin(πx)/(πx) with the series near 0.
pub fn sinc_pi(x: f64) -> f64 {
    let u = PI * x;
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

fn sinc_pi_derivative(x: f64) -> f64 {
    let u = PI * x;
    if u.abs() < 1e-4 {
        PI * (-u / 3.0 + u * u * u / 30.0)
    } else {
        PI * (u * u.cos() - u.sin()) / (u * u)
    }
}

/// Density of the k-fold convolution power of χ_{(−½,½)} (Irwin–Hall, centred).
pub fn bspline_density(k: u32, nu: f64) -> f64 {
    let k = k as i32;
    let half = k as f64 / 2.0;
    if nu.abs() >= half {
        return 0.0;
    }
    let mut s = 0.0;
    let mut binom = 1.0;
    let mut fact = 1.0;
    for j in 1..k {
        fact *= j as f64;
    }
    for j in 0..=k {
        let t = nu + half - j as f64;
        if t > 0.0 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom * t.powi(k - 1);
        }
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    (s / fact).max(0.0)
}

/// F_k(x) = (sin πx / πx)^k on (−½, ½).
pub fn bspline_kernel(k: u32) -> Result<PdKernel> {
    if k == 0 {
        return Err(Error::Domain("B-spline order must be positive".into()));
    }
    Ok(PdKernel { family: KernelFamily::BSpline(k), half_width: 0.5, table: None, measure: None })
}

/// F(x) with the domain check.
pub fn evaluate_kernel(kernel: &PdKernel, x: f64) -> Result<Complex64> {
    kernel.evaluate(x)
}

/// Gram matrix [F(x_i − x_j)] for points in [0, a].
pub fn gram_matrix(kernel: &PdKernel, points: &[f64]) -> Result<DMatrix<f64>> {
    let a = kernel.half_width();
    if let Some(p) = points.iter().find(|&&p| !(-1e-12..=a * (1.0 + 1e-12)).contains(&p)) {
        return Err(Error::Domain(format!("point {p} outside [0, {a}]")));
    }
    let n = points.len();
    Ok(DMatrix::from_fn(n, n, |i, j| kernel.value(points[i] - points[j])))
}

/// Result of random Gram-matrix trials.
#[derive(Debug, Clone, Serialize)]
pub struct PsdReport {
    pub min_eigenvalues: Vec<f64>,
    pub worst: f64,
    pub pass: bool,
}

/// Draws `trials` sets of `n_points` uniform points in [0, a] and records the
/// Gram minimum eigenvalue of each; passes iff all are ≥ −EPS_PSD.
pub fn check_positive_definite(kernel: &PdKernel, n_points: usize, trials: usize, seed: u64) -> Result<PsdReport> {
    if n_points < 2 {
        return Err(Error::Invalid("need at least two points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = kernel.half_width();
    let mut mins = Vec::with_capacity(trials);
    for _ in 0..trials {
        let pts: Vec<f64> = (0..n_points).map(|_| rng.random_range(0.0..=a)).collect();
        let g = gram_matrix(kernel, &pts)?;
        mins.push(symmetric_min_eigenvalue(g));
    }
    let worst = mins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PsdReport { pass: worst >= -EPS_PSD, worst, min_eigenvalues: mins })
}
