//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Bisection on [lo, hi]; `f(lo)` and `f(hi)` must differ in sign.
/// `label` names the bracket in the error message.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, label: &str) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::Bracket(format!("{label} on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A few Newton steps from `x0`, kept only while they stay in [lo, hi] and
/// reduce |f|.
pub fn newton_polish(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, x0: f64, lo: f64, hi: f64) -> f64 {
    let mut x = x0;
    let mut fx = f(x).abs();
    for _ in 0..8 {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let y = x - f(x) / d;
        if !(lo..=hi).contains(&y) {
            break;
        }
        let fy = f(y).abs();
        if fy >= fx {
            break;
        }
        x = y;
        fx = fy;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, "sqrt").unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        assert!(matches!(bisect(|x| x * x + 1.0, -1.0, 1.0, "none"), Err(Error::Bracket(_))));
    }
}
