//! Special functions used for tail corrections.

use num_complex::Complex64;

use crate::quad::GaussRule;

/// Trigamma function ψ'(x) for x > 0.
pub fn trigamma(mut x: f64) -> f64 {
    assert!(x > 0.0, "trigamma needs a positive argument");
    let mut acc = 0.0;
    while x < 16.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + 1.0 / x + x2 / 2.0 + (1.0 / x) * x2 * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 42.0 - x2 * (1.0 / 30.0))))
}

/// Σ_{n > N} 1/(n + s)² for N + 1 + s > 0.
pub fn shifted_square_tail(big_n: u64, s: f64) -> f64 {
    trigamma(big_n as f64 + 1.0 + s)
}

/// ∫_L^∞ λ^{-p} e^{iωλ} dλ for p > 1, L > 0.
pub fn power_tail_fourier(p: f64, l: f64, omega: f64) -> Complex64 {
    assert!(p > 1.0 && l > 0.0);
    if omega == 0.0 {
        return Complex64::new(l.powf(1.0 - p) / (p - 1.0), 0.0);
    }
    if omega < 0.0 {
        return power_tail_fourier(p, l, -omega).conj();
    }
    let z = omega * l;
    if z < 1e-280 {
        return Complex64::new(l.powf(1.0 - p) / (p - 1.0), 0.0);
    }
    omega.powf(p - 1.0) * unit_tail(p, z)
}

/// ∫_z^∞ u^{-p} e^{iu} du.
fn unit_tail(p: f64, z: f64) -> Complex64 {
    const SWITCH: f64 = 40.0;
    if z >= SWITCH {
        return asymptotic_tail(p, z);
    }
    let rule = GaussRule::new(16);
    let f = |u: f64| Complex64::from_polar(u.powf(-p), u);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut lo = z;
    // Geometric panels below 1, unit panels above.
    while lo < 1.0 {
        let hi = (2.0 * lo).min(1.0);
        acc += rule.integrate(lo, hi, f);
        lo = hi;
    }
    while lo < SWITCH {
        let hi = (lo + 1.0).min(SWITCH);
        acc += rule.integrate(lo, hi, f);
        lo = hi;
    }
    acc + asymptotic_tail(p, SWITCH)
}

fn asymptotic_tail(p: f64, z: f64) -> Complex64 {
    // Repeated integration by parts: e^{iz} Σ_m i (-i)^m (p)_m z^{-p-m}.
    let mut term = Complex64::new(0.0, 1.0) * z.powf(-p);
    let mut sum = term;
    let mut prev = term.norm();
    for m in 0..60 {
        let next = term * Complex64::new(0.0, -1.0) * ((p + m as f64) / z);
        let mag = next.norm();
        if mag > prev || mag < 1e-18 * sum.norm() {
            break;
        }
        sum += next;
        term = next;
        prev = mag;
    }
    Complex64::from_polar(1.0, z) * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trigamma_values() {
        assert!((trigamma(1.0) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-13);
        assert!((trigamma(0.5) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-13);
        let direct: f64 =
            (0..2_000_000).map(|k| 1.0 / (k as f64 + 3.25).powi(2)).sum::<f64>() + 1.0 / (2_000_000.0 + 3.25);
        assert!((trigamma(3.25) - direct).abs() < 1e-11);
    }

    #[test]
    fn tail_matches_cosine_integral_identity() {
        // ∫_L^∞ cos(ωλ)/λ² = cos(ωL)/L − ω(π/2 − Si(ωL)); compare against a brute-force sum.
        for &(l, w) in &[(5.0, 0.3), (50.0, 1.0), (1000.0, 0.5), (10.0, 1e-9)] {
            let got = power_tail_fourier(2.0, l, w);
            let rule = GaussRule::new(20);
            let upper = l + 4.0e5;
            let mut brute = Complex64::new(0.0, 0.0);
            let mut lo = l;
            while lo < upper {
                let hi = lo + 0.5;
                brute += rule.integrate(lo, hi, |x: f64| Complex64::from_polar(x.powi(-2), w * x));
                lo = hi;
            }
            // Remaining tail beyond `upper` is bounded by 1/upper in modulus.
            let tol = 2.0 / upper;
            assert!((got - brute).norm() < tol, "L={l} ω={w}: {got} vs {brute}");
        }
    }
}
