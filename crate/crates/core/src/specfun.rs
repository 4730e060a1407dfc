//! Scalar special functions: log-Gamma, the modified Bessel function `I_nu`
//! and the normalized Bessel function `j_nu`.
//!
//! `I_nu` uses its power series below `25 + nu^2` and the Hankel asymptotic
//! expansion above. All series terms are positive for `nu >= -1/2`, so the
//! series is stable on the whole range where it is used; the crossover only
//! controls cost. Kernel code works with the *reduced scaled* form
//! `e^{-x} (x/2)^{-nu} I_nu(x)`, which is entire in `x`, bounded, and free of
//! overflow.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::quadrature::{cached_gauss_jacobi, Rule};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the Gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma(x))
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x < 0.5 {
        return ln_gamma(x + 1.0) - x.ln();
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `Gamma(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    log_gamma(x).map(f64::exp)
}

/// A single evaluation of `I_nu(x)` together with its scaled form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub nu: f64,
    pub x: f64,
    pub value: f64,
    pub scaled_value: f64,
}

impl BesselEval {
    pub fn new(nu: f64, x: f64) -> Result<Self> {
        let scaled_value = bessel_i_scaled(nu, x)?;
        Ok(BesselEval { nu, x, value: scaled_value * x.exp(), scaled_value })
    }
}

fn check_i_args(nu: f64, x: f64) -> Result<()> {
    if !(nu >= -0.5) || !nu.is_finite() {
        return Err(domain(format!("Bessel order must be >= -1/2, got {nu}")));
    }
    if !(x >= 0.0) || x.is_nan() {
        return Err(domain(format!("Bessel argument must be >= 0, got {x}")));
    }
    Ok(())
}

/// Modified Bessel function of the first kind, `I_nu(x)`.
///
/// Overflows to `+inf` beyond `x ~ 709`; use [`bessel_i_scaled`] there.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    bessel_i_scaled(nu, x).map(|s| s * x.exp())
}

/// `e^{-x} I_nu(x)`, finite for all `x >= 0` (except `nu = -1/2` at `x = 0`).
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    check_i_args(nu, x)?;
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(i_scaled(nu, x))
}

/// `e^{-x} (x/2)^{-nu} I_nu(x)`: entire in `x`, equal to `1/Gamma(nu+1)` at 0.
pub fn bessel_i_reduced_scaled(nu: f64, x: f64) -> Result<f64> {
    check_i_args(nu, x)?;
    Ok(i_reduced_scaled(nu, x))
}

#[inline]
pub(crate) fn hankel_threshold(nu: f64) -> f64 {
    25.0 + nu * nu
}

pub(crate) fn i_scaled(nu: f64, x: f64) -> f64 {
    if x < hankel_threshold(nu) {
        let r = i_series_reduced_scaled(nu, x);
        if nu == 0.0 {
            r
        } else {
            r * (0.5 * x).powf(nu)
        }
    } else {
        i_hankel_scaled(nu, x)
    }
}

pub(crate) fn i_reduced_scaled(nu: f64, x: f64) -> f64 {
    if x < hankel_threshold(nu) {
        i_series_reduced_scaled(nu, x)
    } else {
        i_hankel_scaled(nu, x) * (0.5 * x).powf(-nu)
    }
}

/// Power series for `e^{-x} (x/2)^{-nu} I_nu(x)`; every term is positive.
pub(crate) fn i_series_reduced_scaled(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = (-x - ln_gamma(nu + 1.0)).exp();
    let mut sum = term;
    let half = 0.5 * x;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + nu));
        sum += term;
        if (term <= 1e-17 * sum && m > half) || m > 5000.0 {
            break;
        }
    }
    sum
}

/// Hankel expansion `e^{-x} I_nu(x) ~ (2 pi x)^{-1/2} sum (-1)^m a_m(nu) / x^m`.
pub(crate) fn i_hankel_scaled(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for m in 1..400 {
        let mf = m as f64;
        let odd = 2.0 * mf - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * mf * x);
        if next == 0.0 {
            break;
        }
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// `e^{-w} (w/2)^{-nu} [I_nu(w) - I_{nu+1}(w)]`, computed without the
/// cancellation of the naive difference when `w` is large.
pub(crate) fn i_diff_reduced_scaled(nu: f64, w: f64) -> f64 {
    if w < hankel_threshold(nu + 1.0) {
        let a = i_series_reduced_scaled(nu, w);
        let b = i_series_reduced_scaled(nu + 1.0, w);
        return a - 0.5 * w * b;
    }
    // Difference of the two Hankel series, coefficient by coefficient.
    let mu0 = 4.0 * nu * nu;
    let mu1 = 4.0 * (nu + 1.0) * (nu + 1.0);
    let (mut t0, mut t1) = (1.0_f64, 1.0_f64);
    let mut sum = 0.0_f64;
    let mut last = f64::INFINITY;
    for m in 1..400 {
        let mf = m as f64;
        let odd = 2.0 * mf - 1.0;
        t0 *= -(mu0 - odd * odd) / (8.0 * mf * w);
        t1 *= -(mu1 - odd * odd) / (8.0 * mf * w);
        let d = t0 - t1;
        if d.abs() > last && m > 2 {
            break;
        }
        sum += d;
        last = d.abs();
        if (t0 == 0.0 && t1 == 0.0) || (d.abs() < 1e-17 * sum.abs()) {
            break;
        }
    }
    sum / (2.0 * PI * w).sqrt() * (0.5 * w).powf(-nu)
}

/// Normalized Bessel function `j_nu(theta) = Gamma(nu+1) (theta/2)^{-nu} J_nu(theta)`,
/// with `j_nu(0) = 1`. Even in `theta`.
///
/// Below `30 + nu^2` this integrates the Poisson representation
/// `j_nu(theta) ∝ ∫ (1-u^2)^{nu-1/2} cos(theta u) du` with a Gauss–Gegenbauer
/// rule; above it uses the Hankel asymptotic expansion.
pub fn bessel_j_normalized(nu: f64, theta: f64) -> Result<f64> {
    if !(nu >= -0.5) || !nu.is_finite() {
        return Err(domain(format!("Bessel order must be >= -1/2, got {nu}")));
    }
    if !theta.is_finite() {
        return Err(domain("Bessel argument must be finite"));
    }
    Ok(j_normalized(nu, theta))
}

pub(crate) fn j_threshold(nu: f64) -> f64 {
    30.0 + nu * nu
}

/// Number of Gauss nodes that resolves `e^{i theta u}` on `[-1, 1]` to rounding.
pub(crate) fn oscillatory_rule_size(theta_max: f64) -> usize {
    let t = theta_max.abs();
    (0.5 * t + 6.0 * t.cbrt() + 24.0).ceil() as usize
}

fn gegenbauer_rule(nu: f64) -> Arc<Rule> {
    let a = nu - 0.5;
    cached_gauss_jacobi(oscillatory_rule_size(j_threshold(nu)), a, a)
}

pub(crate) fn j_normalized(nu: f64, theta: f64) -> f64 {
    let t = theta.abs();
    if nu == -0.5 {
        return t.cos();
    }
    if t < j_threshold(nu) {
        let rule = gegenbauer_rule(nu);
        let mut num = 0.0;
        let mut den = 0.0;
        for (u, w) in rule.nodes.iter().zip(&rule.weights) {
            num += w * (t * u).cos();
            den += w;
        }
        num / den
    } else {
        let (p, q) = hankel_pq(nu, t);
        let omega = t - 0.5 * nu * PI - 0.25 * PI;
        let j = (2.0 / (PI * t)).sqrt() * (p * omega.cos() - q * omega.sin());
        j * (ln_gamma(nu + 1.0) - nu * (0.5 * t).ln()).exp()
    }
}

/// Hankel's `P` and `Q` series for `J_nu`.
pub(crate) fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut a = 1.0_f64;
    let mut p = 1.0_f64;
    let mut q = 0.0_f64;
    for m in 1..400 {
        let mf = m as f64;
        let odd = 2.0 * mf - 1.0;
        let next = a * (mu - odd * odd) / (8.0 * mf * x);
        if next == 0.0 || (next.abs() >= a.abs() && m > 1) {
            break;
        }
        a = next;
        // a_m / x^m enters P for even m and Q for odd m, with alternating signs.
        match m % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_gamma_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!((log_gamma(0.5).unwrap() - 0.5 * PI.ln()).abs() < 1e-13);
        assert!((log_gamma(5.0).unwrap() - 24f64.ln()).abs() < 1e-13);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.0).is_err());
    }

    #[test]
    fn log_gamma_matches_factorials_and_stirling() {
        let mut lf = 0.0;
        for n in 1..150 {
            // ln Gamma(n+1) = ln n!
            lf += (n as f64).ln();
            assert!((log_gamma(n as f64 + 1.0).unwrap() - lf).abs() < 1e-12 * lf.max(1.0), "n={n}");
        }
        // Stirling series at 200 with four correction terms.
        let x = 200.0_f64;
        let st = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5));
        assert!((log_gamma(x).unwrap() - st).abs() < 1e-12);
        // Recurrence across [0.1, 1].
        for i in 1..=10 {
            let x = 0.1 * i as f64;
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + x.ln();
            assert!((lhs - rhs).abs() < 1e-13);
        }
    }

    #[test]
    fn half_integer_closed_forms() {
        // I_{1/2}(x) = sqrt(2/(pi x)) sinh x, I_{3/2}(x) = sqrt(2/(pi x)) (cosh x - sinh x / x)
        let v = bessel_i(0.5, 1.0).unwrap();
        assert!(rel(v, (2.0 / PI).sqrt() * 1f64.sinh()) < 1e-13);
        assert!((v - 0.937_674_888_245_487_6).abs() < 1e-12);
        let v = bessel_i(1.5, 1.0).unwrap();
        assert!(rel(v, (2.0 / PI).sqrt() * (1f64.cosh() - 1f64.sinh())) < 1e-13);
        assert!((v - 0.293_525_326_347_479_6).abs() < 1e-12);
        for &x in &[0.3, 2.0, 10.0, 24.0, 26.0, 60.0, 300.0] {
            let s = bessel_i_scaled(0.5, x).unwrap();
            let exact = (2.0 / (PI * x)).sqrt() * 0.5 * (1.0 - (-2.0 * x).exp());
            assert!(rel(s, exact) < 1e-13, "x={x}");
            let s = bessel_i_scaled(-0.5, x).unwrap();
            let exact = (2.0 / (PI * x)).sqrt() * 0.5 * (1.0 + (-2.0 * x).exp());
            assert!(rel(s, exact) < 1e-13, "x={x}");
        }
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(2.0, 0.0).unwrap(), 0.0);
        assert!((bessel_i_reduced_scaled(1.5, 0.0).unwrap() - 1.0 / gamma(2.5).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_i(-0.6, 1.0).is_err());
        assert!(bessel_i(1.0, -1.0).is_err());
        assert!(bessel_i(1.0, f64::NAN).is_err());
    }

    #[test]
    fn recurrence_holds() {
        // I_{nu-1} - I_{nu+1} = (2 nu / x) I_nu
        for i in 0..20 {
            let nu = 0.5 + 9.5 * i as f64 / 19.0;
            for j in 0..30 {
                let x = 0.1 + 49.9 * j as f64 / 29.0;
                let a = i_scaled(nu - 1.0, x);
                let b = i_scaled(nu + 1.0, x);
                let c = i_scaled(nu, x);
                let lhs = a - b;
                let rhs = 2.0 * nu / x * c;
                assert!(rel(lhs, rhs) < 1e-8, "nu={nu} x={x} {lhs} {rhs}");
            }
        }
    }

    #[test]
    fn series_and_hankel_agree_in_overlap() {
        for &nu in &[-0.5, -0.2, 0.0, 0.3, 0.5, 1.0, 1.5, 2.7, 4.0] {
            let x0 = hankel_threshold(nu);
            for i in 0..20 {
                let x = x0 * (1.0 + 2.0 * i as f64 / 19.0);
                let s = i_series_reduced_scaled(nu, x) * (0.5 * x).powf(nu);
                let h = i_hankel_scaled(nu, x);
                assert!(rel(s, h) < 1e-12, "nu={nu} x={x}: {s} vs {h}");
            }
        }
    }

    #[test]
    fn diff_form_matches_direct_difference() {
        for &nu in &[-0.5, 0.5, 1.5, 0.3] {
            for &w in &[0.5, 5.0, 20.0, 40.0, 80.0, 400.0] {
                let direct = i_reduced_scaled(nu, w) - 0.5 * w * i_reduced_scaled(nu + 1.0, w);
                let d = i_diff_reduced_scaled(nu, w);
                assert!((d - direct).abs() <= 1e-12 * direct.abs().max(1e-300) + 1e-14 * i_reduced_scaled(nu, w), "nu={nu} w={w}: {d} vs {direct}");
            }
        }
        // nu = -1/2: e^{-w} (w/2)^{1/2} [I_{-1/2} - I_{1/2}] = e^{-2w} / sqrt(pi)
        for &w in &[30.0, 100.0, 1000.0] {
            let d = i_diff_reduced_scaled(-0.5, w);
            assert!(rel(d, (-2.0 * w).exp() / PI.sqrt()) < 1e-12 || d.abs() < 1e-300);
        }
    }

    #[test]
    fn scaled_stays_finite_for_huge_arguments() {
        for &x in &[1e3, 1e4, 1e5, 1e6] {
            let s = bessel_i_scaled(1.3, x).unwrap();
            assert!(s.is_finite() && s > 0.0);
            assert!(rel(s, 1.0 / (2.0 * PI * x).sqrt()) < 1e-3);
        }
    }

    #[test]
    fn normalized_j_closed_forms() {
        // j_{1/2}(t) = sin t / t, j_{3/2}(t) = 3 (sin t - t cos t) / t^3
        for &t in &[0.0, 0.4, 3.0, 12.0, 29.0, 31.0, 45.0, 120.0, 800.0] {
            let a = j_normalized(0.5, t);
            let exact = if t == 0.0 { 1.0 } else { t.sin() / t };
            assert!((a - exact).abs() < 1e-12, "t={t}: {a} vs {exact}");
            let b = j_normalized(1.5, t);
            let exact = if t == 0.0 { 1.0 } else { 3.0 * (t.sin() - t * t.cos()) / t.powi(3) };
            assert!((b - exact).abs() < 1e-12, "t={t}: {b} vs {exact}");
        }
    }

    #[test]
    fn normalized_j_series_oracle() {
        // Power series with alternating terms, accurate for small arguments.
        fn series(nu: f64, t: f64) -> f64 {
            let q = -0.25 * t * t;
            let mut term = 1.0;
            let mut sum = 1.0;
            for m in 1..80 {
                let mf = m as f64;
                term *= q / (mf * (mf + nu));
                sum += term;
            }
            sum
        }
        for &nu in &[-0.2, 0.3, 0.8, 1.7, 3.0] {
            for &t in &[0.1, 1.0, 4.0, 7.5] {
                assert!((j_normalized(nu, t) - series(nu, t)).abs() < 1e-12, "nu={nu} t={t}");
            }
        }
    }

    #[test]
    fn normalized_j_quadrature_and_hankel_overlap() {
        for &nu in &[-0.2, 0.3, 0.8, 1.7, 3.0] {
            let t0 = j_threshold(nu);
            let big = cached_gauss_jacobi(oscillatory_rule_size(4.0 * t0), nu - 0.5, nu - 0.5);
            for i in 0..10 {
                let t = t0 * (1.0 + 2.0 * i as f64 / 9.0);
                let num: f64 = big.nodes.iter().zip(&big.weights).map(|(u, w)| w * (t * u).cos()).sum();
                let den: f64 = big.weights.iter().sum();
                let quad = num / den;
                let asym = j_normalized(nu, t);
                assert!((quad - asym).abs() < 1e-11, "nu={nu} t={t}: {quad} vs {asym}");
            }
        }
    }
}
