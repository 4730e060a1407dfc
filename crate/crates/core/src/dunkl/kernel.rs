use num_complex::Complex64;

use super::setup::MultiplicitySetup;
use crate::error::{domain, invalid, Result};
use crate::quadrature::cached_gauss_jacobi;
use crate::specfun::{i_diff_reduced_scaled, i_reduced_scaled, j_normalized, ln_gamma, oscillatory_rule_size};

fn check_k(k: f64) -> Result<()> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(invalid(format!("multiplicity must be finite and >= 0, got {k}")));
    }
    Ok(())
}

fn check_point(v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(domain("kernel arguments must be finite"));
    }
    Ok(())
}

/// `e^{-|z|} E_k(z)` with `E_k(z) = E_k(x, y)`, `z = x y`, in the Bessel form
/// `Γ(k+1/2) [Ĩ_{k-1/2}(|z|) + (z/2) Ĩ_{k+1/2}(|z|)]`, `Ĩ_ν(w) = (w/2)^{-ν} I_ν(w)`.
pub(crate) fn kernel_real_scaled(k: f64, z: f64) -> f64 {
    if k == 0.0 {
        return (z - z.abs()).exp();
    }
    if z == 0.0 {
        return 1.0;
    }
    let w = z.abs();
    let g = ln_gamma(k + 0.5).exp();
    if z > 0.0 {
        g * (i_reduced_scaled(k - 0.5, w) + 0.5 * w * i_reduced_scaled(k + 0.5, w))
    } else {
        g * i_diff_reduced_scaled(k - 0.5, w)
    }
}

/// One-dimensional Dunkl kernel `E_k(x, y)`, Bessel representation.
///
/// Grows like `e^{|xy|}`; use [`dunkl_kernel_1d_scaled`] for large arguments.
pub fn dunkl_kernel_1d(k: f64, x: f64, y: f64) -> Result<f64> {
    check_k(k)?;
    check_point(x)?;
    check_point(y)?;
    let z = x * y;
    if k == 0.0 {
        return Ok(z.exp());
    }
    Ok(kernel_real_scaled(k, z) * z.abs().exp())
}

/// `e^{-|xy|} E_k(x, y)`, finite for all real arguments.
pub fn dunkl_kernel_1d_scaled(k: f64, x: f64, y: f64) -> Result<f64> {
    check_k(k)?;
    check_point(x)?;
    check_point(y)?;
    Ok(kernel_real_scaled(k, x * y))
}

/// `E_k(x, y)` from the integral representation
/// `Γ(k+1/2)/(Γ(k)Γ(1/2)) ∫_{-1}^{1} (1-u)^{k-1} (1+u)^k e^{xyu} du`,
/// evaluated with a Gauss–Jacobi rule for the weight `(1-u)^{k-1}(1+u)^k`.
pub fn dunkl_kernel_1d_integral(k: f64, x: f64, y: f64) -> Result<f64> {
    check_k(k)?;
    check_point(x)?;
    check_point(y)?;
    let z = x * y;
    if k == 0.0 {
        return Ok(z.exp());
    }
    let rule = cached_gauss_jacobi(oscillatory_rule_size(z.abs().max(30.0)), k - 1.0, k);
    let mut num = 0.0;
    let mut den = 0.0;
    for (u, w) in rule.nodes.iter().zip(&rule.weights) {
        num += w * (z * u).exp();
        den += w;
    }
    Ok(num / den)
}

/// Product kernel `E(x, y) = Π_j E_{k_j}(x_j, y_j)`.
pub fn dunkl_kernel(setup: &MultiplicitySetup, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(setup, x, y)?;
    let mut p = 1.0;
    for j in 0..setup.dim() {
        p *= dunkl_kernel_1d(setup.k()[j], x[j], y[j])?;
    }
    Ok(p)
}

/// Product kernel assembled from the integral representation on every axis.
pub fn dunkl_kernel_integral(setup: &MultiplicitySetup, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(setup, x, y)?;
    let mut p = 1.0;
    for j in 0..setup.dim() {
        p *= dunkl_kernel_1d_integral(setup.k()[j], x[j], y[j])?;
    }
    Ok(p)
}

fn check_dims(setup: &MultiplicitySetup, x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != setup.dim() || y.len() != setup.dim() {
        return Err(invalid(format!("points must have dimension {}", setup.dim())));
    }
    Ok(())
}

/// Crossover between quadrature and asymptotics for `E_k(iθ)`.
pub(crate) fn imag_threshold(k: f64) -> f64 {
    30.0 + (k + 0.5) * (k + 0.5)
}

/// `E_k(iθ) = j_{k-1/2}(θ) + iθ/(2k+1) j_{k+1/2}(θ)`.
pub(crate) fn kernel_imag_unit(k: f64, theta: f64) -> Complex64 {
    if k == 0.0 {
        return Complex64::new(theta.cos(), theta.sin());
    }
    if theta == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let tc = imag_threshold(k);
    if theta.abs() < tc {
        let rule = cached_gauss_jacobi(oscillatory_rule_size(tc), k - 1.0, k);
        let (mut re, mut im, mut den) = (0.0, 0.0, 0.0);
        for (u, w) in rule.nodes.iter().zip(&rule.weights) {
            let (s, c) = (theta * u).sin_cos();
            re += w * c;
            im += w * s;
            den += w;
        }
        Complex64::new(re / den, im / den)
    } else {
        Complex64::new(j_normalized(k - 0.5, theta), theta / (2.0 * k + 1.0) * j_normalized(k + 0.5, theta))
    }
}

/// `E_k(x, iξ)`; its conjugate `E_k(x, -iξ)` is the Dunkl transform kernel.
pub fn dunkl_kernel_1d_imag(k: f64, x: f64, xi: f64) -> Result<Complex64> {
    check_k(k)?;
    check_point(x)?;
    check_point(xi)?;
    Ok(kernel_imag_unit(k, x * xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(dunkl_kernel_1d(1.0, 1.0, 0.0).unwrap(), 1.0);
        assert!((dunkl_kernel_1d(0.0, 1.3, -0.7).unwrap() - (-0.91f64).exp()).abs() < 1e-15);
        let v = dunkl_kernel_1d(1.0, 1.0, 1.0).unwrap();
        assert!((v - 1f64.cosh()).abs() < 1e-13, "{v}");
        let q = dunkl_kernel_1d_integral(1.0, 1.0, 1.0).unwrap();
        assert!((q - 1f64.cosh()).abs() < 1e-13);
        assert!(dunkl_kernel_1d(-0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn k_one_closed_form() {
        // k = 1: Γ(3/2) Ĩ_{1/2}(w) = sinh w / w and Γ(5/2) Ĩ_{3/2}(w) = 3 (w cosh w - sinh w) / w^3.
        for &z in &[-20.0f64, -3.0, -0.2, 0.5, 4.0, 30.0] {
            let w = z.abs();
            let a = w.sinh() / w;
            let b = 3.0 * (w * w.cosh() - w.sinh()) / w.powi(3);
            let exact = a + z / 3.0 * b;
            let got = dunkl_kernel_1d(1.0, z, 1.0).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-11, "z={z}: {got} vs {exact}");
        }
    }

    #[test]
    fn representations_agree() {
        for &k in &[0.3, 1.0, 2.5] {
            for i in 0..=20 {
                for j in 0..=20 {
                    let x = -5.0 + 0.5 * i as f64;
                    let y = -5.0 + 0.5 * j as f64;
                    let a = dunkl_kernel_1d(k, x, y).unwrap();
                    let b = dunkl_kernel_1d_integral(k, x, y).unwrap();
                    assert!(((a - b) / b).abs() < 1e-10, "k={k} x={x} y={y}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn imaginary_argument_half_integer_forms() {
        // k = 1: j_{1/2}(θ) = sin θ/θ, j_{3/2}(θ) = 3(sin θ - θ cos θ)/θ^3
        for &t in &[-50.0, -7.0, -0.3, 0.0, 1.0, 12.0, 31.0, 33.0, 80.0, 400.0] {
            let e = kernel_imag_unit(1.0, t);
            let (re, im) = if t == 0.0 {
                (1.0, 0.0)
            } else {
                (t.sin() / t, t / 3.0 * 3.0 * (t.sin() - t * t.cos()) / t.powi(3))
            };
            assert!((e.re - re).abs() < 1e-12 && (e.im - im).abs() < 1e-12, "t={t}: {e} vs ({re},{im})");
        }
    }

    #[test]
    fn imaginary_argument_crossover_is_continuous() {
        for &k in &[0.3, 0.5, 1.7, 2.5] {
            let tc = imag_threshold(k);
            let a = kernel_imag_unit(k, tc * (1.0 - 1e-12));
            let b = kernel_imag_unit(k, tc);
            assert!((a - b).norm() < 1e-11, "k={k}: {a} vs {b}");
        }
    }

    proptest! {
        #[test]
        fn symmetric_and_positive(k in 0.0f64..3.0, x in -8.0f64..8.0, y in -8.0f64..8.0) {
            let a = dunkl_kernel_1d(k, x, y).unwrap();
            let b = dunkl_kernel_1d(k, y, x).unwrap();
            prop_assert!(a > 0.0);
            prop_assert!(((a - b) / a).abs() < 1e-10);
        }

        #[test]
        fn normalized_at_zero(k in 0.0f64..5.0, x in -100.0f64..100.0) {
            prop_assert_eq!(dunkl_kernel_1d(k, x, 0.0).unwrap(), 1.0);
            let q = dunkl_kernel_1d_integral(k, x, 0.0).unwrap();
            prop_assert!((q - 1.0).abs() < 1e-8);
        }

        #[test]
        fn bounded_by_one_on_imaginary_axis(k in 0.0f64..3.0, t in -200.0f64..200.0) {
            prop_assert!(kernel_imag_unit(k, t).norm() <= 1.0 + 1e-10);
        }
    }
}
