use std::sync::Arc;

use super::field::SampledField;
use super::setup::MultiplicitySetup;
use crate::error::{invalid, Result};

/// Second-order first difference along `axis` of a row-major array:
/// central in the interior, one-sided three-point at the ends.
pub(crate) fn first_difference(values: &[f64], shape: &[usize], axis: usize, h: f64) -> Vec<f64> {
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; values.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let i = (flat / stride) % n;
        let at = |d: isize| values[(flat as isize + d * stride as isize) as usize];
        *o = if i == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h)
        } else {
            (at(1) - at(-1)) / (2.0 * h)
        };
    }
    out
}

/// Second-order second difference along `axis` (four-point one-sided at the ends).
pub(crate) fn second_difference(values: &[f64], shape: &[usize], axis: usize, h: f64) -> Vec<f64> {
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let h2 = h * h;
    let mut out = vec![0.0; values.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let i = (flat / stride) % n;
        let at = |d: isize| values[(flat as isize + d * stride as isize) as usize];
        *o = if i == 0 {
            (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2
        } else if i == n - 1 {
            (2.0 * at(0) - 5.0 * at(-1) + 4.0 * at(-2) - at(-3)) / h2
        } else {
            (at(1) - 2.0 * at(0) + at(-1)) / h2
        };
    }
    out
}

fn check_axis(setup: &MultiplicitySetup, f: &SampledField, j: usize) -> Result<f64> {
    if setup.dim() != f.grid.dim() {
        return Err(invalid(format!("setup has dimension {}, field {}", setup.dim(), f.grid.dim())));
    }
    if j >= setup.dim() {
        return Err(invalid(format!("axis {j} out of range")));
    }
    let axis = f.grid.axis(j);
    axis.require_symmetric()?;
    let h = axis.require_uniform()?;
    if axis.len() < 4 {
        return Err(invalid("difference stencils need at least 4 nodes per axis"));
    }
    Ok(h)
}

/// `D_j f = ∂_j f + (k_j/x_j)(f - f∘σ_j)` by finite differences, with the
/// reflection term replaced by its limit `2 k_j ∂_j f` at `x_j = 0`.
pub fn apply_dunkl_operator(setup: &MultiplicitySetup, j: usize, f: &SampledField) -> Result<SampledField> {
    let h = check_axis(setup, f, j)?;
    let k = setup.k()[j];
    let g = &f.grid;
    let shape = g.shape();
    let d = first_difference(&f.values, &shape, j, h);
    let stride = g.strides()[j];
    let nodes = &g.axis(j).nodes;
    let values = (0..f.len())
        .map(|i| {
            let x = nodes[(i / stride) % shape[j]];
            if x == 0.0 {
                (1.0 + 2.0 * k) * d[i]
            } else {
                d[i] + k / x * (f.values[i] - f.values[g.mirror_index(i, j)])
            }
        })
        .collect();
    SampledField::new(Arc::clone(&f.grid), values)
}

/// `L f = Σ_j [∂_j² f + (2k_j/x_j) ∂_j f - (k_j/x_j²)(f - f∘σ_j)]`, equal to
/// `(1 + 2k_j) ∂_j² f` on the hyperplane `x_j = 0`.
pub fn apply_dunkl_laplacian(setup: &MultiplicitySetup, f: &SampledField) -> Result<SampledField> {
    let g = &f.grid;
    let shape = g.shape();
    let mut out = vec![0.0; f.len()];
    for j in 0..setup.dim() {
        let h = check_axis(setup, f, j)?;
        let k = setup.k()[j];
        let d1 = first_difference(&f.values, &shape, j, h);
        let d2 = second_difference(&f.values, &shape, j, h);
        let stride = g.strides()[j];
        let nodes = &g.axis(j).nodes;
        for (i, o) in out.iter_mut().enumerate() {
            let x = nodes[(i / stride) % shape[j]];
            *o += if x == 0.0 {
                (1.0 + 2.0 * k) * d2[i]
            } else {
                d2[i] + 2.0 * k / x * d1[i] - k / (x * x) * (f.values[i] - f.values[g.mirror_index(i, j)])
            };
        }
    }
    SampledField::new(Arc::clone(&f.grid), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dunkl::grid::TensorGrid;
    use crate::dunkl::kernel::dunkl_kernel;

    fn grid(k: &[f64], h: f64) -> Arc<TensorGrid> {
        Arc::new(TensorGrid::uniform(k, 2.0, h, false).unwrap())
    }

    #[test]
    fn constant_field_is_annihilated() {
        let s = MultiplicitySetup::new(vec![1.0, 0.5]).unwrap();
        let f = SampledField::from_fn(grid(s.k(), 0.1), |_| 3.0);
        for j in 0..2 {
            assert!(apply_dunkl_operator(&s, j, &f).unwrap().max_abs() < 1e-12);
        }
        assert!(apply_dunkl_laplacian(&s, &f).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn odd_linear_function() {
        let s = MultiplicitySetup::new(vec![1.0]).unwrap();
        let f = SampledField::from_fn(grid(s.k(), 0.1), |x| x[0]);
        let d = apply_dunkl_operator(&s, 0, &f).unwrap();
        for v in &d.values {
            assert!((v - 3.0).abs() < 1e-12);
        }
    }

    fn eigen_residual(s: &MultiplicitySetup, y: &[f64], h: f64, j: usize) -> f64 {
        let g = grid(s.k(), h);
        let ss = s.clone();
        let yy = y.to_vec();
        let e = SampledField::from_fn(g, move |x| dunkl_kernel(&ss, x, &yy).unwrap());
        let d = apply_dunkl_operator(s, j, &e).unwrap();
        d.values.iter().zip(&e.values).map(|(a, b)| (a - y[j] * b).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn kernel_eigen_relation_converges_at_second_order() {
        let s = MultiplicitySetup::new(vec![1.0, 0.5]).unwrap();
        let y = [0.7, -1.1];
        for j in 0..2 {
            let r1 = eigen_residual(&s, &y, 0.1, j);
            let r2 = eigen_residual(&s, &y, 0.05, j);
            let r3 = eigen_residual(&s, &y, 0.025, j);
            let (q1, q2) = (r1 / r2, r2 / r3);
            assert!((3.5..=4.5).contains(&q1) && (3.5..=4.5).contains(&q2), "j={j}: {r1} {r2} {r3}");
        }
    }

    #[test]
    fn laplacian_eigen_relation() {
        let s = MultiplicitySetup::new(vec![1.0]).unwrap();
        let y = [1.3];
        let mut prev = f64::NAN;
        for &h in &[0.1, 0.05, 0.025] {
            let ss = s.clone();
            let e = SampledField::from_fn(grid(s.k(), h), move |x| dunkl_kernel(&ss, x, &y).unwrap());
            let l = apply_dunkl_laplacian(&s, &e).unwrap();
            let r = l.values.iter().zip(&e.values).map(|(a, b)| (a - 1.69 * b).abs()).fold(0.0, f64::max);
            if prev.is_finite() {
                assert!((3.5..=4.5).contains(&(prev / r)), "{prev} {r}");
            }
            prev = r;
        }
    }

    #[test]
    fn classical_laplacian_of_gaussian() {
        let s = MultiplicitySetup::new(vec![0.0]).unwrap();
        let f = SampledField::from_fn(grid(s.k(), 0.01), |x| (-x[0] * x[0]).exp());
        let l = apply_dunkl_laplacian(&s, &f).unwrap();
        for (i, v) in l.values.iter().enumerate().skip(3).take(390) {
            let x = f.grid.point(i)[0];
            assert!((v - (4.0 * x * x - 2.0) * (-x * x).exp()).abs() < 1e-3);
        }
    }

    #[test]
    fn operators_commute() {
        let s = MultiplicitySetup::new(vec![1.0, 0.5]).unwrap();
        let mut errs = Vec::new();
        for &h in &[0.05, 0.025] {
            let f = SampledField::from_fn(grid(s.k(), h), |x| (-(x[0] - 0.3).powi(2) - (x[1] + 0.2).powi(2)).exp() * (1.0 + x[0]));
            let a = apply_dunkl_operator(&s, 0, &apply_dunkl_operator(&s, 1, &f).unwrap()).unwrap();
            let b = apply_dunkl_operator(&s, 1, &apply_dunkl_operator(&s, 0, &f).unwrap()).unwrap();
            // Central differences along different axes commute exactly; the
            // reflection terms commute as well, so only rounding remains.
            let n = f.grid.shape()[0];
            let mut e: f64 = 0.0;
            for i in 0..f.len() {
                let idx = f.grid.multi_index(i);
                if idx.iter().all(|&v| v >= 2 && v + 2 < n) {
                    e = e.max((a.values[i] - b.values[i]).abs());
                }
            }
            errs.push(e);
        }
        assert!(errs.iter().all(|e| *e < 1e-10), "{errs:?}");
    }
}
