use std::sync::Arc;

use proptest::prelude::*;

use dunkl_core::dunkl::{dunkl_kernel, MultiplicitySetup, SampledField, TensorGrid};
use dunkl_core::geometry::{mu_ball, quasi_distance};
use dunkl_core::kernels::{heat_kernel, poisson_kernel};
use dunkl_core::matlemma::{antisymmetric_extremal, from_rows, homogeneity_check, lemma_margin};
use dunkl_core::transform::riesz_transform;

fn setup2(k0: f64, k1: f64) -> MultiplicitySetup {
    MultiplicitySetup::new(vec![k0, k1]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heat_kernel_is_symmetric_and_reflection_invariant(
        k0 in 0.0..3.0f64, k1 in 0.0..3.0f64, t in 0.05..5.0f64,
        x in prop::array::uniform2(-4.0..4.0f64), y in prop::array::uniform2(-4.0..4.0f64),
    ) {
        let s = setup2(k0, k1);
        let h = heat_kernel(&s, t, &x, &y).unwrap();
        prop_assert!(h > 0.0);
        prop_assert!((h - heat_kernel(&s, t, &y, &x).unwrap()).abs() <= 1e-12 * h);
        let (rx, ry) = ([-x[0], x[1]], [-y[0], y[1]]);
        prop_assert!((h - heat_kernel(&s, t, &rx, &ry).unwrap()).abs() <= 1e-12 * h);
    }

    #[test]
    fn dunkl_kernel_scaling_moves_between_arguments(
        k in 0.0..3.0f64, x in -3.0..3.0f64, y in -3.0..3.0f64, lam in -2.0..2.0f64,
    ) {
        let s = MultiplicitySetup::new(vec![k]).unwrap();
        let a = dunkl_kernel(&s, &[lam * x], &[y]).unwrap();
        let b = dunkl_kernel(&s, &[x], &[lam * y]).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert!(a > 0.0);
    }

    #[test]
    fn poisson_kernel_decreases_with_distance_at_k0(t in 0.1..3.0f64, d in 0.0..3.0f64) {
        let s = MultiplicitySetup::new(vec![0.0]).unwrap();
        let near = poisson_kernel(&s, t, &[0.0], &[d]).unwrap();
        let far = poisson_kernel(&s, t, &[0.0], &[d + 0.5]).unwrap();
        prop_assert!(far < near);
    }

    #[test]
    fn ball_measure_is_monotone_and_reflection_invariant(
        k0 in 0.0..2.0f64, k1 in 0.0..2.0f64, x in prop::array::uniform2(-3.0..3.0f64), r in 0.01..3.0f64,
    ) {
        let s = setup2(k0, k1);
        let m = mu_ball(&s, &x, r).unwrap();
        prop_assert!(m > 0.0);
        prop_assert!(mu_ball(&s, &x, 1.5 * r).unwrap() > m);
        let m_ref = mu_ball(&s, &[-x[0], -x[1]], r).unwrap();
        prop_assert!((m - m_ref).abs() <= 1e-10 * m);
    }

    #[test]
    fn quasi_distance_is_symmetric(k in 0.0..2.0f64, x in -4.0..4.0f64, y in -4.0..4.0f64) {
        let s = MultiplicitySetup::new(vec![k]).unwrap();
        let a = quasi_distance(&s, &[x], &[y]).unwrap();
        let b = quasi_distance(&s, &[y], &[x]).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-12));
    }

    #[test]
    fn lemma_margin_is_quadratically_homogeneous(
        entries in prop::collection::vec(-2.0..2.0f64, 9), t in -5.0..5.0f64, eps in 0.01..0.4f64, delta in 0.0..0.5f64,
    ) {
        prop_assume!(t.abs() > 1e-3);
        let b = from_rows(&entries.chunks(3).map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        prop_assert!(homogeneity_check(&b, t, eps, delta).unwrap());
    }

    #[test]
    fn antisymmetric_family_keeps_positive_margin(size in 2usize..5, eps in 0.01..0.4f64) {
        let b = antisymmetric_extremal(size);
        prop_assert!(lemma_margin(&b, eps, 2.0 * eps).unwrap() >= 0.0);
    }
}

#[test]
fn riesz_transform_of_even_field_is_odd_in_its_axis() {
    let s = setup2(0.5, 1.0);
    let g = Arc::new(TensorGrid::uniform(s.k(), 8.0, 0.15, false).unwrap());
    let f = SampledField::from_fn(Arc::clone(&g), |x| (-x[0] * x[0] - 0.5 * x[1] * x[1]).exp());
    let r = riesz_transform(&s, &f, 0).unwrap();
    assert!(r.imag_residual < 1e-8);
    for i in 0..g.len() {
        let m = g.mirror_index(i, 0);
        assert!((r.field.values[i] + r.field.values[m]).abs() < 1e-10);
        let m1 = g.mirror_index(i, 1);
        assert!((r.field.values[i] - r.field.values[m1]).abs() < 1e-10);
    }
}
