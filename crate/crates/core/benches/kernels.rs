use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use dunkl_core::dunkl::{MultiplicitySetup, SampledField, TensorGrid};
use dunkl_core::exec::{with_mode, Exec};
use dunkl_core::kernels::{check_heat_regimes, stratified_heat_samples};
use dunkl_core::transform::TransformPlan;

fn modes() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn heat_regimes(c: &mut Criterion) {
    let samples = stratified_heat_samples(2_000, 1);
    let mut g = c.benchmark_group("heat_regimes");
    for (name, mode) in modes() {
        g.bench_function(BenchmarkId::new(name, samples.len()), |b| {
            b.iter(|| with_mode(mode, || check_heat_regimes(1.0, black_box(&samples)).unwrap()))
        });
    }
    g.finish();
}

fn transform_2d(c: &mut Criterion) {
    let setup = MultiplicitySetup::new(vec![0.5, 1.0]).unwrap();
    let grid = Arc::new(TensorGrid::uniform(setup.k(), 6.0, 0.1, false).unwrap());
    let plan = TransformPlan::for_grid(&setup, Arc::clone(&grid)).unwrap();
    let f = SampledField::from_fn(grid, |x| (1.0 + x[0]) * (-x[0] * x[0] - x[1] * x[1]).exp());
    let mut g = c.benchmark_group("transform_2d");
    g.sample_size(10);
    for (name, mode) in modes() {
        g.bench_function(BenchmarkId::new(name, f.len()), |b| b.iter(|| with_mode(mode, || plan.forward(black_box(&f)).unwrap())));
    }
    g.finish();
}

criterion_group!(benches, heat_regimes, transform_2d);
criterion_main!(benches);
