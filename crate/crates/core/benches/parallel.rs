use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use yamabe::curvature::{jets, point_curvature, SecondDerivative};
use yamabe::par::{map_range_with, map_slice_with, Execution};
use yamabe::params::{derive_params, ClosedForm, SolitonClass};
use yamabe::profile::{integrate_cylindrical, s_grid, CylindricalProfile};

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn pointwise_curvature(c: &mut Criterion) {
    let cf = ClosedForm::barenblatt(3, 1.0).unwrap();
    let prof = CylindricalProfile::closed_form(cf, s_grid(-12.0, 12.0, 200_000)).unwrap();
    let j = jets(&prof, SecondDerivative::Analytic).unwrap();
    let mut group = c.benchmark_group("pointwise_curvature");
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| map_range_with(exec, j.len(), |i| point_curvature(3, black_box(&j[i]))))
        });
    }
    group.finish();
}

fn batch_shooting(c: &mut Criterion) {
    let betas: Vec<f64> = (1..=32).map(|i| 0.1 * i as f64).collect();
    let mut group = c.benchmark_group("batch_shooting");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                map_slice_with(exec, &betas, |&beta| {
                    let p = derive_params(4, SolitonClass::Steady, beta).unwrap();
                    integrate_cylindrical(&p, 1.0, -12.0, 12.0, 1e-10).unwrap().len()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, pointwise_curvature, batch_shooting);
criterion_main!(benches);
