use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kinterp::kernels::exact::ExactCosineKernel;
use kinterp::kernels::spectral::{Basis, SpectralKernel};
use kinterp::operators::{build_operator_model, v_lambda_coefficient_route, GramVariance};
use kinterp::solvers::{gamma_error_sq_gram, interpolate, ridge_fit, SampleSet};
use kinterp::spectra::make_power_law_spectrum;
use kinterp_bench::{interval_points, responses};

fn fits(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit");
    let exact = ExactCosineKernel::new(2.0).unwrap();
    for n in [64, 256] {
        let s = SampleSet::new(interval_points(n), responses(n)).unwrap();
        group.bench_with_input(BenchmarkId::new("interpolate_exact", n), &s, |b, s| {
            b.iter(|| interpolate(&exact, s).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("ridge_exact", n), &s, |b, s| {
            b.iter(|| ridge_fit(&exact, s, 1e-3, 0.0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("interpolate_and_error", n), &s, |b, s| {
            b.iter(|| {
                let sol = interpolate(&exact, s).unwrap();
                gamma_error_sq_gram(&sol, 0.5, 0.0, 1.0).unwrap()
            })
        });
    }
    group.finish();
}

fn variance(c: &mut Criterion) {
    let mut group = c.benchmark_group("variance");
    let k = SpectralKernel::new(make_power_law_spectrum(2.0, 0.0, 1024).unwrap(), Basis::CosineUnitInterval);
    let x = interval_points(128);
    group.bench_function("operator_model/n128_m1024", |b| b.iter(|| build_operator_model(&k, &x).unwrap()));
    let model = build_operator_model(&k, &x).unwrap();
    group.bench_function("coefficient_route/n128_m1024", |b| {
        b.iter(|| v_lambda_coefficient_route(&model, 0.5, 1e-3).unwrap())
    });
    let gram = GramVariance::new(&k, &x, 0.5).unwrap();
    group.bench_function("gram_route/n128", |b| b.iter(|| gram.v(1e-3).unwrap()));
    group.finish();
}

criterion_group!(benches, fits, variance);
criterion_main!(benches);
