use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kinterp::kernels::dot_product::{project_dot_product_spectrum, ntk_eval, DotProductKernel, NtkKernel};
use kinterp::kernels::exact::ExactCosineKernel;
use kinterp::kernels::spectral::{Basis, SpectralKernel};
use kinterp::kernels::{Kernel, PowerKernel};
use kinterp::special::UnitCirclePolylog;
use kinterp::spectra::make_power_law_spectrum;
use kinterp_bench::{interval_points, sphere_points};

fn polylog(c: &mut Criterion) {
    let series = UnitCirclePolylog::new(2.0);
    let fractional = UnitCirclePolylog::new(1.5);
    c.bench_function("polylog/integer_order", |b| b.iter(|| series.eval(black_box(0.7))));
    c.bench_function("polylog/fractional_order", |b| b.iter(|| fractional.eval(black_box(0.7))));
}

fn grams(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram");
    let exact = ExactCosineKernel::new(2.0).unwrap();
    let spectral = SpectralKernel::new(make_power_law_spectrum(2.0, 0.0, 1024).unwrap(), Basis::CosineUnitInterval);
    for n in [64, 256] {
        let x = interval_points(n);
        group.bench_with_input(BenchmarkId::new("exact_cosine", n), &x, |b, x| b.iter(|| exact.gram(x)));
        group.bench_with_input(BenchmarkId::new("exact_cosine_power", n), &x, |b, x| {
            b.iter(|| exact.gram_power(1.5, x))
        });
        group.bench_with_input(BenchmarkId::new("spectral_m1024", n), &x, |b, x| b.iter(|| spectral.gram(x)));
    }
    let ntk = DotProductKernel::new(NtkKernel::new(2).unwrap().spectrum(40).unwrap());
    let s = sphere_points(2, 256);
    group.bench_function("ntk_k40/256", |b| b.iter(|| ntk.gram(&s)));
    group.finish();
}

fn projection(c: &mut Criterion) {
    c.bench_function("project_ntk/k40", |b| {
        b.iter(|| project_dot_product_spectrum(|t| ntk_eval(t).unwrap(), 2, black_box(40), 82).unwrap())
    });
}

criterion_group!(benches, polylog, grams, projection);
criterion_main!(benches);
