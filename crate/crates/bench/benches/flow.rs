use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use szego_bench::generic_symbol;
use szego_core::flow::{ExactFlow, Rk4};
use szego_core::symbol::{szego_nonlinearity, NonlinearityPlan};
use szego_core::Complex64;

fn nonlinearity(c: &mut Criterion) {
    let mut group = c.benchmark_group("nonlinearity");
    for m in [64, 256, 1024] {
        let u = generic_symbol(3, m);
        group.bench_with_input(BenchmarkId::new("direct", m), &u, |b, u| b.iter(|| szego_nonlinearity(black_box(u))));
        let mut plan = NonlinearityPlan::new(m);
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        group.bench_with_input(BenchmarkId::new("fft", m), &u, |b, u| {
            b.iter(|| plan.apply(black_box(u.coeffs()), &mut out))
        });
    }
    group.finish();
}

fn steppers(c: &mut Criterion) {
    let mut group = c.benchmark_group("flow");
    for m in [128, 1024] {
        let u = generic_symbol(3, m);
        let mut rk = Rk4::new(m);
        let mut state = u.coeffs().to_vec();
        group.bench_function(BenchmarkId::new("rk4_step", m), |b| b.iter(|| rk.step(black_box(&mut state), 1e-3)));
    }
    let flow = ExactFlow::new(&generic_symbol(3, 128)).unwrap();
    group.bench_function("exact_at", |b| b.iter(|| flow.at(black_box(2.5)).unwrap()));
    group.finish();
}

criterion_group!(benches, nonlinearity, steppers);
criterion_main!(benches);
