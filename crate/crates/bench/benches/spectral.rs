use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use szego_bench::generic_symbol;
use szego_core::hankel::{build_pair, hermitian_eig, spectral_data_default};
use szego_core::transform::{inverse_model, reconstruct_coeffs};

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("hermitian_eig");
    for m in [32, 64, 128] {
        let h2 = build_pair(&generic_symbol(4, m)).h2;
        group.bench_with_input(BenchmarkId::from_parameter(m), &h2, |b, h2| {
            b.iter(|| hermitian_eig(black_box(h2)).unwrap())
        });
    }
    group.finish();
}

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform");
    group.sample_size(20);
    for n in [1, 3, 6] {
        let u = generic_symbol(n, 128);
        group.bench_with_input(BenchmarkId::new("forward", n), &u, |b, u| {
            b.iter(|| spectral_data_default(black_box(u)).unwrap())
        });
        let s = spectral_data_default(&u).unwrap();
        group.bench_with_input(BenchmarkId::new("inverse", n), &s, |b, s| {
            b.iter(|| reconstruct_coeffs(&inverse_model(black_box(s)).unwrap(), 128).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, eigensolver, transforms);
criterion_main!(benches);
