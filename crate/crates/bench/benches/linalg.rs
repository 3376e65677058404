use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qdiscrim::linalg::{fidelity, hermitian_eig, trace_norm};
use qdiscrim_bench::density;

fn eig(c: &mut Criterion) {
    let mut g = c.benchmark_group("hermitian_eig");
    for dim in [4, 8, 16, 32, 64] {
        let h = density(dim, 1);
        g.bench_with_input(BenchmarkId::from_parameter(dim), &h, |b, h| {
            b.iter(|| hermitian_eig(black_box(h)))
        });
    }
    g.finish();
}

fn functionals(c: &mut Criterion) {
    let mut g = c.benchmark_group("functionals");
    for dim in [4, 16] {
        let (a, b) = (density(dim, 2), density(dim, 3));
        g.bench_with_input(
            BenchmarkId::new("fidelity", dim),
            &(&a, &b),
            |bench, (a, b)| bench.iter(|| fidelity(black_box(a), black_box(b))),
        );
        let diff = a.sub(&b);
        g.bench_with_input(BenchmarkId::new("trace_norm", dim), &diff, |bench, d| {
            bench.iter(|| trace_norm(black_box(d)))
        });
    }
    g.finish();
}

criterion_group!(benches, eig, functionals);
criterion_main!(benches);
