use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qdiscrim::measurement::check_corollary1_conditions;
use qdiscrim::{full_report, full_report_with, ReportOptions};
use qdiscrim_bench::{block_ensemble, full_rank_ensemble};

fn report(c: &mut Criterion) {
    let mut g = c.benchmark_group("full_report");
    for (dim, m) in [(4, 3), (8, 4), (16, 5)] {
        let e = full_rank_ensemble(dim, m, 7);
        g.bench_with_input(
            BenchmarkId::new("ginibre", format!("d{dim}_m{m}")),
            &e,
            |b, e| b.iter(|| full_report(black_box(e), None)),
        );
    }
    let e = full_rank_ensemble(8, 4, 7);
    let opts = ReportOptions {
        best_first: true,
        ..Default::default()
    };
    g.bench_function("best_first_d8_m4", |b| {
        b.iter(|| full_report_with(black_box(&e), None, opts))
    });
    g.finish();
}

fn conditions(c: &mut Criterion) {
    let e = block_ensemble(12, 4, 3);
    c.bench_function("conditions_block_d12_m4", |b| {
        b.iter(|| check_corollary1_conditions(black_box(&e)))
    });
}

criterion_group!(benches, report, conditions);
criterion_main!(benches);
