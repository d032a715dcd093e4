//! End-to-end solver benchmarks: model construction, the exact search on
//! oracle-sized instances, the synthetic link budget, and the baseline.

use ca_bench::scenario_with_rates;
use ca_core::{
    allocate_baseline_no_ca, branch_and_bound, build_milp, compute_rate_matrix, generate_preset,
    Preset,
};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

fn bench_build_milp(c: &mut Criterion) {
    let (s, rates) = scenario_with_rates(Preset::Evolve2, 1);
    c.bench_function("build_milp/evolve2", |b| {
        b.iter(|| build_milp(black_box(&s), black_box(&rates)).unwrap())
    });
}

fn bench_branch_and_bound_tiny(c: &mut Criterion) {
    // a batch of oracle-sized instances keeps one outlier seed from
    // dominating the figure
    let instances: Vec<_> = (0..20u64)
        .map(|seed| {
            let (s, rates) = scenario_with_rates(Preset::Tiny, seed);
            let p = build_milp(&s, &rates).unwrap();
            (p, s.solver)
        })
        .collect();
    c.bench_function("branch_and_bound/tiny_x20", |b| {
        b.iter_batched(
            || instances.clone(),
            |batch| {
                for (p, params) in &batch {
                    black_box(branch_and_bound(p, params).unwrap());
                }
            },
            BatchSize::SmallInput,
        )
    });
}

fn bench_rate_matrix_paper8(c: &mut Criterion) {
    let s = generate_preset(Preset::Paper8, 1).scenario;
    c.bench_function("compute_rate_matrix/paper8", |b| {
        b.iter(|| black_box(compute_rate_matrix(black_box(&s))))
    });
}

fn bench_baseline_paper8(c: &mut Criterion) {
    let s = generate_preset(Preset::Paper8, 1).scenario;
    c.bench_function("baseline/paper8", |b| {
        b.iter(|| black_box(allocate_baseline_no_ca(black_box(&s)).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_build_milp,
    bench_branch_and_bound_tiny,
    bench_rate_matrix_paper8,
    bench_baseline_paper8
);
criterion_main!(benches);
