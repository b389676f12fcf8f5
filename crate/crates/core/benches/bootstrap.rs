//! Replicate-parallel kernels on one thread versus the full rayon pool.
//! Build with `--no-default-features` to time the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use precipice::bootstrap::{bootstrap_distribution, ResampleStrategy};
use precipice::harness::{generate_pool, Family, SyntheticPoolSpec};
use precipice::profiles::{default_grid, profile_with_bands, rank_distribution, ProfileKind};
use precipice::{Metric, ScoreSet};

fn synthetic(seed: u64) -> ScoreSet {
    let spec = SyntheticPoolSpec::uniform_family(26, 10, Family::Lognormal { mu: 0.0, sigma: 1.0 }, seed);
    generate_pool(&spec).unwrap().set().clone()
}

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let all = rayon::current_num_threads();
    vec![
        ("1-thread", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("all-threads", rayon::ThreadPoolBuilder::new().num_threads(all).build().unwrap()),
    ]
}

fn bench_bootstrap(c: &mut Criterion) {
    let s = synthetic(1);
    let mut group = c.benchmark_group("iqm_bootstrap_2000");
    for (label, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &s, |b, s| {
            b.iter(|| pool.install(|| bootstrap_distribution(s, &Metric::IQM, 2000, &ResampleStrategy::RUNS, 7).unwrap()))
        });
    }
    group.finish();
}

fn bench_bands(c: &mut Criterion) {
    let s = synthetic(2);
    let taus = default_grid(std::slice::from_ref(&s));
    let mut group = c.benchmark_group("profile_bands_2000");
    for (label, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &s, |b, s| {
            b.iter(|| pool.install(|| profile_with_bands(s, &taus, ProfileKind::RunScores, 0.95, 2000, 3).unwrap()))
        });
    }
    group.finish();
}

fn bench_ranks(c: &mut Criterion) {
    let sets: Vec<ScoreSet> = (0..4).map(synthetic).collect();
    let mut group = c.benchmark_group("rank_distribution_20000");
    for (label, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &sets, |b, sets| {
            b.iter(|| pool.install(|| rank_distribution(sets, 20_000, 5).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_bootstrap, bench_bands, bench_ranks
);
criterion_main!(benches);
