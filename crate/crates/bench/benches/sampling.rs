use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use homonym_core::collision::{homonym_proportion_once, SimulationPlan};
use homonym_core::stream::root_stream;
use homonym_core::{analytic_expected_proportion, estimate_curve, fit_zipf, zipf_pmf};

fn alias_draws(c: &mut Criterion) {
    let mut g = c.benchmark_group("alias_sample");
    for k in [365usize, 100_000] {
        let d = zipf_pmf(1.0, k).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(k), &d, |b, d| {
            let mut rng = root_stream(1);
            b.iter(|| black_box(d.sample(&mut rng)));
        });
    }
    g.finish();
}

fn single_replicate(c: &mut Criterion) {
    let d = zipf_pmf(1.0, 100_000).unwrap();
    let mut g = c.benchmark_group("homonym_once");
    for n in [1_000u64, 100_000] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let mut rng = root_stream(2);
            b.iter(|| black_box(homonym_proportion_once(&d, n, &mut rng)));
        });
    }
    g.finish();
}

fn curve(c: &mut Criterion) {
    let d = zipf_pmf(1.0, 10_000).unwrap();
    let plan = SimulationPlan::new(vec![100, 1_000, 10_000], 50, 3).unwrap();
    c.bench_function("estimate_curve", |b| b.iter(|| estimate_curve(&plan, &d)));
    c.bench_function("analytic_1e5", |b| {
        let big = zipf_pmf(1.0, 100_000).unwrap();
        b.iter(|| analytic_expected_proportion(&big, black_box(50_000)))
    });
}

fn zipf_fit(c: &mut Criterion) {
    let d = zipf_pmf(1.0, 20_000).unwrap();
    let mut counts = vec![0u64; d.len()];
    let mut rng = root_stream(4);
    for _ in 0..500_000 {
        counts[d.sample(&mut rng)] += 1;
    }
    c.bench_function("fit_zipf", |b| b.iter(|| fit_zipf(black_box(&counts)).unwrap()));
}

criterion_group!(benches, alias_draws, single_replicate, curve, zipf_fit);
criterion_main!(benches);
