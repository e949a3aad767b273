use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use das_bench::{alpha, figure, label_bins, two_component};
use das_core::naturals::sample_mult_stable;
use das_core::process::{sample_das, sample_das_counts};
use das_core::scalar::{sample_discrete_stable, sample_positive_stable, sample_sibuya};
use das_core::stats::{chi_square_two_sample, Histogram};
use das_core::vector::{sample_das_vector, vector_pmf_oracle};
use das_core::{
    DiscreteStableParams, DiscreteStableRoute, LePageConfig, PrimeBasis, ProcessRoute, RandomSource,
    SimplexMeasure, VectorRoute,
};

fn scalar(c: &mut Criterion) {
    let mut g = c.benchmark_group("scalar");
    for a in [0.3, 0.5, 0.8] {
        let ex = alpha(a);
        let params = DiscreteStableParams::new(1.0, ex).unwrap();
        let mut rng = RandomSource::new(1);
        g.bench_function(format!("sibuya/{a}"), |b| b.iter(|| sample_sibuya(black_box(ex), &mut rng)));
        g.bench_function(format!("positive_stable/{a}"), |b| {
            b.iter(|| sample_positive_stable(black_box(ex), &mut rng))
        });
        for route in [DiscreteStableRoute::PoissonMixture, DiscreteStableRoute::CompoundSibuya] {
            g.bench_function(format!("discrete_stable/{route:?}/{a}"), |b| {
                b.iter(|| sample_discrete_stable(black_box(params), route, &mut rng))
            });
        }
    }
    g.finish();
}

fn process(c: &mut Criterion) {
    let mut g = c.benchmark_group("process");
    let bins = label_bins();
    let spec = two_component(0.5);
    for (route, tol) in [(ProcessRoute::Cluster, 1e-4), (ProcessRoute::Cox, 1e-4), (ProcessRoute::Lepage, 1e-4)] {
        let cfg = LePageConfig::new(tol, 4096).unwrap();
        let mut rng = RandomSource::new(2);
        g.bench_function(format!("counts/{route}"), |b| {
            b.iter(|| sample_das_counts(&spec, route, &cfg, &bins, &mut rng).unwrap())
        });
    }
    let fig = figure(0.5);
    g.sample_size(20);
    g.bench_function("figure_pattern/cluster", |b| {
        b.iter_batched(
            || RandomSource::new(3),
            |mut rng| sample_das(&fig, ProcessRoute::Cluster, &LePageConfig::default(), &mut rng).unwrap(),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

fn vector_and_naturals(c: &mut Criterion) {
    let mut g = c.benchmark_group("vector");
    let sigma = SimplexMeasure::new([(1.0, vec![0.5, 0.5]), (0.5, vec![1.0, 0.0])]).unwrap();
    let ex = alpha(0.5);
    let mut rng = RandomSource::new(4);
    for route in [VectorRoute::Cluster, VectorRoute::Cox] {
        g.bench_function(format!("sample/{route:?}"), |b| {
            b.iter(|| sample_das_vector(&sigma, ex, route, &mut rng))
        });
    }
    g.bench_function("pmf_oracle/40x40", |b| b.iter(|| vector_pmf_oracle(&sigma, ex, &[40, 40]).unwrap()));
    g.finish();

    let basis = PrimeBasis::new(vec![2, 3, 5, 7], vec![0.5, 0.3, 0.2, 0.1]).unwrap();
    c.bench_function("naturals/sample_mult_stable", |b| {
        b.iter(|| sample_mult_stable(&basis, ex, &mut rng).unwrap())
    });
}

fn statistics(c: &mut Criterion) {
    let params = DiscreteStableParams::new(2.0, alpha(0.8)).unwrap();
    let mut rng = RandomSource::new(5);
    let draw = |rng: &mut RandomSource| -> Histogram<u64> {
        (0..100_000)
            .map(|_| sample_discrete_stable(params, DiscreteStableRoute::CompoundSibuya, rng).min(64))
            .collect()
    };
    let a = draw(&mut rng);
    let b = draw(&mut rng);
    c.bench_function("stats/chi_square_two_sample", |bench| {
        bench.iter(|| chi_square_two_sample(black_box(&a), black_box(&b)).unwrap())
    });
}

criterion_group!(benches, scalar, process, vector_and_naturals, statistics);
criterion_main!(benches);
