//! End-to-end checks through the public API.

use das_core::measure::{PhaseSpace, Point, ProbabilityMeasureSpec, QuerySet, Rect, SpectralMeasure};
use das_core::process::{
    das_pgfl, empirical_pgfl, point_count_law, sample_das, stationary_gaussian, thinning_closure_check, void_trace,
};
use das_core::scalar::discrete_stable_pmf_oracle;
use das_core::stats::write_trace_csv;
use das_core::vector::{sample_das_vector, vector_pmf_oracle};
use das_core::{
    DasProcessSpec, Exponent, Harness, LePageConfig, ProcessRoute, Quadrature, RandomSource, SimplexMeasure,
    StepFunction, VectorRoute,
};

fn alpha(a: f64) -> Exponent {
    Exponent::new(a).unwrap()
}

fn uniform(a: f64) -> DasProcessSpec {
    DasProcessSpec::new(
        SpectralMeasure::finite([(1.0, ProbabilityMeasureSpec::uniform_window(Rect::unit()))]).unwrap(),
        alpha(a),
        PhaseSpace::PlanarWindow(Rect::unit()),
    )
    .unwrap()
}

#[test]
fn pattern_csv_round_trips_counts() {
    let spec = uniform(0.8);
    let real = sample_das(&spec, ProcessRoute::Cluster, &LePageConfig::default(), &mut RandomSource::new(3)).unwrap();
    let mut buf = Vec::new();
    real.pattern.write_csv(&spec.window, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,mult,cluster"));
    let total: u64 = lines.map(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, real.pattern.total());
}

#[test]
fn pgfl_matches_monte_carlo() {
    let spec = uniform(0.5);
    let h = StepFunction::new(vec![
        (QuerySet::Rect(Rect::new(0.0, 0.5, 0.0, 1.0).unwrap()), 0.3),
        (QuerySet::Rect(Rect::new(0.5, 1.0, 0.0, 0.5).unwrap()), 0.8),
    ])
    .unwrap();
    let exact = das_pgfl(&spec, &h, &Quadrature::default()).unwrap();
    let cfg = LePageConfig::new(1e-2, 4096).unwrap();
    for route in [ProcessRoute::Cluster, ProcessRoute::Cox] {
        let mc = empirical_pgfl(&spec, route, &cfg, &h, &Harness::new(100_000, 11)).unwrap();
        assert!(mc.within(exact.value, 4.0, exact.error), "{route}: {mc:?} vs {exact:?}");
    }
}

#[test]
fn count_law_matches_cluster_sampler() {
    let spec = stationary_gaussian(0.1, 4.0, Rect::unit(), alpha(0.7)).unwrap();
    let set = QuerySet::Rect(Rect::new(0.2, 0.6, 0.2, 0.6).unwrap());
    let (params, err) = point_count_law(&spec, &set, &Quadrature::default()).unwrap();
    assert!(err < 1e-6);
    let pmf = discrete_stable_pmf_oracle(params, 3).probabilities;
    let mut rng = RandomSource::new(5);
    let cfg = LePageConfig::default();
    let n = 40_000;
    let zeros = (0..n)
        .filter(|_| {
            das_core::process::sample_das_counts(&spec, ProcessRoute::Cluster, &cfg, std::slice::from_ref(&set), &mut rng)
                .unwrap()[0]
                == 0
        })
        .count() as f64
        / n as f64;
    let se = (pmf[0] * (1.0 - pmf[0]) / n as f64).sqrt();
    assert!((zeros - pmf[0]).abs() < 4.0 * se, "{zeros} vs {}", pmf[0]);
}

#[test]
fn thinning_closure_passes() {
    let spec = uniform(0.6);
    let bins: Vec<QuerySet> = Rect::unit().grid(2, 1).into_iter().map(QuerySet::Rect).collect();
    let r = thinning_closure_check(&spec, 0.4, &bins, &Harness::new(50_000, 8)).unwrap();
    assert!(r.p_value > 1e-3, "{r:?}");
}

#[test]
fn void_trace_converges_and_serializes() {
    let spec = uniform(0.5);
    let set = QuerySet::Rect(Rect::new(0.0, 0.5, 0.0, 0.5).unwrap());
    let trace = void_trace(&spec, ProcessRoute::Cluster, &LePageConfig::default(), &set, 20_000, 5_000, &mut RandomSource::new(1))
        .unwrap();
    assert_eq!(trace.len(), 4);
    let last = trace.last().unwrap();
    assert!((last.frequency - (-0.5f64).exp()).abs() < 4.0 * last.std_error + 1e-3);
    let mut buf = Vec::new();
    write_trace_csv(&trace, &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("draws,frequency,std_error\n"));
}

#[test]
fn vector_sampler_matches_pmf_oracle_at_origin() {
    let sigma = SimplexMeasure::new([(0.7, vec![0.5, 0.5]), (0.4, vec![0.1, 0.9])]).unwrap();
    let a = alpha(0.6);
    let table = vector_pmf_oracle(&sigma, a, &[8, 8]).unwrap();
    let mut rng = RandomSource::new(21);
    let n = 100_000;
    for route in [VectorRoute::Cluster, VectorRoute::Cox] {
        let hits = (0..n).filter(|_| sample_das_vector(&sigma, a, route, &mut rng) == [1, 0]).count() as f64 / n as f64;
        let p = table.get(&[1, 0]).unwrap();
        assert!((hits - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "{route:?}: {hits} vs {p}");
    }
}

#[test]
fn gaussian_figure_has_heavy_cluster_sizes() {
    let spec = stationary_gaussian(0.03, 30.0, Rect::unit(), alpha(0.5)).unwrap();
    let region = spec.sigma.centre_region().unwrap();
    assert!(region.contains(Point::new(-0.05, 1.05)));
    let mut rng = RandomSource::new(9);
    let mut largest = 0;
    let mut clusters = 0;
    for _ in 0..20 {
        let real = sample_das(&spec, ProcessRoute::Cluster, &LePageConfig::default(), &mut rng).unwrap();
        let sizes = real.pattern.cluster_sizes();
        clusters += sizes.len();
        largest = largest.max(sizes.values().copied().max().unwrap_or(0));
    }
    assert!(clusters > 200);
    assert!(largest > 100);
}
