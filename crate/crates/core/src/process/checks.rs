use crate::error::Result;
use crate::measure::QuerySet;
use crate::stable_measure::{LePageConfig, StepFunction};
use crate::stats::{
    compare_count_laws, mc_mean, pgf_term, running_void_frequency, superposition_stability_test,
    thinning_stability_test, Harness, McEstimate, TestReport, TracePoint,
};

use super::sample::sample_das_counts;
use super::{DasProcessSpec, ProcessRoute};

/// Thinning stability of the cluster-route process on `bins`.
pub fn stability_check(spec: &DasProcessSpec, t: f64, bins: &[QuerySet], h: &Harness) -> Result<TestReport> {
    let cfg = LePageConfig::default();
    let sample = |rng: &mut _| sample_das_counts(spec, ProcessRoute::Cluster, &cfg, bins, rng);
    Ok(thinning_stability_test(sample, spec.alpha, t, h)?.with_route("cluster"))
}

/// `n`-fold superposition fixed point of the cluster-route process.
pub fn superposition_fixed_point_check(
    spec: &DasProcessSpec,
    n: u32,
    bins: &[QuerySet],
    h: &Harness,
) -> Result<TestReport> {
    let cfg = LePageConfig::default();
    let sample = |rng: &mut _| sample_das_counts(spec, ProcessRoute::Cluster, &cfg, bins, rng);
    Ok(superposition_stability_test(sample, spec.alpha, n, h)?.with_route("cluster"))
}

/// Two-sample test between the binned counts of two routes.
pub fn route_equivalence_check(
    spec: &DasProcessSpec,
    a: ProcessRoute,
    b: ProcessRoute,
    cfg: &LePageConfig,
    bins: &[QuerySet],
    h: &Harness,
) -> Result<TestReport> {
    let report = compare_count_laws(
        |rng: &mut _| sample_das_counts(spec, a, cfg, bins, rng),
        |rng: &mut _| sample_das_counts(spec, b, cfg, bins, rng),
        h,
    )?;
    Ok(report.with_route(format!("{a} vs {b}")))
}

/// `t∘Φ` against a direct sample of the process with spectral weights
/// scaled by `t^α`.
pub fn thinning_closure_check(spec: &DasProcessSpec, t: f64, bins: &[QuerySet], h: &Harness) -> Result<TestReport> {
    let cfg = LePageConfig::default();
    let direct = spec.thinned(t)?;
    let report = compare_count_laws(
        |rng: &mut _| {
            let mut counts = sample_das_counts(spec, ProcessRoute::Cluster, &cfg, bins, rng)?;
            for n in counts.iter_mut() {
                *n = crate::scalar::thin_integer(*n, t, rng)?;
            }
            Ok(counts)
        },
        |rng: &mut _| sample_das_counts(&direct, ProcessRoute::Cluster, &cfg, bins, rng),
        h,
    )?;
    Ok(report.with_route("cluster"))
}

/// Monte Carlo `P{Φ(B) = 0}`.
pub fn empirical_avoidance(
    spec: &DasProcessSpec,
    route: ProcessRoute,
    cfg: &LePageConfig,
    set: &QuerySet,
    h: &Harness,
) -> Result<McEstimate> {
    let bins = std::slice::from_ref(set);
    mc_mean(h, |rng| Ok((sample_das_counts(spec, route, cfg, bins, rng)?[0] == 0) as u8 as f64))
}

/// Monte Carlo `E Π u(x_i)` for `u = 1 - h`.
pub fn empirical_pgfl(
    spec: &DasProcessSpec,
    route: ProcessRoute,
    cfg: &LePageConfig,
    h: &StepFunction,
    harness: &Harness,
) -> Result<McEstimate> {
    let bins: Vec<QuerySet> = h.steps().iter().map(|(s, _)| s.clone()).collect();
    let values: Vec<f64> = h.steps().iter().map(|(_, v)| 1.0 - v).collect();
    mc_mean(harness, |rng| {
        let counts = sample_das_counts(spec, route, cfg, &bins, rng)?;
        Ok(counts.iter().zip(&values).map(|(&n, &u)| pgf_term(u, n)).product())
    })
}

/// Running void frequency of `set` over `draws` sequential realizations.
pub fn void_trace(
    spec: &DasProcessSpec,
    route: ProcessRoute,
    cfg: &LePageConfig,
    set: &QuerySet,
    draws: u64,
    stride: u64,
    rng: &mut crate::RandomSource,
) -> Result<Vec<TracePoint>> {
    let bins = std::slice::from_ref(set);
    let voids = (0..draws)
        .map(|_| Ok(sample_das_counts(spec, route, cfg, bins, rng)?[0] == 0))
        .collect::<Result<Vec<bool>>>()?;
    Ok(running_void_frequency(voids, stride))
}
