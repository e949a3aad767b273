//! Discrete α-stable point processes.
//!
//! A DαS process with spectral measure `σ` has p.g.fl.
//! `G[u] = exp{-∫ ⟨1-u, μ⟩^α σ(dμ)}`. Three samplers produce it:
//!
//! * cluster: `Poisson(σ(S))` centres drawn from `σ/σ(S)`, each spawning a
//!   Sibuya cluster of iid points from its measure (exact);
//! * Cox: a Poisson process driven by a StαS random measure;
//! * LePage: a superposition of Poisson processes with intensities
//!   `b γ_k^{-1/α} ε_k`.
//!
//! Realizations can be materialized as point patterns or reduced to counts
//! on disjoint bins. Counting avoids ever placing the (heavy-tailed)
//! cluster points one by one.

mod checks;
mod sample;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use checks::{
    empirical_avoidance, empirical_pgfl, route_equivalence_check, stability_check,
    superposition_fixed_point_check, thinning_closure_check, void_trace,
};
pub use sample::{
    sample_das, sample_das_cluster, sample_das_counts, sample_das_cox, sample_das_lepage,
    sample_sibuya_process, sibuya_process_counts, MAX_POINTS,
};

use crate::error::{param, Error, Result};
use crate::measure::{PhaseSpace, PointPattern, QuerySet, Rect, SpectralMeasure};
use crate::scalar::{DiscreteStableParams, Exponent};
use crate::special::normal_cdf;
use crate::stable_measure::{
    exp_functional, spectral_power_integral, stable_laplace_functional, FunctionalValue,
    Quadrature, StepFunction,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DasProcessSpec {
    pub sigma: SpectralMeasure,
    pub alpha: Exponent,
    /// Observation region; materialized patterns are restricted to it.
    pub window: PhaseSpace,
}

impl DasProcessSpec {
    pub fn new(sigma: SpectralMeasure, alpha: Exponent, window: PhaseSpace) -> Result<Self> {
        let spec = Self { sigma, alpha, window };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.sigma.validate()?;
        self.window.validate()?;
        if !self.sigma.is_empty() && self.sigma.is_planar() != self.window.is_planar() {
            return param("spectral measure and observation window live in different spaces");
        }
        Ok(())
    }

    /// Spectral measure of `t∘Φ`: every weight multiplied by `t^α`.
    pub fn thinned(&self, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return param(format!("thinning probability must lie in [0, 1], got {t}"));
        }
        let factor = t.powf(self.alpha.get());
        let sigma = match &self.sigma {
            SpectralMeasure::Finite { components } => SpectralMeasure::Finite {
                components: components
                    .iter()
                    .filter(|_| factor > 0.0)
                    .map(|c| crate::measure::SpectralComponent {
                        weight: c.weight * factor,
                        measure: c.measure.clone(),
                    })
                    .collect(),
            },
            SpectralMeasure::TranslationFamily { kernel, lambda, window, margin } => {
                SpectralMeasure::TranslationFamily {
                    kernel: kernel.clone(),
                    lambda: lambda * factor,
                    window: *window,
                    margin: *margin,
                }
            }
        };
        Ok(Self { sigma, ..self.clone() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessRoute {
    Cluster,
    Cox,
    Lepage,
}

impl ProcessRoute {
    pub const ALL: [ProcessRoute; 3] = [Self::Cluster, Self::Cox, Self::Lepage];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cluster => "cluster",
            Self::Cox => "cox",
            Self::Lepage => "lepage",
        }
    }
}

impl fmt::Display for ProcessRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProcessRoute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cluster" => Ok(Self::Cluster),
            "cox" => Ok(Self::Cox),
            "lepage" => Ok(Self::Lepage),
            other => param(format!("unknown route {other:?}; expected cluster, cox or lepage")),
        }
    }
}

/// A point pattern with the route and seed that produced it. Cluster tags
/// are cluster indices (cluster route), term indices (LePage and Cox over a
/// translation family) or component indices (Cox over a finite spectral
/// measure).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedRealization {
    pub pattern: PointPattern,
    pub route: ProcessRoute,
    pub seed: u64,
}

/// `G[u]` for `u = 1 - h`; `h` must take values in `[0, 1]`.
pub fn das_pgfl(spec: &DasProcessSpec, h: &StepFunction, quad: &Quadrature) -> Result<FunctionalValue> {
    if let Some((_, v)) = h.steps().iter().find(|(_, v)| *v > 1.0) {
        return param(format!("p.g.fl. argument u = 1 - {v} is negative"));
    }
    stable_laplace_functional(&spec.sigma, spec.alpha, h, quad)
}

/// `P{Φ(B) = 0} = exp{-∫ μ(B)^α σ(dμ)}`.
pub fn das_avoidance(spec: &DasProcessSpec, set: &QuerySet, quad: &Quadrature) -> Result<FunctionalValue> {
    let integral = spectral_power_integral(&spec.sigma, spec.alpha, quad, |mu| mu.mass(set))?;
    exp_functional(integral, quad)
}

/// Law of `Φ(B)`: discrete stable with `c = ∫ μ(B)^α σ(dμ)`. Also returns
/// the quadrature error on `c` (zero for finite spectral measures).
pub fn point_count_law(
    spec: &DasProcessSpec,
    set: &QuerySet,
    quad: &Quadrature,
) -> Result<(DiscreteStableParams, f64)> {
    let (c, err, _) = spectral_power_integral(&spec.sigma, spec.alpha, quad, |mu| mu.mass(set))?;
    Ok((DiscreteStableParams::new(c, spec.alpha)?, err))
}

/// Upper bound on the intensity of Gaussian-kernel clusters with centres
/// outside `W ⊕ margin` that hit `W`:
/// `λ ∫_margin^∞ Φ̄(d/s)^α (2(w+h) + 2πd) dd`.
pub fn gaussian_edge_bound(scale: f64, lambda: f64, window: &Rect, alpha: Exponent, margin: f64) -> f64 {
    let a = alpha.get();
    let perimeter = 2.0 * (window.width() + window.height());
    let integrand = |d: f64| normal_cdf(-d / scale).powf(a) * (perimeter + std::f64::consts::TAU * d);
    let upper = margin + 40.0 * scale / a.sqrt();
    let n = 4000;
    let step = (upper - margin) / n as f64;
    // composite Simpson
    let mut sum = integrand(margin) + integrand(upper);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(margin + i as f64 * step);
    }
    lambda * sum * step / 3.0
}

/// Smallest margin (to 1e-6 relative) whose edge bound is below `target`.
pub fn gaussian_margin(scale: f64, lambda: f64, window: &Rect, alpha: Exponent, target: f64) -> Result<f64> {
    if !(scale > 0.0 && lambda >= 0.0 && target > 0.0) {
        return param("margin search needs positive scale and target, non-negative intensity");
    }
    let bound = |m: f64| gaussian_edge_bound(scale, lambda, window, alpha, m);
    if bound(0.0) < target {
        return Ok(0.0);
    }
    let mut hi = scale;
    while bound(hi) >= target {
        hi *= 2.0;
        if hi > 1e6 * scale {
            return Err(Error::Resource("no finite margin reaches the target".into()));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if bound(mid) < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Target for the neglected edge intensity of stationary simulations.
pub const EDGE_TOLERANCE: f64 = 1e-3;

/// Gaussian-kernel translation family on `window` with a margin meeting
/// [`EDGE_TOLERANCE`].
pub fn stationary_gaussian(
    scale: f64,
    lambda: f64,
    window: Rect,
    alpha: Exponent,
) -> Result<DasProcessSpec> {
    let margin = gaussian_margin(scale, lambda, &window, alpha, EDGE_TOLERANCE)?;
    let kernel = crate::measure::ProbabilityMeasureSpec::gaussian(crate::measure::Point::new(0.0, 0.0), scale)?;
    DasProcessSpec::new(
        SpectralMeasure::translation_family(kernel, lambda, window, margin)?,
        alpha,
        PhaseSpace::PlanarWindow(window),
    )
}
