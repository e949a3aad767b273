//! Strictly α-stable random measures.
//!
//! With a finite spectral measure of total mass `c`, a realization is the
//! LePage series `ζ = b Σ_k γ_k^{-1/α} ε_k`, `b = (c / Γ(1-α))^{1/α}`, where
//! `γ_k` are the arrival times of a unit-rate Poisson process and `ε_k` are
//! iid draws from `σ / c`. The series is truncated once the expected mass of
//! the remaining terms falls below a tolerance.
//!
//! The Laplace functional `L[h] = exp{-∫ ⟨h, μ⟩^α σ(dμ)}` is evaluated in
//! closed form for finite spectral measures and by midpoint quadrature over
//! centres for translation families. It is the oracle every sampler in the
//! crate is checked against.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::measure::{
    ensure_disjoint, MeasureRef, ProbabilityMeasureSpec, QuerySet, SpectralMeasure,
    WeightedMeasureSample, WeightedTerm,
};
use crate::rng::RandomSource;
use crate::scalar::{sample_positive_stable, Exponent};
use crate::special::{ln_gamma, ln_gamma_ratio};

/// Truncation control for the LePage series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LePageConfig {
    /// Target expected mass of the neglected tail.
    pub tolerance: f64,
    pub max_terms: usize,
}

impl Default for LePageConfig {
    fn default() -> Self {
        Self { tolerance: 1e-4, max_terms: 4096 }
    }
}

impl LePageConfig {
    pub fn new(tolerance: f64, max_terms: usize) -> Result<Self> {
        let cfg = Self { tolerance, max_terms };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return param("LePage tolerance must be positive");
        }
        if self.max_terms == 0 {
            return param("LePage term cap must be at least 1");
        }
        Ok(())
    }
}

/// `b = (c / Γ(1-α))^{1/α}`.
pub fn lepage_scale(c: f64, alpha: Exponent) -> f64 {
    let a = alpha.get();
    ((c.ln() - ln_gamma(1.0 - a)) / a).exp()
}

/// Bound on the expected mass of the terms after the `k`-th,
/// `b Γ(k+1-1/α)/Γ(k+1) · (k+1)/(1/α - 1)`; requires `k + 1 > 1/α`.
pub fn lepage_tail_bound(b: f64, alpha: Exponent, k: usize) -> f64 {
    let beta = 1.0 / alpha.get();
    let k = k as f64;
    b * ln_gamma_ratio(k + 1.0, -beta).exp() * (k + 1.0) / (beta - 1.0)
}

/// Number of series terms and the resulting tail bound: the smallest
/// `K >= ceil(1/α) + 1` whose bound is below the tolerance, capped at
/// `max_terms`.
pub fn lepage_truncation(b: f64, alpha: Exponent, cfg: &LePageConfig) -> (usize, f64) {
    let min_terms = (1.0 / alpha.get()).ceil() as usize + 1;
    let cap = cfg.max_terms.max(min_terms);
    let bound = |k: usize| lepage_tail_bound(b, alpha, k);
    if bound(min_terms) < cfg.tolerance {
        return (min_terms, bound(min_terms));
    }
    if bound(cap) >= cfg.tolerance {
        return (cap, bound(cap));
    }
    let (mut lo, mut hi) = (min_terms, cap);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound(mid) < cfg.tolerance {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi, bound(hi))
}

/// Truncated LePage realization of the StαS measure with spectral measure
/// `sigma`. Translation families are accepted: their atoms are translated
/// kernels with uniformly drawn centres.
pub fn sample_stable_measure(
    sigma: &SpectralMeasure,
    alpha: Exponent,
    cfg: &LePageConfig,
    rng: &mut RandomSource,
) -> Result<WeightedMeasureSample> {
    cfg.validate()?;
    if alpha.is_one() {
        return param("the series needs α < 1; use deterministic_measure for α = 1");
    }
    let c = sigma.total();
    if c.is_nan() || c <= 0.0 {
        return param("empty spectral measure");
    }
    let b = lepage_scale(c, alpha);
    let (k, budget) = lepage_truncation(b, alpha, cfg);
    let picker = sigma.picker();
    let inv_alpha = 1.0 / alpha.get();
    let mut gamma = 0.0;
    let terms = (0..k)
        .map(|_| {
            gamma += rng.exponential();
            WeightedTerm {
                weight: b * gamma.powf(-inv_alpha),
                measure: picker.draw(rng),
            }
        })
        .collect();
    Ok(WeightedMeasureSample { terms, truncation_budget: budget })
}

/// The non-random measure `Σ c_i μ_i`, which is the StαS measure for α = 1.
pub fn deterministic_measure(sigma: &SpectralMeasure) -> Result<WeightedMeasureSample> {
    match sigma {
        SpectralMeasure::Finite { components } => Ok(WeightedMeasureSample {
            terms: components
                .iter()
                .enumerate()
                .map(|(i, comp)| WeightedTerm {
                    weight: comp.weight,
                    measure: MeasureRef::Component(i),
                })
                .collect(),
            truncation_budget: 0.0,
        }),
        SpectralMeasure::TranslationFamily { .. } => {
            param("deterministic measure needs a finite spectral measure")
        }
    }
}

/// Exact sample `c^{1/α} ζ_α μ` of the StαS measure whose spectral measure
/// is `c δ_μ`. The single term refers to component 0 of
/// `SpectralMeasure::finite([(c, mu)])`.
pub fn sample_degenerate_stable_measure(
    c: f64,
    mu: &ProbabilityMeasureSpec,
    alpha: Exponent,
    rng: &mut RandomSource,
) -> Result<WeightedMeasureSample> {
    if alpha.is_one() {
        return param("degenerate sampler needs α < 1");
    }
    if !(c > 0.0 && c.is_finite()) {
        return param("spectral weight must be positive");
    }
    mu.validate()?;
    let weight = c.powf(1.0 / alpha.get()) * sample_positive_stable(alpha, rng);
    Ok(WeightedMeasureSample {
        terms: vec![WeightedTerm { weight, measure: MeasureRef::Component(0) }],
        truncation_budget: 0.0,
    })
}

/// Non-negative step function `Σ h_j 1_{B_j}` over disjoint query sets.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    steps: Vec<(QuerySet, f64)>,
}

impl StepFunction {
    pub fn new(steps: Vec<(QuerySet, f64)>) -> Result<Self> {
        if steps.iter().any(|(_, h)| !(*h >= 0.0 && h.is_finite())) {
            return param("step function values must be finite and non-negative");
        }
        let sets: Vec<QuerySet> = steps.iter().map(|(s, _)| s.clone()).collect();
        ensure_disjoint(&sets)?;
        Ok(Self { steps })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn indicator(set: QuerySet, value: f64) -> Result<Self> {
        Self::new(vec![(set, value)])
    }

    pub fn steps(&self) -> &[(QuerySet, f64)] {
        &self.steps
    }

    /// `⟨h, μ⟩ = Σ h_j μ(B_j)`.
    pub fn integrate(&self, mu: &ProbabilityMeasureSpec) -> Result<f64> {
        let mut total = 0.0;
        for (set, h) in &self.steps {
            if *h != 0.0 {
                total += h * mu.mass(set)?;
            }
        }
        Ok(total)
    }
}

/// Midpoint-rule settings for integrals over translation centres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    /// Cells per side of the centre grid.
    pub grid: usize,
    /// Largest acceptable error estimate on the returned value.
    pub tolerance: Option<f64>,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { grid: 200, tolerance: None }
    }
}

/// A functional value together with its numerical error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub value: f64,
    /// Zero for closed forms.
    pub error: f64,
    /// Grid side used, when quadrature was needed.
    pub grid: Option<usize>,
}

/// `∫ f(μ)^α σ(dμ)` together with an error estimate.
///
/// For translation families the error estimate is the Richardson
/// difference between the `n` and `n/2` midpoint grids.
pub fn spectral_power_integral<F>(
    sigma: &SpectralMeasure,
    alpha: Exponent,
    quad: &Quadrature,
    f: F,
) -> Result<(f64, f64, Option<usize>)>
where
    F: Fn(&ProbabilityMeasureSpec) -> Result<f64>,
{
    let a = alpha.get();
    match sigma {
        SpectralMeasure::Finite { components } => {
            let mut total = 0.0;
            for comp in components {
                let v = f(&comp.measure)?;
                if v > 0.0 {
                    total += comp.weight * v.powf(a);
                }
            }
            Ok((total, 0.0, None))
        }
        SpectralMeasure::TranslationFamily { kernel, lambda, window, margin } => {
            if quad.grid < 2 {
                return param("quadrature grid needs at least 2 cells per side");
            }
            let region = window.dilate(*margin);
            let midpoint = |n: usize| -> Result<f64> {
                let dx = region.width() / n as f64;
                let dy = region.height() / n as f64;
                let mut sum = 0.0;
                for j in 0..n {
                    let y = region.y0() + (j as f64 + 0.5) * dy;
                    for i in 0..n {
                        let x = region.x0() + (i as f64 + 0.5) * dx;
                        let v = f(&kernel.translate(x, y))?;
                        if v > 0.0 {
                            sum += v.powf(a);
                        }
                    }
                }
                Ok(lambda * sum * dx * dy)
            };
            let fine = midpoint(quad.grid)?;
            let coarse = midpoint(quad.grid / 2)?;
            Ok((fine, (fine - coarse).abs() / 3.0, Some(quad.grid)))
        }
    }
}

/// `exp{-I}` for a spectral integral `I`, checking the requested precision.
pub(crate) fn exp_functional(
    integral: (f64, f64, Option<usize>),
    quad: &Quadrature,
) -> Result<FunctionalValue> {
    let (value_in_exponent, err_in_exponent, grid) = integral;
    let value = (-value_in_exponent).exp();
    // d/dI e^{-I} = -e^{-I}
    let error = value * err_in_exponent;
    if let (Some(requested), Some(g)) = (quad.tolerance, grid) {
        if error > requested {
            return Err(Error::Quadrature { estimate: error, requested, grid: g });
        }
    }
    Ok(FunctionalValue { value, error, grid })
}

/// Laplace functional `E exp{-⟨h, ζ⟩} = exp{-∫ ⟨h, μ⟩^α σ(dμ)}`.
pub fn stable_laplace_functional(
    sigma: &SpectralMeasure,
    alpha: Exponent,
    h: &StepFunction,
    quad: &Quadrature,
) -> Result<FunctionalValue> {
    let integral = spectral_power_integral(sigma, alpha, quad, |mu| h.integrate(mu))?;
    exp_functional(integral, quad)
}

/// Whether the StαS measure has independent values on disjoint sets.
pub fn is_independently_scattered(sigma: &SpectralMeasure) -> bool {
    sigma.is_independently_scattered()
}
