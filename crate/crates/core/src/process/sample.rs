use crate::error::{param, Error, Result};
use crate::measure::{
    ensure_disjoint, Location, MeasureRef, PhaseSpace, PointPattern, ProbabilityMeasureSpec,
    QuerySet, SpectralMeasure,
};
use crate::rng::RandomSource;
use crate::scalar::{sample_positive_stable, sample_sibuya, Exponent};
use crate::stable_measure::{lepage_scale, sample_stable_measure, LePageConfig};

use super::{DasProcessSpec, MarkedRealization, ProcessRoute};

/// Largest number of diffuse points a single realization may materialize.
/// Atomic measures are stored as multiplicities and never hit this cap.
pub const MAX_POINTS: u64 = 5_000_000;

/// Receives groups of points: `n` iid points from a measure, or a Poisson
/// process with a multiple of it as intensity.
trait Sink {
    fn scatter(&mut self, r: &MeasureRef, n: u64, tag: u64, rng: &mut RandomSource) -> Result<()>;
    fn scatter_poisson(&mut self, r: &MeasureRef, mean: f64, tag: u64, rng: &mut RandomSource) -> Result<()>;
}

struct PatternSink<'a> {
    sigma: &'a SpectralMeasure,
    window: Option<&'a PhaseSpace>,
    pattern: PointPattern,
    diffuse: u64,
}

impl<'a> PatternSink<'a> {
    fn new(sigma: &'a SpectralMeasure, window: Option<&'a PhaseSpace>) -> Self {
        Self { sigma, window, pattern: PointPattern::new(), diffuse: 0 }
    }

    fn reserve(&mut self, k: u64) -> Result<()> {
        self.diffuse = self.diffuse.saturating_add(k);
        if self.diffuse > MAX_POINTS {
            return Err(Error::Resource(format!(
                "realization exceeds {MAX_POINTS} materialized points; use binned counts"
            )));
        }
        Ok(())
    }

    /// Atoms visible in the window together with their weights.
    fn visible_atoms(&self, mu: &ProbabilityMeasureSpec) -> Vec<(Location, f64)> {
        match mu {
            ProbabilityMeasureSpec::Atomic { atoms } => atoms
                .iter()
                .filter(|a| self.window.is_none_or(|w| w.contains(&a.point)))
                .map(|a| (a.point, a.weight))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Mass of a diffuse measure inside the window.
    fn window_mass(&self, mu: &ProbabilityMeasureSpec) -> Result<f64> {
        match self.window {
            Some(PhaseSpace::PlanarWindow(w)) => mu.mass(&QuerySet::Rect(*w)),
            Some(_) => param("diffuse measure observed through a discrete window"),
            None => Ok(1.0),
        }
    }

    fn place(&mut self, mu: &ProbabilityMeasureSpec, k: u64, tag: u64, rng: &mut RandomSource) -> Result<()> {
        self.reserve(k)?;
        for _ in 0..k {
            let loc = match self.window {
                Some(PhaseSpace::PlanarWindow(w)) => match mu.sample_point_in(w, rng) {
                    Some(p) => Location::Planar(p),
                    None => continue,
                },
                _ => mu.sample_point(rng),
            };
            self.pattern.push(loc, 1, Some(tag));
        }
        Ok(())
    }
}

impl Sink for PatternSink<'_> {
    fn scatter(&mut self, r: &MeasureRef, n: u64, tag: u64, rng: &mut RandomSource) -> Result<()> {
        let mu = self.sigma.resolve(r);
        if let ProbabilityMeasureSpec::Atomic { .. } = mu.as_ref() {
            let atoms = self.visible_atoms(&mu);
            let probs: Vec<f64> = atoms.iter().map(|a| a.1).collect();
            let mut out = vec![0; atoms.len()];
            rng.multinomial_into(n, &probs, &mut out);
            for ((loc, _), k) in atoms.into_iter().zip(out) {
                self.pattern.push(loc, k, Some(tag));
            }
            return Ok(());
        }
        let k = rng.binomial(n, self.window_mass(&mu)?);
        self.place(&mu, k, tag, rng)
    }

    fn scatter_poisson(&mut self, r: &MeasureRef, mean: f64, tag: u64, rng: &mut RandomSource) -> Result<()> {
        let mu = self.sigma.resolve(r);
        if let ProbabilityMeasureSpec::Atomic { .. } = mu.as_ref() {
            for (loc, w) in self.visible_atoms(&mu) {
                let k = rng.poisson(mean * w);
                self.pattern.push(loc, k, Some(tag));
            }
            return Ok(());
        }
        let k = rng.poisson(mean * self.window_mass(&mu)?);
        self.place(&mu, k, tag, rng)
    }
}

/// Counts on disjoint bins. Masses of finite-σ components are cached.
struct CountSink<'a> {
    sigma: &'a SpectralMeasure,
    bins: &'a [QuerySet],
    cache: Vec<Option<Vec<f64>>>,
    scratch: Vec<u64>,
    counts: Vec<u64>,
}

impl<'a> CountSink<'a> {
    fn new(sigma: &'a SpectralMeasure, bins: &'a [QuerySet]) -> Result<Self> {
        ensure_disjoint(bins)?;
        let n = match sigma {
            SpectralMeasure::Finite { components } => components.len(),
            SpectralMeasure::TranslationFamily { .. } => 0,
        };
        Ok(Self {
            sigma,
            bins,
            cache: vec![None; n],
            scratch: vec![0; bins.len()],
            counts: vec![0; bins.len()],
        })
    }

    fn masses(&mut self, r: &MeasureRef) -> Result<Vec<f64>> {
        if let MeasureRef::Component(i) = r {
            if let Some(Some(m)) = self.cache.get(*i) {
                return Ok(m.clone());
            }
        }
        let mu = self.sigma.resolve(r);
        let m: Vec<f64> = self.bins.iter().map(|b| mu.mass(b)).collect::<Result<_>>()?;
        if let MeasureRef::Component(i) = r {
            if let Some(slot) = self.cache.get_mut(*i) {
                *slot = Some(m.clone());
            }
        }
        Ok(m)
    }
}

impl Sink for CountSink<'_> {
    fn scatter(&mut self, r: &MeasureRef, n: u64, _tag: u64, rng: &mut RandomSource) -> Result<()> {
        let m = self.masses(r)?;
        rng.multinomial_into(n, &m, &mut self.scratch);
        for (c, k) in self.counts.iter_mut().zip(&self.scratch) {
            *c = c.saturating_add(*k);
        }
        Ok(())
    }

    fn scatter_poisson(&mut self, r: &MeasureRef, mean: f64, _tag: u64, rng: &mut RandomSource) -> Result<()> {
        let m = self.masses(r)?;
        for (c, p) in self.counts.iter_mut().zip(m) {
            *c = c.saturating_add(rng.poisson(mean * p));
        }
        Ok(())
    }
}

fn run_cluster(sigma: &SpectralMeasure, alpha: Exponent, sink: &mut impl Sink, rng: &mut RandomSource) -> Result<()> {
    let total = sigma.total();
    if total == 0.0 {
        return Ok(());
    }
    let picker = sigma.picker();
    let clusters = rng.poisson(total);
    for tag in 0..clusters {
        let r = picker.draw(rng);
        let n = sample_sibuya(alpha, rng);
        sink.scatter(&r, n, tag, rng)?;
    }
    Ok(())
}

/// Zero-truncated Poisson(w).
fn positive_poisson(w: f64, rng: &mut RandomSource) -> u64 {
    if w >= 1.0 {
        loop {
            let n = rng.poisson(w);
            if n > 0 {
                return n;
            }
        }
    }
    let u = rng.uniform();
    let mut p = w / w.exp_m1();
    let mut cdf = p;
    let mut k = 1u64;
    while u > cdf && k < 1000 {
        k += 1;
        p *= w / k as f64;
        cdf += p;
    }
    k
}

/// Truncated LePage series followed by an exact draw of the points the
/// neglected terms would have produced. Given the last retained weight
/// `w_K`, the remaining weights form a Poisson process with intensity
/// `α b^α w^{-α-1}` on `(0, w_K)`; those carrying at least one point are
/// drawn by thinning a `w^{-α}` envelope.
fn run_lepage(
    sigma: &SpectralMeasure,
    alpha: Exponent,
    cfg: &LePageConfig,
    sink: &mut impl Sink,
    rng: &mut RandomSource,
) -> Result<()> {
    if sigma.is_empty() {
        return Ok(());
    }
    let series = sample_stable_measure(sigma, alpha, cfg, rng)?;
    for (k, term) in series.terms.iter().enumerate() {
        sink.scatter_poisson(&term.measure, term.weight, k as u64, rng)?;
    }
    let a = alpha.get();
    let b = lepage_scale(sigma.total(), alpha);
    let w_last = series.terms.last().map_or(f64::INFINITY, |t| t.weight);
    let envelope = a * b.powf(a) * w_last.powf(1.0 - a) / (1.0 - a);
    let candidates = rng.poisson(envelope);
    let picker = sigma.picker();
    let mut tag = series.terms.len() as u64;
    for _ in 0..candidates {
        let w = w_last * rng.uniform().powf(1.0 / (1.0 - a));
        if rng.uniform() * w < -(-w).exp_m1() {
            let n = positive_poisson(w, rng);
            let r = picker.draw(rng);
            sink.scatter(&r, n, tag, rng)?;
            tag += 1;
        }
    }
    Ok(())
}

fn run_cox(
    sigma: &SpectralMeasure,
    alpha: Exponent,
    cfg: &LePageConfig,
    sink: &mut impl Sink,
    rng: &mut RandomSource,
) -> Result<()> {
    match sigma {
        SpectralMeasure::Finite { components } => {
            // ζ = Σ c_i^{1/α} ζ_{α,i} μ_i with independent positive stable ζ_{α,i}.
            for (i, comp) in components.iter().enumerate() {
                let w = if alpha.is_one() {
                    comp.weight
                } else {
                    comp.weight.powf(1.0 / alpha.get()) * sample_positive_stable(alpha, rng)
                };
                sink.scatter_poisson(&MeasureRef::Component(i), w, i as u64, rng)?;
            }
            Ok(())
        }
        SpectralMeasure::TranslationFamily { .. } if alpha.is_one() => {
            // Poisson process with intensity λ ∫ μ_x dx.
            let picker = sigma.picker();
            for tag in 0..rng.poisson(sigma.total()) {
                sink.scatter(&picker.draw(rng), 1, tag, rng)?;
            }
            Ok(())
        }
        SpectralMeasure::TranslationFamily { .. } => run_lepage(sigma, alpha, cfg, sink, rng),
    }
}

fn run_route(
    spec: &DasProcessSpec,
    route: ProcessRoute,
    cfg: &LePageConfig,
    sink: &mut impl Sink,
    rng: &mut RandomSource,
) -> Result<()> {
    match route {
        ProcessRoute::Cluster => run_cluster(&spec.sigma, spec.alpha, sink, rng),
        ProcessRoute::Cox => run_cox(&spec.sigma, spec.alpha, cfg, sink, rng),
        ProcessRoute::Lepage => {
            if matches!(spec.sigma, SpectralMeasure::TranslationFamily { .. }) {
                return Err(Error::UnsupportedRoute(
                    "the LePage route needs a finite spectral measure".into(),
                ));
            }
            if spec.alpha.is_one() {
                return param("the LePage route needs α < 1");
            }
            run_lepage(&spec.sigma, spec.alpha, cfg, sink, rng)
        }
    }
}

/// Realization of the DαS process by `route`, restricted to the window.
pub fn sample_das(
    spec: &DasProcessSpec,
    route: ProcessRoute,
    cfg: &LePageConfig,
    rng: &mut RandomSource,
) -> Result<MarkedRealization> {
    let seed = rng.seed();
    let mut sink = PatternSink::new(&spec.sigma, Some(&spec.window));
    run_route(spec, route, cfg, &mut sink, rng)?;
    Ok(MarkedRealization { pattern: sink.pattern, route, seed })
}

pub fn sample_das_cluster(spec: &DasProcessSpec, rng: &mut RandomSource) -> Result<MarkedRealization> {
    sample_das(spec, ProcessRoute::Cluster, &LePageConfig::default(), rng)
}

pub fn sample_das_cox(spec: &DasProcessSpec, cfg: &LePageConfig, rng: &mut RandomSource) -> Result<MarkedRealization> {
    sample_das(spec, ProcessRoute::Cox, cfg, rng)
}

pub fn sample_das_lepage(
    spec: &DasProcessSpec,
    cfg: &LePageConfig,
    rng: &mut RandomSource,
) -> Result<MarkedRealization> {
    sample_das(spec, ProcessRoute::Lepage, cfg, rng)
}

/// Counts `(Φ(B_1), …, Φ(B_k))` on disjoint bins without materializing
/// points.
pub fn sample_das_counts(
    spec: &DasProcessSpec,
    route: ProcessRoute,
    cfg: &LePageConfig,
    bins: &[QuerySet],
    rng: &mut RandomSource,
) -> Result<Vec<u64>> {
    let mut sink = CountSink::new(&spec.sigma, bins)?;
    run_route(spec, route, cfg, &mut sink, rng)?;
    Ok(sink.counts)
}

/// Sibuya point process: `Sib(α)` many iid points from `mu`.
pub fn sample_sibuya_process(alpha: Exponent, mu: &ProbabilityMeasureSpec, rng: &mut RandomSource) -> Result<PointPattern> {
    mu.validate()?;
    let sigma = SpectralMeasure::Finite {
        components: vec![crate::measure::SpectralComponent { weight: 1.0, measure: mu.clone() }],
    };
    let mut sink = PatternSink::new(&sigma, None);
    let n = sample_sibuya(alpha, rng);
    sink.scatter(&MeasureRef::Component(0), n, 0, rng)?;
    Ok(sink.pattern)
}

/// Counts of a Sibuya point process on disjoint bins.
pub fn sibuya_process_counts(
    alpha: Exponent,
    mu: &ProbabilityMeasureSpec,
    bins: &[QuerySet],
    rng: &mut RandomSource,
) -> Result<Vec<u64>> {
    let sigma = SpectralMeasure::Finite {
        components: vec![crate::measure::SpectralComponent { weight: 1.0, measure: mu.clone() }],
    };
    let mut sink = CountSink::new(&sigma, bins)?;
    let n = sample_sibuya(alpha, rng);
    sink.scatter(&MeasureRef::Component(0), n, 0, rng)?;
    Ok(sink.counts)
}
