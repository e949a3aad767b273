//! Monte Carlo estimators and distributional tests.
//!
//! Only bounded functionals (p.g.f. values, Laplace transforms, void
//! indicators) are estimated: counts of discrete stable processes with
//! `α < 1` have infinite means, so their sample means never settle.
//! Accumulators and histograms merge associatively, which keeps chunked
//! parallel runs deterministic for a fixed seed.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::scalar::{sibuya_pmf, sibuya_survival, thin_integer, Exponent};
use crate::special::{chi_square_sf, kolmogorov_sf};

/// Significance level used throughout the acceptance checks.
pub const LEVEL: f64 = 0.01;

/// Smallest expected count a chi-square cell may carry after pooling.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub draws: u64,
}

impl McEstimate {
    /// `|value - target| <= k · std_error + slack`.
    pub fn within(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error + slack
    }

    /// Distance to `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.value == target { 0.0 } else { f64::INFINITY }
        } else {
            (self.value - target) / self.std_error
        }
    }
}

/// Welford mean/variance tracker.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn estimate(&self) -> Result<McEstimate> {
        if self.n == 0 {
            return Err(Error::InsufficientData("no samples".into()));
        }
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        Ok(McEstimate {
            value: self.mean,
            std_error: (var.max(0.0) / self.n as f64).sqrt(),
            draws: self.n,
        })
    }
}

impl FromIterator<f64> for MeanAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::default();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// `s^ξ` with `0^0 = 1`.
#[inline]
pub fn pgf_term(s: f64, n: u64) -> f64 {
    if n == 0 {
        1.0
    } else if n <= i32::MAX as u64 {
        s.powi(n as i32)
    } else {
        s.powf(n as f64)
    }
}

/// Mean and standard error of `s^{ξ_i}`.
pub fn empirical_pgf(samples: &[u64], s: f64) -> Result<McEstimate> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Parameter(format!("p.g.f. argument {s} outside [0, 1]")));
    }
    samples.iter().map(|&n| pgf_term(s, n)).collect::<MeanAccumulator>().estimate()
}

/// Mean and standard error of `e^{-z x_i}`.
pub fn empirical_laplace(samples: &[f64], z: f64) -> Result<McEstimate> {
    if z.is_nan() || z <= 0.0 {
        return Err(Error::Parameter(format!("Laplace argument must be positive, got {z}")));
    }
    samples.iter().map(|&x| (-z * x).exp()).collect::<MeanAccumulator>().estimate()
}

/// Count histogram over arbitrary ordered cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram<K: Ord> {
    cells: BTreeMap<K, u64>,
    total: u64,
}

impl<K: Ord> Default for Histogram<K> {
    fn default() -> Self {
        Self { cells: BTreeMap::new(), total: 0 }
    }
}

impl<K: Ord + Clone> Histogram<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: K) {
        self.add_n(key, 1);
    }

    pub fn add_n(&mut self, key: K, n: u64) {
        if n > 0 {
            *self.cells.entry(key).or_insert(0) += n;
            self.total += n;
        }
    }

    pub fn merge(&mut self, other: &Histogram<K>) {
        for (k, &n) in &other.cells {
            self.add_n(k.clone(), n);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn get(&self, key: &K) -> u64 {
        self.cells.get(key).copied().unwrap_or(0)
    }

    pub fn frequency(&self, key: &K) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.get(key) as f64 / self.total as f64
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = (&K, u64)> {
        self.cells.iter().map(|(k, &n)| (k, n))
    }
}

impl<K: Ord + Clone> FromIterator<K> for Histogram<K> {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        let mut h = Self::new();
        for k in iter {
            h.add(k);
        }
        h
    }
}

/// Outcome of a hypothesis test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub draws: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl TestReport {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value > level
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_route(mut self, route: impl Into<String>) -> Self {
        self.route = Some(route.into());
        self
    }
}

/// Merge cells whose expected count is below [`MIN_EXPECTED`] into one
/// bucket; a still-thin bucket is folded into the smallest retained cell.
/// `cells` holds per-cell (observed A, observed B-or-expected) pairs and
/// `expected_min` returns the smaller expected count of a cell.
fn pool<F>(cells: Vec<(f64, f64)>, expected_min: F) -> Vec<(f64, f64)>
where
    F: Fn(&(f64, f64)) -> f64,
{
    let mut kept: Vec<(f64, f64)> = Vec::new();
    let mut lump = (0.0, 0.0);
    let mut lumped = false;
    for cell in cells {
        if expected_min(&cell) >= MIN_EXPECTED {
            kept.push(cell);
        } else {
            lump.0 += cell.0;
            lump.1 += cell.1;
            lumped = true;
        }
    }
    if lumped {
        if expected_min(&lump) >= MIN_EXPECTED || kept.is_empty() {
            kept.push(lump);
        } else {
            let smallest = kept
                .iter()
                .enumerate()
                .min_by(|a, b| expected_min(a.1).total_cmp(&expected_min(b.1)))
                .map(|(i, _)| i)
                .expect("non-empty");
            kept[smallest].0 += lump.0;
            kept[smallest].1 += lump.1;
        }
    }
    kept
}

/// Two-sample chi-square test on histograms over shared cells, allowing
/// unequal sample sizes.
pub fn chi_square_two_sample<K: Ord + Clone>(a: &Histogram<K>, b: &Histogram<K>) -> Result<TestReport> {
    let (na, nb) = (a.total() as f64, b.total() as f64);
    if a.total() == 0 || b.total() == 0 {
        return Err(Error::InsufficientData("empty histogram".into()));
    }
    if na + nb < 2.0 * MIN_EXPECTED {
        return Err(Error::InsufficientData(format!("only {} observations", na + nb)));
    }
    let mut merged: BTreeMap<&K, (f64, f64)> = BTreeMap::new();
    for (k, n) in a.cells() {
        merged.entry(k).or_default().0 += n as f64;
    }
    for (k, n) in b.cells() {
        merged.entry(k).or_default().1 += n as f64;
    }
    let share_a = na / (na + nb);
    let share_b = nb / (na + nb);
    let buckets = pool(merged.into_values().collect(), |&(x, y)| {
        (x + y) * share_a.min(share_b)
    });
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let statistic: f64 = buckets
        .iter()
        .map(|&(x, y)| {
            let d = ka * x - kb * y;
            d * d / (x + y)
        })
        .sum();
    let dof = buckets.len().saturating_sub(1);
    Ok(TestReport {
        route: None,
        method: "chi-square two-sample".into(),
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof),
        draws: a.total() + b.total(),
        seed: None,
    })
}

/// Chi-square goodness of fit of observed cell counts against cell
/// probabilities (which should already include any tail cell).
pub fn chi_square_gof(observed: &[u64], probabilities: &[f64]) -> Result<TestReport> {
    if observed.len() != probabilities.len() {
        return Err(Error::Parameter("observed and expected cells differ in length".into()));
    }
    let n: u64 = observed.iter().sum();
    if (n as f64) < MIN_EXPECTED {
        return Err(Error::InsufficientData(format!("only {n} observations")));
    }
    let cells = observed
        .iter()
        .zip(probabilities)
        .map(|(&o, &p)| (o as f64, p * n as f64))
        .collect();
    let buckets = pool(cells, |&(_, e)| e);
    let statistic: f64 = buckets
        .iter()
        .map(|&(o, e)| {
            if e > 0.0 {
                (o - e) * (o - e) / e
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let dof = buckets.len().saturating_sub(1);
    Ok(TestReport {
        route: None,
        method: "chi-square goodness of fit".into(),
        statistic,
        dof,
        p_value: if statistic.is_infinite() { 0.0 } else { chi_square_sf(statistic, dof) },
        draws: n,
        seed: None,
    })
}

/// Number of explicit Sibuya cells before the tail bucket.
pub const SIBUYA_GOF_CELLS: u64 = 50;

/// Goodness of fit of positive integer samples to Sib(α) on cells
/// `1..=50` plus the tail `{> 50}`.
pub fn gof_sibuya(samples: &[u64], alpha: Exponent) -> Result<TestReport> {
    let k = SIBUYA_GOF_CELLS as usize;
    let mut observed = vec![0u64; k + 1];
    for &x in samples {
        if x == 0 {
            return Err(Error::Domain("Sibuya samples must be positive".into()));
        }
        observed[(x.min(SIBUYA_GOF_CELLS + 1) - 1) as usize] += 1;
    }
    let mut probs: Vec<f64> = (1..=SIBUYA_GOF_CELLS)
        .map(|n| sibuya_pmf(alpha, n))
        .collect::<Result<_>>()?;
    probs.push(sibuya_survival(alpha, SIBUYA_GOF_CELLS));
    let mut report = chi_square_gof(&observed, &probs)?;
    report.method = "chi-square Sibuya goodness of fit".into();
    Ok(report)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    Ok(TestReport {
        route: None,
        method: "Kolmogorov-Smirnov two-sample".into(),
        statistic: d,
        dof: 0,
        p_value: kolmogorov_sf(lambda),
        draws: (n + m) as u64,
        seed: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub draws: u64,
    pub frequency: f64,
    pub std_error: f64,
}

/// Running frequency of void events with its standard-error band, one
/// point every `stride` realizations (and at the end).
pub fn running_void_frequency<I>(voids: I, stride: u64) -> Vec<TracePoint>
where
    I: IntoIterator<Item = bool>,
{
    let stride = stride.max(1);
    let mut trace = Vec::new();
    let (mut n, mut hits) = (0u64, 0u64);
    let point = |n: u64, hits: u64| {
        let f = hits as f64 / n as f64;
        TracePoint { draws: n, frequency: f, std_error: (f * (1.0 - f) / n as f64).sqrt() }
    };
    for v in voids {
        n += 1;
        hits += v as u64;
        if n % stride == 0 {
            trace.push(point(n, hits));
        }
    }
    if n > 0 && n % stride != 0 {
        trace.push(point(n, hits));
    }
    trace
}

/// CSV `draws,frequency,std_error`.
pub fn write_trace_csv<W: Write>(trace: &[TracePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in trace {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

/// SplitMix64 step; used to derive child seeds from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Outcome of repeating a seeded check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedProtocol {
    pub runs: usize,
    pub passes: usize,
    pub required: usize,
}

impl SeedProtocol {
    pub fn passed(&self) -> bool {
        self.passes >= self.required
    }
}

/// Run `check` on `runs` seeds derived from `master`; pass when at least
/// `required` runs pass.
pub fn seed_protocol<F>(master: u64, runs: usize, required: usize, mut check: F) -> SeedProtocol
where
    F: FnMut(u64) -> bool,
{
    let passes = (0..runs).filter(|&i| check(derive_seed(master, i as u64))).count();
    SeedProtocol { runs, passes, required }
}

/// Draws per independent stream in [`run_chunked`].
pub const CHUNK: u64 = 1 << 16;

/// Split `draws` into chunks of [`CHUNK`], run chunk `i` on stream `i` of
/// `seed` and return the per-chunk results in chunk order. The output does
/// not depend on `workers`.
pub fn run_chunked<T, F>(draws: u64, seed: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut RandomSource) -> T + Sync,
{
    let chunks = draws.div_ceil(CHUNK);
    let len = |i: u64| CHUNK.min(draws - i * CHUNK);
    let workers = workers.clamp(1, chunks.max(1) as usize);
    if workers == 1 {
        return (0..chunks)
            .map(|i| f(len(i), &mut RandomSource::stream(seed, i)))
            .collect();
    }
    let mut slots: Vec<Option<T>> = (0..chunks).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                scope.spawn(move || {
                    (w as u64..chunks)
                        .step_by(workers)
                        .map(|i| (i, f(len(i), &mut RandomSource::stream(seed, i))))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, out) in h.join().expect("worker panicked") {
                slots[i as usize] = Some(out);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("chunk result")).collect()
}

/// Monte Carlo budget for a chunked experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Harness {
    pub draws: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Harness {
    pub fn new(draws: u64, seed: u64) -> Self {
        Self { draws, seed, workers: 1 }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Mean and standard error of `f` over `h.draws` realizations.
pub fn mc_mean<F>(h: &Harness, f: F) -> Result<McEstimate>
where
    F: Fn(&mut RandomSource) -> Result<f64> + Sync,
{
    let parts = run_chunked(h.draws, h.seed, h.workers, |n, rng| {
        let mut acc = MeanAccumulator::default();
        for _ in 0..n {
            acc.push(f(rng)?);
        }
        Ok::<_, Error>(acc)
    });
    let mut total = MeanAccumulator::default();
    for p in parts {
        total.merge(&p?);
    }
    total.estimate()
}

/// Coordinates above this value share one histogram cell.
pub const COUNT_CELL_CAP: u64 = 64;

pub fn count_key(counts: &[u64]) -> Vec<u64> {
    counts.iter().map(|&n| n.min(COUNT_CELL_CAP)).collect()
}

/// Chi-square two-sample test between the joint count laws produced by two
/// samplers, `h.draws` realizations each.
pub fn compare_count_laws<A, B>(a: A, b: B, h: &Harness) -> Result<TestReport>
where
    A: Fn(&mut RandomSource) -> Result<Vec<u64>> + Sync,
    B: Fn(&mut RandomSource) -> Result<Vec<u64>> + Sync,
{
    let parts = run_chunked(h.draws, h.seed, h.workers, |n, rng| {
        let mut ha = Histogram::new();
        let mut hb = Histogram::new();
        for _ in 0..n {
            ha.add(count_key(&a(rng)?));
            hb.add(count_key(&b(rng)?));
        }
        Ok::<_, Error>((ha, hb))
    });
    let mut ha = Histogram::new();
    let mut hb = Histogram::new();
    for p in parts {
        let (x, y) = p?;
        ha.merge(&x);
        hb.merge(&y);
    }
    Ok(chi_square_two_sample(&ha, &hb)?.with_seed(h.seed))
}

fn thin_counts(counts: &mut [u64], t: f64, rng: &mut RandomSource) -> Result<()> {
    for n in counts.iter_mut() {
        *n = thin_integer(*n, t, rng)?;
    }
    Ok(())
}

fn add_counts(acc: &mut [u64], other: &[u64]) -> Result<()> {
    if acc.len() != other.len() {
        return Err(Error::Parameter("count vectors differ in length".into()));
    }
    for (a, b) in acc.iter_mut().zip(other) {
        *a = a.saturating_add(*b);
    }
    Ok(())
}

/// Tests `Φ =_D t^{1/α}∘Φ′ + (1−t)^{1/α}∘Φ″` on binned counts.
pub fn thinning_stability_test<S>(sample: S, alpha: Exponent, t: f64, h: &Harness) -> Result<TestReport>
where
    S: Fn(&mut RandomSource) -> Result<Vec<u64>> + Sync,
{
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Parameter(format!("stability weight must lie in (0, 1), got {t}")));
    }
    let (t1, t2) = (alpha.thinning_factor(t), alpha.thinning_factor(1.0 - t));
    let mut report = compare_count_laws(
        &sample,
        |rng: &mut RandomSource| {
            let mut first = sample(rng)?;
            let mut second = sample(rng)?;
            thin_counts(&mut first, t1, rng)?;
            thin_counts(&mut second, t2, rng)?;
            add_counts(&mut first, &second)?;
            Ok(first)
        },
        h,
    )?;
    report.method = format!("thinning stability t={t}, {}", report.method);
    Ok(report)
}

/// Tests `Φ =_D n^{-1/α}∘(Φ_1 + … + Φ_n)` on binned counts.
pub fn superposition_stability_test<S>(sample: S, alpha: Exponent, n: u32, h: &Harness) -> Result<TestReport>
where
    S: Fn(&mut RandomSource) -> Result<Vec<u64>> + Sync,
{
    if n < 2 {
        return Err(Error::Parameter("superposition needs at least two copies".into()));
    }
    let t = alpha.thinning_factor(1.0 / n as f64);
    let mut report = compare_count_laws(
        &sample,
        |rng: &mut RandomSource| {
            let mut total = sample(rng)?;
            thin_counts(&mut total, t, rng)?;
            for _ in 1..n {
                let mut next = sample(rng)?;
                thin_counts(&mut next, t, rng)?;
                add_counts(&mut total, &next)?;
            }
            Ok(total)
        },
        h,
    )?;
    report.method = format!("superposition fixed point n={n}, {}", report.method);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{sample_discrete_stable, sample_sibuya, DiscreteStableParams, DiscreteStableRoute};
    use approx::assert_relative_eq;

    #[test]
    fn pgf_degenerate_cases() {
        let e = empirical_pgf(&[0, 0, 0], 0.5).unwrap();
        assert_eq!((e.value, e.std_error), (1.0, 0.0));
        let e = empirical_pgf(&[3, 1, 9], 1.0).unwrap();
        assert_eq!(e.value, 1.0);
        assert!(empirical_pgf(&[], 0.5).is_err());
        assert!(empirical_pgf(&[1], 1.5).is_err());
    }

    #[test]
    fn laplace_degenerate_cases() {
        let e = empirical_laplace(&[1.0; 10], 1.0).unwrap();
        assert_relative_eq!(e.value, (-1.0f64).exp());
        assert_eq!(e.std_error, 0.0);
        assert!(empirical_laplace(&[], 1.0).is_err());
        assert!(empirical_laplace(&[1.0], 0.0).is_err());
    }

    #[test]
    fn pgf_of_discrete_stable_sample() {
        let params = DiscreteStableParams::new(1.0, Exponent::new(0.5).unwrap()).unwrap();
        let mut rng = RandomSource::new(10);
        let xs: Vec<u64> = (0..200_000)
            .map(|_| sample_discrete_stable(params, DiscreteStableRoute::PoissonMixture, &mut rng))
            .collect();
        let e = empirical_pgf(&xs, 0.5).unwrap();
        assert!(e.within((-(0.5f64).sqrt()).exp(), 3.0, 0.0), "{e:?}");
    }

    #[test]
    fn welford_merge_is_exact() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let whole: MeanAccumulator = xs.iter().copied().collect();
        let mut left: MeanAccumulator = xs[..313].iter().copied().collect();
        let right: MeanAccumulator = xs[313..].iter().copied().collect();
        left.merge(&right);
        let (a, b) = (whole.estimate().unwrap(), left.estimate().unwrap());
        assert_relative_eq!(a.value, b.value, epsilon = 1e-14);
        assert_relative_eq!(a.std_error, b.std_error, epsilon = 1e-14);
    }

    #[test]
    fn standard_error_scales_as_inverse_sqrt() {
        let mut rng = RandomSource::new(4);
        let sizes = [1_000u64, 10_000, 100_000, 1_000_000];
        let logs: Vec<(f64, f64)> = sizes
            .iter()
            .map(|&n| {
                let acc: MeanAccumulator = (0..n).map(|_| (-rng.exponential()).exp()).collect();
                ((n as f64).ln(), acc.estimate().unwrap().std_error.ln())
            })
            .collect();
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / 4.0;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / 4.0;
        let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn identical_histograms() {
        let h: Histogram<u64> = [0, 1, 1, 2, 2, 2, 3].iter().cycle().take(7000).copied().collect();
        let r = chi_square_two_sample(&h, &h).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn chi_square_two_sample_power() {
        let params = DiscreteStableParams::new(1.0, Exponent::new(0.5).unwrap()).unwrap();
        let mut rng = RandomSource::new(77);
        let n = 200_000;
        let a: Histogram<u64> = (0..n)
            .map(|_| sample_discrete_stable(params, DiscreteStableRoute::CompoundSibuya, &mut rng).min(40))
            .collect();
        let b: Histogram<u64> = (0..n).map(|_| rng.poisson(1.0).min(40)).collect();
        let r = chi_square_two_sample(&a, &b).unwrap();
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn chi_square_errors() {
        let empty = Histogram::<u64>::new();
        let h: Histogram<u64> = [1u64, 2, 3].into_iter().collect();
        assert!(chi_square_two_sample(&empty, &h).is_err());
        assert!(chi_square_gof(&[1, 2], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn single_cell_is_perfect_agreement() {
        let a: Histogram<u64> = std::iter::repeat_n(1u64, 100).collect();
        let r = chi_square_two_sample(&a, &a).unwrap();
        assert_eq!((r.dof, r.p_value), (0, 1.0));
    }

    #[test]
    fn sibuya_gof_alpha_one_is_perfect() {
        let r = gof_sibuya(&vec![1; 1000], Exponent::ONE).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(gof_sibuya(&[0, 1], Exponent::ONE).is_err());
    }

    #[test]
    fn sibuya_gof_detects_geometric() {
        let mut rng = RandomSource::new(8);
        // Geometric(1/2) on {1, 2, ...}
        let xs: Vec<u64> = (0..200_000)
            .map(|_| 1 + (rng.uniform().ln() / 0.5f64.ln()).floor() as u64)
            .collect();
        let r = gof_sibuya(&xs, Exponent::new(0.5).unwrap()).unwrap();
        assert!(r.p_value < 1e-6);
        let alpha = Exponent::new(0.5).unwrap();
        let ys: Vec<u64> = (0..200_000).map(|_| sample_sibuya(alpha, &mut rng)).collect();
        assert!(gof_sibuya(&ys, alpha).unwrap().p_value > 1e-4);
    }

    #[test]
    fn ks_detects_shift_and_accepts_same() {
        let mut rng = RandomSource::new(12);
        let a: Vec<f64> = (0..5000).map(|_| rng.normal()).collect();
        let b: Vec<f64> = (0..5000).map(|_| rng.normal()).collect();
        let c: Vec<f64> = (0..5000).map(|_| rng.normal() + 0.2).collect();
        assert!(ks_two_sample(&a, &b).unwrap().p_value > 1e-3);
        assert!(ks_two_sample(&a, &c).unwrap().p_value < 1e-6);
        assert_eq!(ks_two_sample(&a, &a).unwrap().statistic, 0.0);
    }

    #[test]
    fn void_trace_of_constant_stream() {
        let t = running_void_frequency(std::iter::repeat_n(true, 25), 10);
        assert_eq!(t.len(), 3);
        assert!(t.iter().all(|p| p.frequency == 1.0 && p.std_error == 0.0));
        assert_eq!(t[2].draws, 25);
    }

    #[test]
    fn void_trace_converges_for_poisson() {
        let mut rng = RandomSource::new(21);
        let t = running_void_frequency((0..200_000).map(|_| rng.poisson(1.0) == 0), 50_000);
        let last = t.last().unwrap();
        assert!((last.frequency - (-1.0f64).exp()).abs() < 3.0 * last.std_error);
    }

    #[test]
    fn chunked_runs_ignore_worker_count() {
        let f = |n: u64, rng: &mut RandomSource| (0..n).map(|_| rng.poisson(2.0)).sum::<u64>();
        let draws = 3 * CHUNK + 17;
        let one = run_chunked(draws, 99, 1, f);
        let three = run_chunked(draws, 99, 3, f);
        assert_eq!(one, three);
        assert_eq!(one.len(), 4);
    }

    #[test]
    fn seed_protocol_counts() {
        let p = seed_protocol(1, 10, 9, |s| s % 2 == 0 || s % 2 == 1);
        assert!(p.passed());
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
    }

    #[test]
    fn poisson_is_one_stable_and_not_half_stable() {
        let poisson = |rng: &mut RandomSource| Ok(vec![rng.poisson(3.0), rng.poisson(1.0)]);
        let h = Harness::new(100_000, 5);
        let r = thinning_stability_test(poisson, Exponent::ONE, 0.3, &h).unwrap();
        assert!(r.passes(LEVEL), "{r:?}");
        let r = superposition_stability_test(poisson, Exponent::ONE, 3, &h).unwrap();
        assert!(r.passes(LEVEL), "{r:?}");
        let r = thinning_stability_test(poisson, Exponent::new(0.5).unwrap(), 0.5, &h).unwrap();
        assert!(r.p_value < 1e-6, "{r:?}");
    }

    #[test]
    fn discrete_stable_scalar_is_stable() {
        let alpha = Exponent::new(0.5).unwrap();
        let params = DiscreteStableParams::new(1.5, alpha).unwrap();
        let sample = |rng: &mut RandomSource| {
            Ok(vec![sample_discrete_stable(params, DiscreteStableRoute::CompoundSibuya, rng)])
        };
        let h = Harness::new(100_000, 6);
        assert!(thinning_stability_test(sample, alpha, 0.25, &h).unwrap().passes(LEVEL));
        let wrong = Exponent::new(0.8).unwrap();
        assert!(thinning_stability_test(sample, wrong, 0.5, &h).unwrap().p_value < 1e-6);
    }

    #[test]
    fn mc_mean_matches_chunk_merge() {
        let h = Harness { draws: 2 * CHUNK + 5, seed: 3, workers: 2 };
        let e = mc_mean(&h, |rng| Ok(rng.uniform())).unwrap();
        assert_eq!(e.draws, h.draws);
        assert!(e.within(0.5, 4.0, 0.0));
        assert_eq!(e, mc_mean(&Harness { workers: 1, ..h }, |rng| Ok(rng.uniform())).unwrap());
    }
}
