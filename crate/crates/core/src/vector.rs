//! DαS random vectors on a finite phase space `{1, …, d}`.
//!
//! The spectral measure lives on the unit simplex: `σ = Σ c_i δ_{p_i}`,
//! giving the p.g.f. `E Π z_n^{ξ_n} = exp{-Σ c_i ⟨1-z, p_i⟩^α}`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng::RandomSource;
use crate::scalar::{sample_positive_stable, sample_sibuya, sibuya_pmf, Exponent};
use crate::special::{ln_gamma, CompensatedSum};

pub type CountVector = Vec<u64>;

/// Largest pmf table the oracle will build.
pub const MAX_ORACLE_CELLS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexComponent {
    pub weight: f64,
    pub p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexMeasure {
    pub components: Vec<SimplexComponent>,
}

fn check_simplex(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return param("probability vector is empty");
    }
    if p.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return param("probability vector entries must be finite and non-negative");
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return param(format!("probability vector sums to {total}, not 1"));
    }
    Ok(())
}

impl SimplexMeasure {
    pub fn new(components: impl IntoIterator<Item = (f64, Vec<f64>)>) -> Result<Self> {
        let sigma = Self {
            components: components
                .into_iter()
                .map(|(weight, p)| SimplexComponent { weight, p })
                .collect(),
        };
        sigma.validate()?;
        Ok(sigma)
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.components.first() else {
            return param("simplex measure needs at least one component");
        };
        for c in &self.components {
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return param(format!("spectral weight must be positive, got {}", c.weight));
            }
            check_simplex(&c.p)?;
            if c.p.len() != first.p.len() {
                return param("simplex components differ in dimension");
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, |c| c.p.len())
    }

    pub fn total(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// True iff every `p_i` is a vertex of the simplex.
    pub fn is_vertex_supported(&self) -> bool {
        self.components.iter().all(|c| c.p.iter().filter(|&&x| x > 0.0).count() == 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorRoute {
    Cluster,
    Cox,
}

impl fmt::Display for VectorRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cluster => "cluster",
            Self::Cox => "cox",
        })
    }
}

impl FromStr for VectorRoute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cluster" => Ok(Self::Cluster),
            "cox" => Ok(Self::Cox),
            other => param(format!("unknown vector route {other:?}; expected cluster or cox")),
        }
    }
}

fn add_sibuya_split(alpha: Exponent, p: &[f64], out: &mut [u64], scratch: &mut [u64], rng: &mut RandomSource) {
    let n = sample_sibuya(alpha, rng);
    rng.multinomial_into(n, p, scratch);
    for (o, k) in out.iter_mut().zip(scratch.iter()) {
        *o = o.saturating_add(*k);
    }
}

/// Multivariate Sibuya vector: a `Sib(α)` total split multinomially over
/// `p`.
pub fn sample_multivariate_sibuya(alpha: Exponent, p: &[f64], rng: &mut RandomSource) -> Result<CountVector> {
    check_simplex(p)?;
    let mut out = vec![0; p.len()];
    let mut scratch = vec![0; p.len()];
    add_sibuya_split(alpha, p, &mut out, &mut scratch, rng);
    Ok(out)
}

/// DαS vector by the cluster route (`Poisson(Σ c_i)` multivariate Sibuya
/// summands) or the Cox route (independent Poisson coordinates with means
/// `Σ_i c_i^{1/α} ζ_{α,i} p_{i,n}`).
pub fn sample_das_vector(
    sigma: &SimplexMeasure,
    alpha: Exponent,
    route: VectorRoute,
    rng: &mut RandomSource,
) -> CountVector {
    let d = sigma.dim();
    let mut out = vec![0; d];
    match route {
        VectorRoute::Cluster => {
            let total = sigma.total();
            let mut scratch = vec![0; d];
            for _ in 0..rng.poisson(total) {
                let mut u = rng.uniform() * total;
                let comp = sigma
                    .components
                    .iter()
                    .find(|c| {
                        u -= c.weight;
                        u < 0.0
                    })
                    .unwrap_or_else(|| sigma.components.last().expect("validated"));
                add_sibuya_split(alpha, &comp.p, &mut out, &mut scratch, rng);
            }
        }
        VectorRoute::Cox => {
            let mut means = vec![0.0; d];
            for c in &sigma.components {
                let w = if alpha.is_one() {
                    c.weight
                } else {
                    c.weight.powf(1.0 / alpha.get()) * sample_positive_stable(alpha, rng)
                };
                for (m, p) in means.iter_mut().zip(&c.p) {
                    *m += w * p;
                }
            }
            for (o, m) in out.iter_mut().zip(means) {
                *o = rng.poisson(m);
            }
        }
    }
    out
}

/// `exp{-Σ c_i ⟨1-z, p_i⟩^α}`.
pub fn vector_pgf(sigma: &SimplexMeasure, alpha: Exponent, z: &[f64]) -> Result<f64> {
    if z.len() != sigma.dim() {
        return param(format!("p.g.f. argument has {} coordinates, expected {}", z.len(), sigma.dim()));
    }
    if z.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return param("p.g.f. argument must lie in [0, 1]^d");
    }
    let exponent: f64 = sigma
        .components
        .iter()
        .map(|c| {
            let inner: f64 = c.p.iter().zip(z).map(|(p, z)| p * (1.0 - z)).sum();
            c.weight * inner.powf(alpha.get())
        })
        .sum();
    Ok((-exponent).exp())
}

/// Probabilities on the box `{0..=box_0} × … × {0..=box_{d-1}}`, row-major
/// with the last coordinate fastest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PmfTable {
    pub sizes: Vec<usize>,
    pub probabilities: Vec<f64>,
    /// Probability outside the box.
    pub truncated_mass: f64,
}

impl PmfTable {
    /// Row-major position of `x`, or `None` outside the box.
    pub fn index_of(&self, x: &[u64]) -> Option<usize> {
        if x.len() != self.sizes.len() {
            return None;
        }
        let mut idx = 0usize;
        for (&xi, &s) in x.iter().zip(&self.sizes) {
            if xi as usize >= s {
                return None;
            }
            idx = idx * s + xi as usize;
        }
        Some(idx)
    }

    /// `P{ξ = x}`, or `None` outside the box.
    pub fn get(&self, x: &[u64]) -> Option<f64> {
        self.index_of(x).map(|i| self.probabilities[i])
    }

    pub fn cells(&self) -> impl Iterator<Item = (Vec<u64>, f64)> + '_ {
        let sizes = self.sizes.clone();
        self.probabilities.iter().enumerate().map(move |(mut i, &p)| {
            let mut x = vec![0u64; sizes.len()];
            for (slot, &s) in x.iter_mut().zip(&sizes).rev() {
                *slot = (i % s) as u64;
                i /= s;
            }
            (x, p)
        })
    }

    /// CSV with header `x1,…,xd,probability`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.sizes.len()).map(|n| format!("x{n}")).collect();
        header.push("probability".into());
        w.write_record(&header)?;
        for (x, p) in self.cells() {
            let mut rec: Vec<String> = x.iter().map(u64::to_string).collect();
            rec.push(format!("{p:e}"));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Advance `y` to the next point of `{0 ≤ y ≤ upper}` in row-major order;
/// false once the box is exhausted.
fn next_in_box(y: &mut [usize], upper: &[usize]) -> bool {
    for k in (0..y.len()).rev() {
        if y[k] < upper[k] {
            y[k] += 1;
            return true;
        }
        y[k] = 0;
    }
    false
}

/// Exact pmf of the DαS vector on a box, by the compound-Poisson recursion
/// `|x| P(x) = C Σ_{0 ≠ y ≤ x} |y| q(y) P(x - y)`, `P(0) = e^{-C}`, where
/// `C = Σ c_i` and `q` is the cluster (mixed multivariate Sibuya) pmf.
pub fn vector_pmf_oracle(sigma: &SimplexMeasure, alpha: Exponent, max_counts: &[usize]) -> Result<PmfTable> {
    sigma.validate()?;
    let d = sigma.dim();
    if max_counts.len() != d {
        return param(format!("box has {} coordinates, expected {d}", max_counts.len()));
    }
    let sizes: Vec<usize> = max_counts.iter().map(|m| m + 1).collect();
    let cells = sizes
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .filter(|&n| n <= MAX_ORACLE_CELLS)
        .ok_or_else(|| Error::Resource(format!("pmf box exceeds {MAX_ORACLE_CELLS} cells")))?;

    let total = sigma.total();
    let mut table = PmfTable { sizes: sizes.clone(), probabilities: vec![0.0; cells], truncated_mass: 0.0 };
    let index = |x: &[usize]| x.iter().zip(&sizes).fold(0usize, |acc, (&xi, &s)| acc * s + xi);
    let unflatten = |mut i: usize| {
        let mut x = vec![0usize; d];
        for (slot, &s) in x.iter_mut().zip(&sizes).rev() {
            *slot = i % s;
            i /= s;
        }
        x
    };

    // |y| · C · q(y) for every cell.
    let max_total: usize = max_counts.iter().sum();
    let sib: Vec<f64> = (0..=max_total as u64)
        .map(|n| if n == 0 { Ok(0.0) } else { sibuya_pmf(alpha, n) })
        .collect::<Result<_>>()?;
    let ln_fact: Vec<f64> = (0..=max_total).map(|n| ln_gamma(n as f64 + 1.0)).collect();
    let mut weighted_q = vec![0.0; cells];
    for (i, slot) in weighted_q.iter_mut().enumerate().skip(1) {
        let y = unflatten(i);
        let n: usize = y.iter().sum();
        let mut q = 0.0;
        for c in &sigma.components {
            let mut ln = ln_fact[n];
            let mut possible = true;
            for (&yn, &pn) in y.iter().zip(&c.p) {
                if yn > 0 {
                    if pn == 0.0 {
                        possible = false;
                        break;
                    }
                    ln += yn as f64 * pn.ln() - ln_fact[yn];
                }
            }
            if possible {
                q += c.weight * ln.exp();
            }
        }
        *slot = n as f64 * sib[n] * q;
    }

    table.probabilities[0] = (-total).exp();
    for i in 1..cells {
        let x = unflatten(i);
        let norm: usize = x.iter().sum();
        let mut acc = CompensatedSum::default();
        let mut y = vec![0usize; d];
        while next_in_box(&mut y, &x) {
            let rest: Vec<usize> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            acc.add(weighted_q[index(&y)] * table.probabilities[index(&rest)]);
        }
        table.probabilities[i] = (acc.value() / norm as f64).max(0.0);
    }
    let inside: CompensatedSum = table.probabilities.iter().copied().collect();
    table.truncated_mass = (1.0 - inside.value()).max(0.0);
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{discrete_stable_pmf_oracle, DiscreteStableParams};
    use crate::stats::{empirical_pgf, gof_sibuya, thinning_stability_test, Harness, MeanAccumulator, LEVEL};
    use approx::assert_relative_eq;

    fn half() -> Exponent {
        Exponent::new(0.5).unwrap()
    }

    #[test]
    fn rejects_bad_simplex() {
        assert!(SimplexMeasure::new([(1.0, vec![0.5, 0.6])]).is_err());
        assert!(SimplexMeasure::new([(0.0, vec![1.0])]).is_err());
        assert!(SimplexMeasure::new([(1.0, vec![1.0]), (1.0, vec![0.5, 0.5])]).is_err());
        assert!(SimplexMeasure::new(Vec::<(f64, Vec<f64>)>::new()).is_err());
        assert!("poisson".parse::<VectorRoute>().is_err());
        assert_eq!("cox".parse::<VectorRoute>().unwrap(), VectorRoute::Cox);
    }

    #[test]
    fn pgf_special_values() {
        let sigma = SimplexMeasure::new([(2.0, vec![0.3, 0.7])]).unwrap();
        assert_eq!(vector_pgf(&sigma, half(), &[1.0, 1.0]).unwrap(), 1.0);
        assert_relative_eq!(vector_pgf(&sigma, half(), &[0.0, 0.0]).unwrap(), (-2.0f64).exp());
        let scalar = SimplexMeasure::new([(1.5, vec![1.0])]).unwrap();
        assert_relative_eq!(
            vector_pgf(&scalar, half(), &[0.36]).unwrap(),
            (-1.5 * 0.64f64.sqrt()).exp(),
            epsilon = 1e-15
        );
        assert!(vector_pgf(&sigma, half(), &[0.5]).is_err());
        assert!(vector_pgf(&sigma, half(), &[0.5, 1.5]).is_err());
    }

    #[test]
    fn multivariate_sibuya_alpha_one() {
        let mut rng = RandomSource::new(1);
        let n = 100_000;
        let mut first = 0;
        for _ in 0..n {
            let v = sample_multivariate_sibuya(Exponent::ONE, &[0.5, 0.5], &mut rng).unwrap();
            assert_eq!(v.iter().sum::<u64>(), 1);
            first += v[0];
        }
        let se = (0.25 / n as f64).sqrt();
        assert!((first as f64 / n as f64 - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn multivariate_sibuya_point_probability_and_marginal() {
        let mut rng = RandomSource::new(2);
        let n = 400_000;
        let draws: Vec<CountVector> =
            (0..n).map(|_| sample_multivariate_sibuya(half(), &[0.3, 0.7], &mut rng).unwrap()).collect();
        let hit: MeanAccumulator = draws.iter().map(|v| (v[..] == [1, 0]) as u8 as f64).collect();
        assert!(hit.estimate().unwrap().within(0.15, 3.0, 0.0));
        let first: Vec<u64> = draws.iter().map(|v| v[0]).collect();
        for z in [0.0, 0.5] {
            let e = empirical_pgf(&first, z).unwrap();
            assert!(e.within(1.0 - 0.3f64.sqrt() * (1.0 - z).sqrt(), 3.0, 0.0), "{z}: {e:?}");
        }
        let totals: Vec<u64> = draws.iter().map(|v| v.iter().sum()).collect();
        assert!(gof_sibuya(&totals, half()).unwrap().passes(LEVEL));
        let positive: Vec<u64> = first.iter().copied().filter(|&x| x > 0).collect();
        assert!(gof_sibuya(&positive, half()).unwrap().passes(LEVEL));
    }

    #[test]
    fn vertex_supported_decouples() {
        let sigma = SimplexMeasure::new([(1.0, vec![1.0, 0.0])]).unwrap();
        assert!(sigma.is_vertex_supported());
        let mut rng = RandomSource::new(3);
        for route in [VectorRoute::Cluster, VectorRoute::Cox] {
            let xs: Vec<u64> = (0..100_000)
                .map(|_| {
                    let v = sample_das_vector(&sigma, half(), route, &mut rng);
                    assert_eq!(v[1], 0);
                    v[0]
                })
                .collect();
            let e = empirical_pgf(&xs, 0.5).unwrap();
            assert!(e.within((-(0.5f64).sqrt()).exp(), 3.0, 0.0), "{route}: {e:?}");
        }
    }

    #[test]
    fn oracle_alpha_one_is_product_poisson() {
        let sigma = SimplexMeasure::new([(2.0, vec![0.25, 0.75])]).unwrap();
        let t = vector_pmf_oracle(&sigma, Exponent::ONE, &[10, 10]).unwrap();
        let pois = |m: f64, k: u64| (-m + k as f64 * m.ln() - ln_gamma(k as f64 + 1.0)).exp();
        for (x, p) in t.cells() {
            assert_relative_eq!(p, pois(0.5, x[0]) * pois(1.5, x[1]), epsilon = 1e-14);
        }
        assert_relative_eq!(t.get(&[0, 0]).unwrap(), (-2.0f64).exp());
    }

    #[test]
    fn oracle_marginals_match_scalar_series() {
        let sigma = SimplexMeasure::new([(1.0, vec![1.0, 0.0]), (2.0, vec![0.0, 1.0])]).unwrap();
        let t = vector_pmf_oracle(&sigma, half(), &[12, 12]).unwrap();
        let one = discrete_stable_pmf_oracle(DiscreteStableParams::new(1.0, half()).unwrap(), 12);
        let two = discrete_stable_pmf_oracle(DiscreteStableParams::new(2.0, half()).unwrap(), 12);
        for (x, p) in t.cells() {
            let expected = one.probabilities[x[0] as usize] * two.probabilities[x[1] as usize];
            assert_relative_eq!(p, expected, epsilon = 1e-13);
        }
        assert!(t.truncated_mass > 0.0);
    }

    #[test]
    fn oracle_matches_samples() {
        let sigma = SimplexMeasure::new([(1.0, vec![0.5, 0.5])]).unwrap();
        let t = vector_pmf_oracle(&sigma, half(), &[15, 15]).unwrap();
        let mut rng = RandomSource::new(4);
        let n = 200_000;
        let mut counts = vec![0u64; t.probabilities.len()];
        for _ in 0..n {
            let v = sample_das_vector(&sigma, half(), VectorRoute::Cluster, &mut rng);
            if let Some(i) = t.index_of(&v) {
                counts[i] += 1;
            }
        }
        let tv: f64 = 0.5
            * counts
                .iter()
                .zip(&t.probabilities)
                .map(|(&c, &p)| (c as f64 / n as f64 - p).abs())
                .sum::<f64>();
        assert!(tv < 0.02, "{tv}");
    }

    #[test]
    fn oracle_box_limits() {
        let sigma = SimplexMeasure::new([(1.0, vec![0.25; 4])]).unwrap();
        assert!(matches!(vector_pmf_oracle(&sigma, half(), &[40; 4]), Err(Error::Resource(_))));
        assert!(vector_pmf_oracle(&sigma, half(), &[3; 3]).is_err());
    }

    #[test]
    fn csv_layout() {
        let sigma = SimplexMeasure::new([(1.0, vec![0.5, 0.5])]).unwrap();
        let t = vector_pmf_oracle(&sigma, half(), &[1, 1]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,x2,probability");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("0,1,"));
    }

    #[test]
    fn vector_is_stable_and_dependent() {
        let sigma = SimplexMeasure::new([(1.0, vec![0.4, 0.6])]).unwrap();
        let h = Harness::new(100_000, 5);
        let sample = |rng: &mut RandomSource| Ok(sample_das_vector(&sigma, half(), VectorRoute::Cluster, rng));
        assert!(thinning_stability_test(sample, half(), 0.5, &h).unwrap().passes(LEVEL));

        let mut rng = RandomSource::new(6);
        let n = 200_000;
        let (mut a, mut b, mut ab) = (MeanAccumulator::default(), MeanAccumulator::default(), MeanAccumulator::default());
        for _ in 0..n {
            let v = sample_das_vector(&sigma, half(), VectorRoute::Cox, &mut rng);
            let (x, y) = ((v[0] > 0) as u8 as f64, (v[1] > 0) as u8 as f64);
            a.push(x);
            b.push(y);
            ab.push(x * y);
        }
        let (a, b, ab) = (a.estimate().unwrap(), b.estimate().unwrap(), ab.estimate().unwrap());
        let cov = ab.value - a.value * b.value;
        assert!(cov > 5.0 * ab.std_error, "{cov} vs {}", ab.std_error);
    }
}
