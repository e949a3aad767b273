//! Multiplicative stability on the positive integers.
//!
//! A natural number is a counting measure on its prime divisors
//! (`12 = 2·2·3 ↦ 2δ_2 + δ_3`). Thinning removes prime divisors
//! independently, and a multiplicatively α-stable integer has independent
//! discrete stable exponents `ν_p ~ Poisson(σ_p^{1/α} ζ_{α,p})`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng::RandomSource;
use crate::scalar::{
    discrete_stable_pmf_oracle, sample_discrete_stable, thin_integer, DiscreteStableParams,
    DiscreteStableRoute, Exponent,
};

/// Largest exponent `mult_stable_prob` evaluates.
pub const MAX_EXPONENT: u64 = 20;

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Finite prime basis with spectral weights `σ_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimeBasis {
    pub primes: Vec<u64>,
    pub weights: Vec<f64>,
}

impl PrimeBasis {
    pub fn new(primes: Vec<u64>, weights: Vec<f64>) -> Result<Self> {
        let basis = Self { primes, weights };
        basis.validate()?;
        Ok(basis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.primes.len() != self.weights.len() {
            return param("primes and weights differ in length");
        }
        if let Some(p) = self.primes.iter().find(|&&p| !is_prime(p)) {
            return param(format!("{p} is not prime"));
        }
        let mut seen = self.primes.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.primes.len() {
            return param("primes must be distinct");
        }
        if self.weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return param("prime weights must be positive and finite");
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.primes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Finitely supported prime-exponent map.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FactorizationMeasure {
    exponents: BTreeMap<u64, u64>,
}

impl FactorizationMeasure {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `k` to the exponent of `p`.
    pub fn add(&mut self, p: u64, k: u64) {
        if k > 0 {
            let e = self.exponents.entry(p).or_insert(0);
            *e = e.saturating_add(k);
        }
    }

    pub fn exponent(&self, p: u64) -> u64 {
        self.exponents.get(&p).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &BTreeMap<u64, u64> {
        &self.exponents
    }

    pub fn is_one(&self) -> bool {
        self.exponents.is_empty()
    }

    /// `Π p^{k_p}`, or `None` on overflow.
    pub fn to_u64(&self) -> Option<u64> {
        self.exponents.iter().try_fold(1u64, |acc, (&p, &k)| {
            let k = u32::try_from(k).ok()?;
            acc.checked_mul(p.checked_pow(k)?)
        })
    }

    /// The integer this measure encodes; overflow is a domain error.
    pub fn compose(&self) -> Result<u64> {
        self.to_u64()
            .ok_or_else(|| Error::Domain("product exceeds the 64-bit range".into()))
    }

    /// Product of two integers (sum of measures).
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&p, &k) in &other.exponents {
            out.add(p, k);
        }
        out
    }

    pub fn divides(&self, other: &Self) -> bool {
        self.exponents.iter().all(|(&p, &k)| other.exponent(p) >= k)
    }

    /// Keep every unit prime factor independently with probability `t`.
    pub fn thin(&self, t: f64, rng: &mut RandomSource) -> Result<Self> {
        let mut out = Self::new();
        for (&p, &k) in &self.exponents {
            out.add(p, thin_integer(k, t, rng)?);
        }
        Ok(out)
    }
}

pub fn factorize(n: u64, basis: &PrimeBasis) -> Result<FactorizationMeasure> {
    if n == 0 {
        return Err(Error::Domain("0 has no factorization".into()));
    }
    let mut rest = n;
    let mut out = FactorizationMeasure::new();
    for &p in &basis.primes {
        let mut k = 0;
        while rest % p == 0 {
            rest /= p;
            k += 1;
        }
        out.add(p, k);
    }
    if rest != 1 {
        return Err(Error::Domain(format!("{n} has the factor {rest} outside the basis")));
    }
    Ok(out)
}

pub fn compose(m: &FactorizationMeasure) -> Result<u64> {
    m.compose()
}

pub fn thin_natural(n: u64, t: f64, basis: &PrimeBasis, rng: &mut RandomSource) -> Result<u64> {
    factorize(n, basis)?.thin(t, rng)?.compose()
}

/// Multiplicatively α-stable integer over the basis. Returned as a
/// factorization since the product routinely exceeds 64 bits.
pub fn sample_mult_stable(basis: &PrimeBasis, alpha: Exponent, rng: &mut RandomSource) -> Result<FactorizationMeasure> {
    let mut out = FactorizationMeasure::new();
    for (p, sigma) in basis.iter() {
        let params = DiscreteStableParams::new(sigma, alpha)?;
        out.add(p, sample_discrete_stable(params, DiscreteStableRoute::PoissonMixture, rng));
    }
    Ok(out)
}

fn exponent_pmfs(basis: &PrimeBasis, alpha: Exponent) -> Result<Vec<Vec<f64>>> {
    basis
        .weights
        .iter()
        .map(|&s| {
            let params = DiscreteStableParams::new(s, alpha)?;
            Ok(discrete_stable_pmf_oracle(params, MAX_EXPONENT as usize).probabilities)
        })
        .collect()
}

/// `P{ξ = n} = Π_p P{ν_p = k_p}`, each factor being the discrete stable
/// probability `E[ζ_p^k e^{-ζ_p}]/k!` with `c = σ_p`.
pub fn mult_stable_prob(n: u64, basis: &PrimeBasis, alpha: Exponent) -> Result<f64> {
    basis.validate()?;
    let m = factorize(n, basis)?;
    let pmfs = exponent_pmfs(basis, alpha)?;
    let mut prob = 1.0;
    for (pmf, &p) in pmfs.iter().zip(&basis.primes) {
        let k = m.exponent(p);
        if k > MAX_EXPONENT {
            return Err(Error::Resource(format!("exponent {k} of {p} exceeds the cap {MAX_EXPONENT}")));
        }
        prob *= pmf[k as usize];
    }
    Ok(prob)
}

/// Every basis-smooth outcome with `P{ξ = n} >= min_prob` (exponents up to
/// [`MAX_EXPONENT`]), sorted by `n`.
pub fn mult_stable_outcomes(basis: &PrimeBasis, alpha: Exponent, min_prob: f64) -> Result<Vec<(u64, f64)>> {
    basis.validate()?;
    if min_prob.is_nan() || min_prob <= 0.0 {
        return param("probability threshold must be positive");
    }
    let pmfs = exponent_pmfs(basis, alpha)?;
    // The largest attainable product of the remaining factors bounds the search.
    let mut best_rest = vec![1.0; pmfs.len() + 1];
    for i in (0..pmfs.len()).rev() {
        let best = pmfs[i].iter().copied().fold(0.0, f64::max);
        best_rest[i] = best * best_rest[i + 1];
    }
    let mut out = Vec::new();
    let mut stack = vec![(0usize, 1u64, 1.0f64)];
    while let Some((i, n, prob)) = stack.pop() {
        if i == pmfs.len() {
            out.push((n, prob));
            continue;
        }
        let p = basis.primes[i];
        let mut power = Some(1u64);
        for &q in &pmfs[i] {
            let Some(pw) = power else { break };
            let Some(next) = n.checked_mul(pw) else { break };
            if prob * q * best_rest[i + 1] >= min_prob {
                stack.push((i + 1, next, prob * q));
            }
            power = pw.checked_mul(p);
        }
    }
    out.sort_by_key(|&(n, _)| n);
    Ok(out)
}
