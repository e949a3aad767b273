//! Univariate laws: Sibuya, one-sided strictly stable, and discrete stable
//! integers, together with integer thinning.
//!
//! The discrete stable law with scale `c` and exponent `α` has p.g.f.
//! `E s^ξ = exp{-c (1 - s)^α}`. It is sampled either as a Poisson variable
//! with random mean `c^{1/α} ζ_α` or as a Poisson(c) sum of Sibuya(α)
//! variables; the two routes are checked against each other and against
//! the power-series expansion of the p.g.f.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng::RandomSource;
use crate::special::{ln_gamma, ln_gamma_ratio, CompensatedSum};

/// Stability index `α ∈ (0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            param(format!("exponent must lie in (0, 1], got {alpha}"))
        }
    }

    pub const ONE: Exponent = Exponent(1.0);

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }

    /// `t^{1/α}`, the thinning factor that scales a stable law by `t`.
    pub fn thinning_factor(self, t: f64) -> f64 {
        t.powf(1.0 / self.0)
    }
}

impl TryFrom<f64> for Exponent {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Exponent> for f64 {
    fn from(value: Exponent) -> Self {
        value.0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Scale and exponent of a discrete stable law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteStableParams {
    pub c: f64,
    pub alpha: Exponent,
}

impl DiscreteStableParams {
    /// `c = 0` is accepted and denotes the point mass at zero.
    pub fn new(c: f64, alpha: Exponent) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return param(format!("discrete stable scale must be finite and non-negative, got {c}"));
        }
        Ok(Self { c, alpha })
    }
}

/// Sampling route for [`sample_discrete_stable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscreteStableRoute {
    PoissonMixture,
    CompoundSibuya,
}

impl FromStr for DiscreteStableRoute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poisson-mixture" => Ok(Self::PoissonMixture),
            "compound-sibuya" => Ok(Self::CompoundSibuya),
            other => param(format!("unknown discrete stable route `{other}`")),
        }
    }
}

/// Binomial thinning `t ∘ n`.
pub fn thin_integer(n: u64, t: f64, rng: &mut RandomSource) -> Result<u64> {
    if !(0.0..=1.0).contains(&t) {
        return param(format!("thinning probability must lie in [0, 1], got {t}"));
    }
    Ok(rng.binomial(n, t))
}

/// Number of terms of the survival product evaluated directly before
/// switching to the log-gamma form.
const DIRECT_PRODUCT_TERMS: u64 = 32;

/// `ln P{N > n}` for `N ~ Sib(α)`, i.e. `ln Π_{k=1}^n (1 - α/k)`.
pub fn sibuya_ln_survival(alpha: Exponent, n: u64) -> f64 {
    let a = alpha.get();
    if n == 0 {
        return 0.0;
    }
    if alpha.is_one() {
        return f64::NEG_INFINITY;
    }
    if n <= DIRECT_PRODUCT_TERMS {
        return (1..=n).map(|k| (-a / k as f64).ln_1p()).sum();
    }
    ln_gamma_ratio(n as f64 + 1.0, -a) - ln_gamma(1.0 - a)
}

/// `P{N > n} = Γ(n + 1 - α) / (Γ(1 - α) n!)`.
pub fn sibuya_survival(alpha: Exponent, n: u64) -> f64 {
    sibuya_ln_survival(alpha, n).exp()
}

/// `q_n(α) = (1 - α)(1 - α/2)⋯(1 - α/(n-1)) · α/n`.
pub fn sibuya_pmf(alpha: Exponent, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("Sibuya support starts at 1".into()));
    }
    Ok(alpha.get() / n as f64 * sibuya_survival(alpha, n - 1))
}

/// Sibuya(α) draw by inversion of the survival function.
///
/// Small values are resolved by accumulating the survival product; beyond
/// that an asymptotic guess `(U Γ(1-α))^{-1/α} - (1-α)/2` seeds a
/// bracketing search finished by bisection on the log-gamma survival.
/// Values past 2^53 are returned from the asymptotic guess, saturating at
/// `u64::MAX`.
pub fn sample_sibuya(alpha: Exponent, rng: &mut RandomSource) -> u64 {
    if alpha.is_one() {
        return 1;
    }
    let a = alpha.get();
    let u = rng.uniform();
    let mut surv = 1.0;
    for n in 1..=DIRECT_PRODUCT_TERMS {
        surv *= 1.0 - a / n as f64;
        if surv < u {
            return n;
        }
    }

    let ln_u = u.ln();
    let guess = ((ln_u + ln_gamma(1.0 - a)) * (-1.0 / a)).exp() - 0.5 * (1.0 - a);
    if guess >= 9.0e15 {
        // f64 -> u64 casts saturate.
        return guess as u64;
    }
    // Invariant: S(lo) >= u > S(hi).
    let above = |n: u64| sibuya_ln_survival(alpha, n) >= ln_u;
    let mut lo = (guess.floor() as u64).saturating_sub(2).max(DIRECT_PRODUCT_TERMS);
    while !above(lo) {
        lo = (lo / 2).max(DIRECT_PRODUCT_TERMS);
    }
    let mut hi = (guess.ceil() as u64 + 2).max(lo + 1);
    while above(hi) {
        lo = hi;
        hi = hi.saturating_mul(2);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// One-sided strictly stable `ζ_α` with `E e^{-zζ} = exp{-z^α}`, by
/// Kanter's representation. Returns 1 for `α = 1`.
pub fn sample_positive_stable(alpha: Exponent, rng: &mut RandomSource) -> f64 {
    if alpha.is_one() {
        return 1.0;
    }
    let a = alpha.get();
    let u = std::f64::consts::PI * rng.uniform();
    let e = rng.exponential();
    let ln_zeta = (a * u).sin().ln() - (u.sin().ln()) / a
        + (1.0 - a) / a * (((1.0 - a) * u).sin().ln() - e.ln());
    ln_zeta.exp()
}

/// Discrete stable draw with p.g.f. `exp{-c(1-s)^α}` along the chosen route.
pub fn sample_discrete_stable(
    params: DiscreteStableParams,
    route: DiscreteStableRoute,
    rng: &mut RandomSource,
) -> u64 {
    let DiscreteStableParams { c, alpha } = params;
    if c == 0.0 {
        return 0;
    }
    match route {
        DiscreteStableRoute::PoissonMixture => {
            let mean = c.powf(1.0 / alpha.get()) * sample_positive_stable(alpha, rng);
            rng.poisson(mean)
        }
        DiscreteStableRoute::CompoundSibuya => {
            let clusters = rng.poisson(c);
            (0..clusters).fold(0u64, |acc, _| acc.saturating_add(sample_sibuya(alpha, rng)))
        }
    }
}

/// Leading coefficients of a probability generating function, with the
/// mass beyond the last coefficient reported rather than renormalized.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesPmf {
    pub probabilities: Vec<f64>,
    pub tail_mass: f64,
}

/// Coefficients `p_0..=p_{n_max}` of `exp{-c(1-s)^α}`.
///
/// With `1 - (1-s)^α = Σ_{n≥1} q_n(α) s^n` the p.g.f. is
/// `e^{-c} exp{c Σ q_n s^n}`, whose coefficients obey
/// `n p_n = c Σ_{j=1}^n j q_j p_{n-j}`. All terms are non-negative, so the
/// recursion is free of cancellation.
pub fn discrete_stable_pmf_oracle(params: DiscreteStableParams, n_max: usize) -> SeriesPmf {
    let DiscreteStableParams { c, alpha } = params;
    let a = alpha.get();
    // j * q_j, built from the ratio q_{j+1}/q_j = (j - α)/(j + 1).
    let mut jq = Vec::with_capacity(n_max + 1);
    jq.push(0.0);
    let mut q = a;
    for j in 1..=n_max {
        jq.push(j as f64 * q);
        q *= (j as f64 - a) / (j as f64 + 1.0);
    }
    let mut p = Vec::with_capacity(n_max + 1);
    p.push((-c).exp());
    for n in 1..=n_max {
        let acc: CompensatedSum = (1..=n).map(|j| jq[j] * p[n - j]).collect();
        p.push(c * acc.value() / n as f64);
    }
    let total: CompensatedSum = p.iter().copied().collect();
    SeriesPmf {
        tail_mass: (1.0 - total.value()).max(0.0),
        probabilities: p,
    }
}

/// `exp{-c(1-s)^α}` for `s ∈ [0, 1]`.
pub fn discrete_stable_pgf(params: DiscreteStableParams, s: f64) -> f64 {
    assert!((0.0..=1.0).contains(&s), "p.g.f. argument {s} outside [0, 1]");
    (-params.c * (1.0 - s).powf(params.alpha.get())).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn alpha(a: f64) -> Exponent {
        Exponent::new(a).unwrap()
    }

    #[test]
    fn exponent_bounds() {
        assert!(Exponent::new(0.0).is_err());
        assert!(Exponent::new(1.0 + 1e-12).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert!(Exponent::new(1.0).unwrap().is_one());
        assert!(serde_json::from_str::<Exponent>("1.5").is_err());
        assert_eq!(serde_json::from_str::<Exponent>("0.5").unwrap().get(), 0.5);
    }

    #[test]
    fn thinning_identity_and_zero() {
        let mut rng = RandomSource::new(1);
        assert_eq!(thin_integer(5, 1.0, &mut rng).unwrap(), 5);
        assert_eq!(thin_integer(7, 0.0, &mut rng).unwrap(), 0);
        assert!(thin_integer(3, 1.5, &mut rng).is_err());
        assert!(thin_integer(3, -0.1, &mut rng).is_err());
    }

    #[test]
    fn sibuya_pmf_values() {
        assert_relative_eq!(sibuya_pmf(alpha(0.5), 1).unwrap(), 0.5);
        assert_relative_eq!(sibuya_pmf(alpha(0.5), 2).unwrap(), 0.125);
        assert_eq!(sibuya_pmf(Exponent::ONE, 1).unwrap(), 1.0);
        for n in 2..10 {
            assert_eq!(sibuya_pmf(Exponent::ONE, n).unwrap(), 0.0);
        }
        assert!(matches!(sibuya_pmf(alpha(0.5), 0), Err(Error::Domain(_))));
    }

    #[test]
    fn sibuya_survival_values() {
        assert_eq!(sibuya_survival(alpha(0.4), 0), 1.0);
        assert_relative_eq!(sibuya_survival(alpha(0.5), 1), 0.5);
        assert_eq!(sibuya_survival(Exponent::ONE, 1), 0.0);
        let direct: f64 = (1..=10).map(|k| 1.0 - 0.3 / k as f64).product();
        assert_relative_eq!(sibuya_survival(alpha(0.3), 10), direct, max_relative = 1e-12);
        // log-gamma branch against the product
        let direct: f64 = (1..=500).map(|k| 1.0 - 0.3 / k as f64).product();
        assert_relative_eq!(sibuya_survival(alpha(0.3), 500), direct, max_relative = 1e-12);
    }

    #[test]
    fn sibuya_pmf_and_survival_telescope() {
        for a in [0.1, 0.3, 0.5, 0.8, 0.99] {
            let al = alpha(a);
            let mut partial = CompensatedSum::default();
            for n in 1..=10_000u64 {
                partial.add(sibuya_pmf(al, n).unwrap());
                if n % 997 == 0 || n == 10_000 {
                    let total = partial.value() + sibuya_survival(al, n);
                    assert!((total - 1.0).abs() < 1e-12, "alpha={a} n={n} total={total}");
                }
            }
        }
    }

    #[test]
    fn sibuya_alpha_one_is_one() {
        let mut rng = RandomSource::new(2);
        assert!((0..1000).all(|_| sample_sibuya(Exponent::ONE, &mut rng) == 1));
    }

    #[test]
    fn sibuya_inversion_matches_literal_trials_in_frequency_of_one() {
        let mut rng = RandomSource::new(11);
        let n = 200_000;
        let ones = (0..n).filter(|_| sample_sibuya(alpha(0.5), &mut rng) == 1).count();
        let se = (0.25 / n as f64).sqrt();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 4.0 * se);
    }

    #[test]
    fn positive_stable_alpha_one() {
        let mut rng = RandomSource::new(3);
        assert!((0..100).all(|_| sample_positive_stable(Exponent::ONE, &mut rng) == 1.0));
    }

    #[test]
    fn pmf_oracle_reduces_to_poisson_at_alpha_one() {
        let pmf = discrete_stable_pmf_oracle(DiscreteStableParams::new(1.0, Exponent::ONE).unwrap(), 5);
        let mut fact = 1.0;
        for (n, p) in pmf.probabilities.iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            assert_relative_eq!(*p, (-1.0f64).exp() / fact, max_relative = 1e-14);
        }
    }

    #[test]
    fn pmf_oracle_leading_terms() {
        let params = DiscreteStableParams::new(1.0, alpha(0.5)).unwrap();
        let pmf = discrete_stable_pmf_oracle(params, 30);
        let e1 = (-1.0f64).exp();
        assert_relative_eq!(pmf.probabilities[0], e1, max_relative = 1e-15);
        assert_relative_eq!(pmf.probabilities[1], 0.5 * e1, max_relative = 1e-14);
        // p_2 = e^{-c}(c q_2 + c^2 q_1^2 / 2) = e^{-1}(1/8 + 1/8)
        assert_relative_eq!(pmf.probabilities[2], 0.25 * e1, max_relative = 1e-14);
        assert!(pmf.probabilities.iter().all(|&p| p >= 0.0));
        assert!(pmf.tail_mass > 0.0 && pmf.tail_mass < 1.0);
    }

    #[test]
    fn zero_scale_is_point_mass() {
        let params = DiscreteStableParams::new(0.0, alpha(0.5)).unwrap();
        let mut rng = RandomSource::new(4);
        for route in [DiscreteStableRoute::PoissonMixture, DiscreteStableRoute::CompoundSibuya] {
            assert!((0..100).all(|_| sample_discrete_stable(params, route, &mut rng) == 0));
        }
        let pmf = discrete_stable_pmf_oracle(params, 4);
        assert_eq!(pmf.probabilities, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(DiscreteStableParams::new(-1.0, alpha(0.5)).is_err());
    }

    #[test]
    fn pgf_closed_form() {
        let p = DiscreteStableParams::new(1.0, alpha(0.5)).unwrap();
        assert_eq!(discrete_stable_pgf(p, 1.0), 1.0);
        assert_relative_eq!(discrete_stable_pgf(p, 0.0), (-1.0f64).exp());
        let p = DiscreteStableParams::new(3.0, alpha(0.25)).unwrap();
        assert_relative_eq!(discrete_stable_pgf(p, 0.5), (-3.0 * 0.5f64.powf(0.25)).exp());
    }

    #[test]
    fn route_labels() {
        assert_eq!("poisson-mixture".parse::<DiscreteStableRoute>().unwrap(), DiscreteStableRoute::PoissonMixture);
        assert_eq!("compound-sibuya".parse::<DiscreteStableRoute>().unwrap(), DiscreteStableRoute::CompoundSibuya);
        assert!(matches!("cox".parse::<DiscreteStableRoute>(), Err(Error::Parameter(_))));
    }

    proptest! {
        #[test]
        fn survival_monotone(a in 0.01f64..0.999, n in 0u64..5000) {
            let al = alpha(a);
            let s0 = sibuya_survival(al, n);
            let s1 = sibuya_survival(al, n + 1);
            prop_assert!(s1 <= s0);
            prop_assert!(s1 > 0.0 && s0 <= 1.0);
        }

        #[test]
        fn thinning_never_exceeds(n in 0u64..1_000_000, t in 0.0f64..=1.0, seed in any::<u64>()) {
            let mut rng = RandomSource::new(seed);
            prop_assert!(thin_integer(n, t, &mut rng).unwrap() <= n);
        }

        #[test]
        fn inversion_lands_in_correct_cell(a in 0.05f64..0.99, seed in any::<u64>()) {
            // The returned n must satisfy S(n-1) >= U > S(n) for the uniform used.
            let al = alpha(a);
            let mut probe = RandomSource::new(seed);
            let u = probe.uniform();
            let mut rng = RandomSource::new(seed);
            let n = sample_sibuya(al, &mut rng);
            prop_assume!(n < 1u64 << 50);
            prop_assert!(sibuya_ln_survival(al, n) < u.ln() + 1e-12);
            prop_assert!(sibuya_ln_survival(al, n - 1) >= u.ln() - 1e-12);
        }
    }
}
