//! Special functions used across the crate.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

pub use statrs::function::gamma::{gamma, ln_gamma};

/// `ln Γ(x + a) - ln Γ(x)` for `x > 0`, `x + a > 0`.
///
/// For large `x` the two log-gamma values are huge and nearly equal, so the
/// difference is taken inside the Stirling series instead.
pub fn ln_gamma_ratio(x: f64, a: f64) -> f64 {
    if x < 16.0 || x + a < 16.0 {
        return ln_gamma(x + a) - ln_gamma(x);
    }
    let y = x + a;
    let main = (x - 0.5) * (a / x).ln_1p() + a * y.ln() - a;
    main + stirling_tail(y) - stirling_tail(x)
}

fn stirling_tail(z: f64) -> f64 {
    let r = 1.0 / z;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))))
}

pub fn erf(x: f64) -> f64 {
    statrs::function::erf::erf(x)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
pub fn chi_square_sf(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    if statistic <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64)
        .map(|d| d.sf(statistic))
        .unwrap_or(f64::NAN)
        .clamp(0.0, 1.0)
}

/// Kolmogorov limiting distribution tail `Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_ratio_matches_direct_product() {
        // Γ(n + 1 - a) / Γ(n + 1) = Γ(1 - a) Π_{k=1}^n (1 - a/k)
        let a = 0.3;
        let mut log_prod = ln_gamma(1.0 - a);
        for n in 1..=2000u32 {
            log_prod += (1.0 - a / n as f64).ln();
            let lhs = ln_gamma_ratio(n as f64 + 1.0, -a);
            assert_relative_eq!(lhs, log_prod, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn chi_square_tail_known_values() {
        assert_relative_eq!(chi_square_sf(3.841458820694124, 1), 0.05, epsilon = 1e-9);
        assert_relative_eq!(chi_square_sf(9.21034037197618, 2), 0.01, epsilon = 1e-9);
        assert_eq!(chi_square_sf(0.0, 4), 1.0);
    }

    #[test]
    fn kolmogorov_tail_known_value() {
        // Q(1.358) ~ 0.05
        assert_relative_eq!(kolmogorov_sf(1.3581), 0.05, epsilon = 1e-4);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1.0, 1e-16, 1e-16, -1.0].into_iter().collect();
        assert_relative_eq!(s.value(), 2e-16, max_relative = 1e-12);
    }
}
