//! Seedable random streams.
//!
//! Every sampler in the crate takes an explicit [`RandomSource`]. Streams are
//! ChaCha8 keyed by a 64-bit seed; [`RandomSource::stream`] selects one of
//! 2^64 independent sub-streams under the same seed, which is how parallel
//! Monte Carlo work is partitioned.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson, StandardNormal};

/// Above this mean the Poisson draw uses a rounded normal approximation.
/// The relative error of that approximation is far below the resolution of
/// any statistic computed on such counts.
const POISSON_NORMAL_CUTOFF: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct RandomSource {
    inner: ChaCha8Rng,
    seed: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    /// The seed this source was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream `index` under `seed`.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(index);
        Self { inner, seed }
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Unit-mean exponential.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform index in `0..n`. `n` must be positive.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Poisson draw with mean `mean`; non-positive means give 0 and huge
    /// values saturate at `u64::MAX`.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 || mean.is_nan() {
            return 0;
        }
        if mean < 10.0 {
            // Sequential inversion; expected cost is mean + 1 steps.
            let u = self.uniform();
            let mut p = (-mean).exp();
            let mut cdf = p;
            let mut k = 0u64;
            while u > cdf && k < 1000 {
                k += 1;
                p *= mean / k as f64;
                cdf += p;
            }
            return k;
        }
        if mean < POISSON_NORMAL_CUTOFF {
            match Poisson::new(mean) {
                Ok(d) => return d.sample(&mut self.inner) as u64,
                Err(_) => unreachable!("poisson mean {mean} rejected"),
            }
        }
        let x = (mean + mean.sqrt() * self.normal()).round();
        if x >= u64::MAX as f64 {
            u64::MAX
        } else {
            x.max(0.0) as u64
        }
    }

    /// Binomial(n, p) draw. `p` is clamped to [0, 1].
    pub fn binomial(&mut self, n: u64, p: f64) -> u64 {
        if n == 0 || p <= 0.0 {
            return 0;
        }
        if p >= 1.0 {
            return n;
        }
        Binomial::new(n, p)
            .expect("probability checked above")
            .sample(&mut self.inner)
    }

    /// Multinomial split of `n` over `probs` (which need not sum to one; the
    /// remainder `1 - sum` receives whatever is left and is not reported).
    pub fn multinomial_into(&mut self, n: u64, probs: &[f64], out: &mut [u64]) {
        debug_assert_eq!(probs.len(), out.len());
        let mut left = n;
        let mut mass_left = 1.0;
        for (p, slot) in probs.iter().zip(out.iter_mut()) {
            if left == 0 || mass_left <= 0.0 {
                *slot = 0;
                continue;
            }
            let q = (p / mass_left).clamp(0.0, 1.0);
            let k = self.binomial(left, q);
            *slot = k;
            left -= k;
            mass_left -= p;
        }
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RandomSource::new(7);
        let mut b = RandomSource::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RandomSource::stream(7, 0);
        let mut b = RandomSource::stream(7, 1);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn uniform_is_open() {
        let mut r = RandomSource::new(1);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn poisson_edge_cases() {
        let mut r = RandomSource::new(3);
        assert_eq!(r.poisson(0.0), 0);
        assert_eq!(r.poisson(-1.0), 0);
        assert_eq!(r.poisson(f64::INFINITY), u64::MAX);
        let big = r.poisson(1e14) as f64;
        assert!((big - 1e14).abs() < 1e8);
    }

    #[test]
    fn small_mean_poisson_matches_law() {
        let mut r = RandomSource::new(5);
        let mean = 5e-4;
        let n = 2_000_000;
        let hits: u64 = (0..n).map(|_| r.poisson(mean)).sum();
        let se = (mean * n as f64).sqrt();
        assert!((hits as f64 - mean * n as f64).abs() < 4.0 * se);
    }

    #[test]
    fn multinomial_conserves_total() {
        let mut r = RandomSource::new(9);
        let mut out = [0u64; 3];
        for n in [0u64, 1, 17, 1_000_000] {
            r.multinomial_into(n, &[0.2, 0.3, 0.5], &mut out);
            assert_eq!(out.iter().sum::<u64>(), n);
        }
        r.multinomial_into(1000, &[0.1, 0.2], &mut out[..2]);
        assert!(out[0] + out[1] <= 1000);
    }
}
