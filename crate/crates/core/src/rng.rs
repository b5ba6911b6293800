//! Named, reproducible random streams.
//!
//! Every stream is a ChaCha8 generator keyed by SHA-256 of `(run_seed, name)`,
//! so a stream's draws depend only on those two values. Creating streams in a
//! different order, or drawing more from one stream, never perturbs another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::time::SimTime;

pub struct RngStream {
    name: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(run_seed: u64, name: impl Into<String>) -> Self {
        let name = name.into();
        let digest = Sha256::new()
            .chain_update(run_seed.to_le_bytes())
            .chain_update(name.as_bytes())
            .finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        RngStream { name, rng: ChaCha8Rng::from_seed(key) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Uniform on `[lo, hi)`; `lo == hi` returns `lo`.
    ///
    /// Panics if `lo > hi` or either bound is not finite.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        assert!(lo.is_finite() && hi.is_finite() && lo <= hi, "invalid uniform bounds [{lo}, {hi})");
        if lo == hi {
            return lo;
        }
        self.rng.random_range(lo..hi)
    }

    /// Gaussian with mean `mu` and standard deviation `sigma`. One standard
    /// normal variate is consumed even when `sigma == 0`, which keeps the
    /// draw sequence aligned across different `sigma`.
    ///
    /// Panics if `sigma` is negative or not finite.
    pub fn gaussian(&mut self, mu: f64, sigma: f64) -> f64 {
        assert!(sigma.is_finite() && sigma >= 0.0, "invalid gaussian sigma {sigma}");
        let z: f64 = self.rng.sample(StandardNormal);
        if sigma == 0.0 {
            mu
        } else {
            mu + sigma * z
        }
    }

    /// Uniform integer on `0..=max`.
    pub fn uniform_int(&mut self, max: u32) -> u32 {
        self.rng.random_range(0..=max)
    }

    /// Uniform time on `[lo, hi)`, integer nanoseconds; `lo == hi` returns `lo`.
    pub fn uniform_time(&mut self, lo: SimTime, hi: SimTime) -> SimTime {
        assert!(lo <= hi, "invalid uniform bounds [{lo}, {hi})");
        if lo == hi {
            return lo;
        }
        SimTime::from_ns(self.rng.random_range(lo.as_ns()..hi.as_ns()))
    }
}
