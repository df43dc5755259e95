//! Seeded random streams.
//!
//! Every run draws from a single xoshiro256** stream whose 256-bit state is
//! expanded from a 64-bit seed with splitmix64. Independent runs in a sweep
//! get seeds derived as `splitmix64(master_seed ^ run_index)`, so a row's
//! trajectory depends only on its index and never on scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256StarStar};

/// One application of the splitmix64 output function to `x`.
///
/// This is the first value a splitmix64 generator seeded with `x` produces.
pub fn splitmix64(x: u64) -> u64 {
    SplitMix64::seed_from_u64(x).next_u64()
}

/// Seed for run `index` under `master_seed`.
pub fn derive_run_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ index)
}

/// The random stream consumed by a single simulation run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngStream {
    inner: Xoshiro256StarStar,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
        }
    }

    /// Uniform index in `0..bound`. `bound` must be non-zero.
    #[inline]
    pub fn index(&mut self, bound: usize) -> usize {
        self.inner.random_range(0..bound)
    }

    /// Bernoulli trial with success probability `p` (clamped to `[0, 1]`).
    #[inline]
    pub fn chance(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.inner.random::<f64>() < p
        }
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        use rand::seq::SliceRandom;
        items.shuffle(&mut self.inner);
    }
}

impl RngCore for RngStream {
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
