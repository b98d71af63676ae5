//! Seeded randomness.
//!
//! Every random decision in the crate goes through [`Rng`], a thin wrapper
//! over ChaCha8 (`rand_chacha::ChaCha8Rng`). ChaCha8 output is specified
//! independently of platform and word size, and `seed_from_u64` expands the
//! seed with PCG32, so a given `(seed, stream)` pair yields the same sequence
//! everywhere. Integer draws are made over `u64` ranges for the same reason.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent generator for a sub-task, e.g. one clip of a dataset.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Uniform index in `[0, n)`.
    pub fn uniform(&mut self, n: usize) -> Result<usize> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "uniform draw over an empty range".into(),
            ));
        }
        Ok(self.inner.gen_range(0..n as u64) as usize)
    }

    /// Uniform real in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform real in `[low, high)`.
    pub fn range(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.unit()
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.inner.gen_range(0..=i as u64) as usize;
            items.swap(i, j);
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.gen()
    }
}
