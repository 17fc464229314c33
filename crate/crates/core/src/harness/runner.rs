//! Seeded, order-preserving parallel map over Monte-Carlo blocks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

/// Independent random streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Blocks,
    Calibration,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Blocks => 1,
            Stream::Calibration => 2,
        }
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of block `index` in `stream`:
/// `mix64(mix64(mix64(master) ^ tag) ^ index)`.
///
/// Each stage is a bijection of its input, so distinct indices within one
/// (master, stream) pair never share a seed.
pub fn block_seed(master: u64, stream: Stream, index: u64) -> u64 {
    mix64(mix64(mix64(master) ^ stream.tag()) ^ index)
}

pub fn block_rng(master: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(block_seed(master, stream, index))
}

/// A fixed-size worker pool.
///
/// Results come back in block order whatever the scheduling, and callers fold
/// them sequentially, so output does not depend on the worker count.
pub struct Runner {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl std::fmt::Debug for Runner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Runner").field("workers", &self.workers).finish()
    }
}

impl Runner {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::param("workers", "must be at least 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Workers(e.to_string()))?;
        Ok(Runner { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// `(0..n).map(f)` evaluated on the pool.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }

    /// Like [`Runner::map`] but stops at the first error in block order.
    pub fn try_map<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}
