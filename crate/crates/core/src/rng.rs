//! Deterministic, splittable random streams.
//!
//! A stream is addressed by `(base_seed, stream_id)`. The generator is ChaCha8
//! keyed from the base seed with the stream id selecting ChaCha's 64-bit stream
//! word, so every `(seed, id)` pair yields its own counter-based sequence and
//! two consumers never have to agree on a draw order.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Stream ids reserved by the crate. Everything below `1 << 60` is free for
/// callers (importance uses `j << 32 | r`).
pub mod streams {
    /// Weight initialisation; the layer index is added.
    pub const INIT: u64 = 0xA000_0000_0000_0000;
    pub const SHUFFLE: u64 = 0xA100_0000_0000_0000;
    pub const DROPOUT: u64 = 0xA200_0000_0000_0000;
    pub const FOLDS: u64 = 0xA300_0000_0000_0000;
    pub const SYNTH_LATENT: u64 = 0xB000_0000_0000_0000;
    pub const SYNTH_LOADINGS: u64 = 0xB100_0000_0000_0000;
    pub const SYNTH_NOISE: u64 = 0xB200_0000_0000_0000;
    pub const SYNTH_SIGNAL: u64 = 0xB300_0000_0000_0000;
}

#[derive(Debug, Clone)]
pub struct RngStream {
    base_seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(base_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(base_seed);
        inner.set_stream(stream_id);
        Self {
            base_seed,
            stream_id,
            inner,
        }
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Unbiased integer in `0..n` by rejection on 64-bit draws.
    ///
    /// Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// In-place Fisher–Yates shuffle: for `i` from `len-1` down to `1`,
    /// swap `i` with `below(i + 1)`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
