//! Counter-based random streams.
//!
//! Every replica draws from its own ChaCha8 stream keyed by `(seed, replica)`,
//! so results do not depend on scheduling or on how replicas are chunked.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream for replica `replica` of an experiment seeded with `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Derives an independent seed for a sub-experiment (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Buffered source of fair coin flips, 64 per generator call.
#[derive(Debug, Default)]
pub struct BitSource {
    buf: u64,
    left: u32,
}

impl BitSource {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `n <= 64` fresh random bits in the low end of the word.
    #[inline]
    pub fn take<R: RngCore + ?Sized>(&mut self, n: u32, rng: &mut R) -> u64 {
        debug_assert!(n <= 64);
        if n == 0 {
            return 0;
        }
        if n <= self.left {
            let out = if n == 64 { self.buf } else { self.buf & ((1u64 << n) - 1) };
            self.buf = if n == 64 { 0 } else { self.buf >> n };
            self.left -= n;
            return out;
        }
        // Not enough buffered: use the remainder plus a fresh word.
        let have = self.left;
        let low = self.buf;
        let fresh = rng.next_u64();
        let need = n - have;
        let high = if need == 64 { fresh } else { fresh & ((1u64 << need) - 1) };
        self.buf = if need == 64 { 0 } else { fresh >> need };
        self.left = 64 - need;
        if have == 0 {
            high
        } else {
            low | (high << have)
        }
    }

    #[inline]
    pub fn coin<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> bool {
        self.take(1, rng) == 1
    }
}
