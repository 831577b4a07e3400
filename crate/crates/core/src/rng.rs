//! Counter-style RNG streams: every shot owns a `(seed, stream_id)` pair
//! that reproduces the same draws regardless of execution order or thread
//! count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Handle for one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> RngStream {
        RngStream { seed, stream_id }
    }

    /// Root stream of a run.
    pub fn root(seed: u64) -> RngStream {
        RngStream { seed, stream_id: 0 }
    }

    /// Child stream; mixing keeps ids from structured offsets well
    /// separated across nesting levels.
    pub fn substream(&self, offset: u64) -> RngStream {
        RngStream {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(offset)),
        }
    }

    /// Materialize the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Deterministic seed derivation for independent sub-experiments
/// (sweep points, methods, scales).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag.wrapping_add(0x51ed_2701)))
}
