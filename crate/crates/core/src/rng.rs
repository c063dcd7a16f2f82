//! Counter-based random streams.
//!
//! Every consumer of randomness (a particle at a time step, a Markov chain, a
//! repetition) draws from its own ChaCha stream keyed by integers, so results do
//! not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream id reserved for sequential barriers such as resampling.
pub const BARRIER_STREAM: u64 = u64::MAX;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A family of independent random streams derived from one 64-bit seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStreams {
    seed: u64,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A derived family, e.g. one per repetition or per algorithm phase.
    pub fn child(&self, id: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(id.wrapping_mul(GOLDEN).wrapping_add(1))),
        }
    }

    /// Stream number `stream`, starting at its beginning.
    pub fn stream(&self, stream: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Stream number `stream`, positioned at block `block`. Blocks are 2^40 words
    /// apart, so distinct `(stream, block)` pairs never overlap in practice.
    pub fn stream_at(&self, stream: u64, block: u64) -> StreamRng {
        let mut rng = self.stream(stream);
        rng.set_word_pos((block as u128) << 40);
        rng
    }
}
