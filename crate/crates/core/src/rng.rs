//! Reproducible RNG streams for parallel Monte Carlo.
//!
//! Every path gets its own ChaCha stream keyed by `(global seed, stream id)`,
//! so results are identical no matter how paths are scheduled across workers.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The generator handed to simulation kernels.
pub type StreamRng = ChaCha12Rng;

/// A factory of per-path streams under one global seed.
#[derive(Debug, Clone, Copy)]
pub struct RngLineage {
    seed: u64,
}

impl RngLineage {
    pub fn new(seed: u64) -> Self {
        RngLineage { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The stream for one path (or one independent job).
    pub fn stream(&self, stream_id: u64) -> StreamRng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(stream_id);
        rng
    }

    /// A derived lineage for a named sub-experiment, so that checks own
    /// disjoint RNG lineages under one experiment seed.
    pub fn child(&self, label: &str) -> RngLineage {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
        RngLineage {
            seed: self.seed ^ h,
        }
    }
}
