//! Seeded, splittable random streams for Monte Carlo runs.
//!
//! A [`RngContract`] names one stream. The generator is ChaCha8 keyed by a
//! SplitMix64 expansion of `seed`, with ChaCha's 64-bit stream id set to
//! `stream`. Gaussian draws use the ziggurat sampler of
//! `rand_distr::StandardNormal`; both are pinned through `Cargo.lock`.
//!
//! Trials are run in fixed batches of [`BATCH_TRIALS`]; batch `b` draws from
//! `contract.child(b)`, and batch results are merged in batch order, so the
//! outcome does not depend on how many threads execute the batches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::stats::Merge;

pub const BATCH_TRIALS: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngContract {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngContract {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngContract { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self.seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream);
        rng
    }

    /// Independent sub-stream `index` of this stream. The child's seed is a
    /// SplitMix64 hash of `(seed, stream)` and its stream id is `index`.
    pub fn child(&self, index: u64) -> RngContract {
        let mut state = self.seed ^ self.stream.rotate_left(32);
        splitmix64(&mut state);
        RngContract { seed: splitmix64(&mut state), stream: index }
    }

    /// Seed for a grid point, derived from the base seed and the point's indices.
    pub fn derive_seed(base: u64, indices: &[usize]) -> u64 {
        let mut state = base;
        let mut h = splitmix64(&mut state);
        for &i in indices {
            state ^= h ^ (i as u64);
            h = splitmix64(&mut state);
        }
        h
    }
}

/// Runs `trials` independent trials over split streams and merges the
/// per-batch accumulators in batch order.
pub(crate) fn run_trials<A, M, F>(trials: u64, contract: &RngContract, make: M, trial: F) -> A
where
    A: Merge + Send,
    M: Fn() -> A + Sync,
    F: Fn(&mut ChaCha8Rng, &mut A) + Sync,
{
    let batches = trials.div_ceil(BATCH_TRIALS);
    let parts: Vec<A> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = contract.child(b).rng();
            let mut acc = make();
            let len = BATCH_TRIALS.min(trials - b * BATCH_TRIALS);
            for _ in 0..len {
                trial(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(make(), |mut total, part| {
        total.merge(part);
        total
    })
}
