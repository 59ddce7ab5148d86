//! Deterministic random streams.
//!
//! Every stream is keyed by the master seed, a label naming its purpose and
//! a list of integer ids (path index, outer sample, inner sample, …). Streams
//! never depend on execution order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngPolicy {
    pub master_seed: u64,
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn absorb(state: &mut u64, word: u64) {
    *state ^= word;
    splitmix(state);
}

impl RngPolicy {
    pub fn new(master_seed: u64) -> Self {
        RngPolicy { master_seed }
    }

    /// Independent stream for `(label, ids)`.
    pub fn stream(&self, label: &str, ids: &[u64]) -> ChaCha8Rng {
        let mut state = self.master_seed;
        splitmix(&mut state);
        for chunk in label.as_bytes().chunks(8) {
            let mut word = [0u8; 8];
            word[..chunk.len()].copy_from_slice(chunk);
            absorb(&mut state, u64::from_le_bytes(word));
        }
        absorb(&mut state, label.len() as u64);
        absorb(&mut state, ids.len() as u64);
        for &id in ids {
            absorb(&mut state, id);
        }
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_mut(8) {
            chunk.copy_from_slice(&splitmix(&mut state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }

    /// The three streams driving one path: structure chain, marks, noise.
    pub fn path_streams(&self, label: &str, ids: &[u64]) -> PathStreams {
        let with = |tag: u64| {
            let mut v = ids.to_vec();
            v.push(tag);
            self.stream(label, &v)
        };
        PathStreams { chain: with(0), marks: with(1), noise: with(2) }
    }
}

/// Separate streams so the regime path and marks do not depend on the step
/// size used for the Wiener increments.
#[derive(Debug, Clone)]
pub struct PathStreams {
    pub chain: ChaCha8Rng,
    pub marks: ChaCha8Rng,
    pub noise: ChaCha8Rng,
}
