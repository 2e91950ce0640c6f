//! Per-replication random streams.
//!
//! Replication `r` under master seed `s` gets a ChaCha8 generator whose
//! 256-bit key is four successive splitmix64 outputs started from a state
//! that mixes `s` and `r`. The stream therefore depends only on `(s, r)`,
//! never on which thread runs the replication or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 256-bit key for replication `replication` of master seed `seed`.
pub fn stream_key(seed: u64, replication: u64) -> [u8; 32] {
    // Run the replication index through its own splitmix round first so that
    // (seed, r) and (seed + 1, r - 1) land far apart.
    let mut r_state = replication;
    let mut state = seed ^ splitmix64(&mut r_state).rotate_left(17);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

pub fn stream_rng(seed: u64, replication: u64) -> StreamRng {
    ChaCha8Rng::from_seed(stream_key(seed, replication))
}
