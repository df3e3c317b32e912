//! Derivation of independent, reproducible RNG streams from one master seed.
//!
//! Every random quantity in an experiment (topology wiring, plant draw,
//! per-node exponents, per-run per-node data) pulls from its own stream,
//! keyed by a tag path. Parallel execution therefore produces bitwise the
//! same results as sequential execution regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Tag for the network-wiring stream.
pub const TOPOLOGY_TAG: u64 = 1;
/// Tag for the sparse-plant stream.
pub const PLANT_TAG: u64 = 2;
/// Tag for the per-node exponent assignment stream.
pub const P_ASSIGNMENT_TAG: u64 = 3;
/// Tag for per-(run, node) input/noise streams.
pub const DATA_TAG: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed with an ordered tag path into one derived seed.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &t in tags {
        h = splitmix64(h ^ splitmix64(t));
    }
    h
}

/// RNG for the stream identified by `tags` under `master`.
pub fn stream_rng(master: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, tags))
}
