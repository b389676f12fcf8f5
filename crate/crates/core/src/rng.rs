//! Counter-based random substreams.
//!
//! Every replicate, trial or task gets its own ChaCha stream keyed by
//! `(seed, index)`, so results never depend on how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SubstreamRng = ChaCha8Rng;

/// Generator for stream `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> SubstreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives an independent seed for a nested experiment (e.g. the bootstrap
/// run inside Monte Carlo trial `index`).
pub fn child_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
