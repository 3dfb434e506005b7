//! Seed derivation for reproducible, schedule-independent streams.
//!
//! Every random quantity in the crate is drawn from a `ChaCha12Rng` (a named,
//! portable generator with a stable stream specification). Sub-streams are
//! derived from a master seed with the SplitMix64 finalizer:
//!
//! `substream(master, k) = mix(master + mix(k + GAMMA))`
//!
//! where `GAMMA = 0x9E3779B97F4A7C15` and `mix` is the SplitMix64 output
//! function. The rule is fixed so that per-message and per-batch streams are
//! identical across platforms and thread schedules.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of sub-stream `stream` from a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix(master.wrapping_add(mix(stream.wrapping_add(GAMMA))))
}

/// RNG for sub-stream `stream` of a master seed.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(master, stream))
}
