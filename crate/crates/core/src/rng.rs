//! Seeded random streams.
//!
//! Every experiment derives its randomness from a ChaCha8 counter-mode
//! generator. Independent sub-streams (per SNR point, per trial, per
//! purpose) are selected through the generator's 64-bit stream id, so any
//! single trial can be replayed without generating the ones before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for `seed` with no stream selection.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for the sub-stream identified by `parts`.
///
/// The parts are folded into a single stream id with a splitmix64 mix, so
/// `(1, 2)` and `(2, 1)` select different streams.
pub fn stream(seed: u64, parts: &[u64]) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(mix_parts(parts));
    rng
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn mix_parts(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}
