//! Seeded, counter-based random streams.
//!
//! Every random quantity is drawn from ChaCha20 keyed by a 64-bit seed. Work is
//! split into fixed-size blocks and block `b` reads stream `b` of that key, so
//! results do not depend on how blocks are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Generator for stream `stream` under `seed`.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer over `(seed, index)`, used to give each independent
/// run of a repeated experiment its own seed.
pub(crate) fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
