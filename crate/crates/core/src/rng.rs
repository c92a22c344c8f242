//! Seed derivation.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream addressed
//! by `(seed, stream)`. Replicate `i` of a Monte Carlo loop always reads stream
//! `i`, so results do not depend on the order (or thread) in which replicates
//! run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for replicate `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a parameter tuple. Used for per-cell seeds in
/// sweeps so that adding a grid point never changes another cell.
pub fn derive_seed(master: u64, key: &[u64]) -> u64 {
    key.iter()
        .fold(splitmix64(master), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}
