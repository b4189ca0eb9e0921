//! Seed derivation. Every random stream in a run is a ChaCha8 stream keyed
//! by a 64-bit seed plus a 64-bit stream id, so any block of trials can be
//! regenerated on its own, in any order, on any thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Trials per independently seeded block.
pub const BLOCK_TRIALS: u64 = 1 << 16;

/// SplitMix64 finalizer (Steele, Lea and Flood), a bijective 64-bit mixer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the sweep cell at `(gamma, eta)`:
/// `splitmix64(splitmix64(master ^ bits(gamma)) ^ bits(eta))`.
///
/// The cell's own coordinates are the counter, so a cell's result does not
/// depend on which other cells are in the sweep or in which order.
pub fn cell_seed(master: u64, gamma: f64, eta: f64) -> u64 {
    splitmix64(splitmix64(master ^ gamma.to_bits()) ^ eta.to_bits())
}

/// Stream for block `block` of measured pair `pair_index`: ChaCha8 seeded
/// with `seed` via `seed_from_u64`, stream id `pair_index << 48 | block`.
pub fn block_rng(seed: u64, pair_index: usize, block: u64) -> ChaCha8Rng {
    debug_assert!(block < 1 << 48);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((pair_index as u64) << 48) | block);
    rng
}
