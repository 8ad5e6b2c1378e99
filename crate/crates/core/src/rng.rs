//! Counter-based randomness: ChaCha20 keyed by a 64-bit seed, one 64-bit
//! stream per logical index, so any draw is recomputable in isolation.

use num_bigint::BigInt;
pub use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::Q;

/// Mantissa bits of a realized uniform draw.
pub const UNIT_BITS: u32 = 53;

/// Generator for stream `id` under key `seed`. The key is the little-endian
/// seed zero-padded to 32 bytes (no seed expansion step in between).
pub fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(id);
    rng
}

/// Stream id of a binary word: a leading 1 marks the length, so distinct
/// words (including the empty word, id 1) never collide. Words longer than
/// 62 symbols are not supported.
pub fn word_stream_id(word: &[u8]) -> u64 {
    assert!(word.len() <= 62, "word too long for a stream id");
    word.iter().fold(1u64, |acc, &s| (acc << 1) | (s as u64 & 1))
}

/// Uniform draw on `(0,1)` as the exact dyadic `(m + 1/2)·2^{-53}`.
pub fn unit_dyadic(rng: &mut ChaCha20Rng) -> Q {
    let m = rng.next_u64() >> (64 - UNIT_BITS);
    Q::new(BigInt::from(2 * m + 1), BigInt::from(1u64) << (UNIT_BITS + 1))
}

/// The same draw as a float (exact: 54 significant bits never needed).
pub fn unit_f64(rng: &mut ChaCha20Rng) -> f64 {
    let m = rng.next_u64() >> (64 - UNIT_BITS);
    (m as f64 + 0.5) / (1u64 << UNIT_BITS) as f64
}
