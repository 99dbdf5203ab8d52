//! Counter-based mixing and seed splitting.
//!
//! Everything random in the workbench is a pure function of a 64-bit key and
//! a counter, so parallel estimators produce identical results regardless of
//! scheduling. The mixer is the SplitMix64 finalizer (Steele, Lea, Flood).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a bijection on `u64` with full avalanche.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of sample `index` in stream `stream` from a master seed.
#[inline]
pub fn split_seed(master: u64, stream: u64, index: u64) -> u64 {
    let s = mix64(master.wrapping_add(GOLDEN.wrapping_mul(stream.wrapping_add(1))));
    mix64(s ^ mix64(index.wrapping_add(GOLDEN)))
}

/// Keyed hash of a byte string, used as a pseudorandom function.
pub fn keyed_hash(key: u64, bytes: &[u8]) -> u64 {
    let mut h = mix64(key ^ 0x5851_F42D_4C95_7F2D);
    let mut chunks = bytes.chunks_exact(8);
    for c in &mut chunks {
        let w = u64::from_le_bytes([c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]]);
        h = mix64(h.wrapping_add(GOLDEN) ^ w);
    }
    let rem = chunks.remainder();
    if !rem.is_empty() {
        let mut buf = [0u8; 8];
        buf[..rem.len()].copy_from_slice(rem);
        h = mix64(h.wrapping_add(GOLDEN) ^ u64::from_le_bytes(buf));
    }
    mix64(h ^ (bytes.len() as u64).wrapping_mul(GOLDEN))
}

/// Maps a 64-bit value to a uniform double in `[0, 1)` using its top 53 bits.
#[inline]
pub fn unit_interval(bits: u64) -> f64 {
    const DEN: f64 = (1u64 << 53) as f64;
    (bits >> 11) as f64 / DEN
}

/// A seeded stream generator for sampling (boundary prefixes, test instances).
pub fn stream_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
