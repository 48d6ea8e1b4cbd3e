//! Deterministic random substreams.
//!
//! Every Monte Carlo task draws from its own ChaCha8 stream, keyed by the
//! master seed, a purpose tag and the task index. Results then depend only
//! on `(seed, tag, index)` and never on how rayon schedules the work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a purpose tag.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ tag.rotate_left(17))
}

/// Stream `index` of the generator keyed by `(seed, tag)`.
pub fn substream(seed: u64, tag: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, tag));
    rng.set_stream(index);
    rng
}

/// Stable 64-bit tag for a human-readable label (FNV-1a).
pub fn tag(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| substream(7, 1, 3).random()).collect();
        let b: u64 = substream(7, 1, 3).random();
        assert_eq!(a[0], b);
        let c: u64 = substream(7, 1, 4).random();
        let e: u64 = substream(7, 2, 3).random();
        assert_ne!(b, c);
        assert_ne!(b, e);
        assert_ne!(tag("zero-cell"), tag("arrangement"));
    }
}
