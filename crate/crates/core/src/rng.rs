use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finaliser over `seed` combined with a stream id.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator owned by the worker training `class_id`.
pub fn class_rng(seed: u64, class_id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, class_id as u64))
}
