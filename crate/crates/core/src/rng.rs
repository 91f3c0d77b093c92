use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mixes a user seed with a stream tag (splitmix64 finalizer) so that
/// initialization, shuffling and splitting draw from unrelated streams.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream))
}

pub(crate) mod stream {
    pub const INIT: u64 = 1;
    pub const SHUFFLE: u64 = 2;
    pub const VALIDATION: u64 = 3;
    pub const SPLIT: u64 = 4;
    pub const GENERATOR: u64 = 5;
    pub const GRADCHECK: u64 = 6;
    pub const BENCH: u64 = 7;
}
