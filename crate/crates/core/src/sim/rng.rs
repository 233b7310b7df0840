use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Role {
    Data = 1,
    Weights = 2,
    Theta = 3,
    Noise = 4,
    Test = 5,
    Subsample = 6,
    Shuffle = 7,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream keyed by `(seed, run, role, index)`. Any draw can be
/// regenerated without replaying the ones before it.
pub fn stream(seed: u64, run: u64, role: Role, index: u64) -> ChaCha8Rng {
    debug_assert!(run < 1 << 24 && index < 1 << 32);
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    rng.set_stream(((role as u64) << 56) | (run << 32) | index);
    rng
}
