//! Deterministic seed derivation, so parallel work never depends on scheduling.

/// Stream tags used when deriving per-task seeds.
pub mod stream {
    pub const DATA: u64 = 1;
    pub const FUTURES: u64 = 2;
    pub const METHOD: u64 = 3;
    pub const ROLLING: u64 = 4;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for task `index` on stream `stream` under `root`.
pub fn derive_seed(root: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(root) ^ stream) ^ index)
}
