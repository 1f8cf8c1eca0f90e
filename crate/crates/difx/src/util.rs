/// SplitMix64 output mixer.
///
/// Used everywhere a stream of derived seeds is needed: feeding it an
/// arithmetic progression with step `GOLDEN_GAMMA` reproduces the SplitMix64
/// sequence, so derived seeds are decorrelated even for adjacent inputs.
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// SplitMix64 increment (the 64-bit golden ratio).
pub const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
