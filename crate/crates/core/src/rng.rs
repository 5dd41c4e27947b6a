use serde::{Deserialize, Serialize};

/// SplitMix64 generator.
///
/// Chosen as the reference RNG because it is a handful of lines, has a
/// 64-bit state that serializes trivially, and produces the same sequence
/// on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub const fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Integer in `lo..=hi`. The modulo bias is below 2^-60 for the small
    /// ranges used here.
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.next_u64() % (hi - lo + 1)
    }
}

/// Pixels per simulated character of a placeholder bubble.
pub const PLACEHOLDER_PX_PER_CHAR: f64 = 5.0;
pub const PLACEHOLDER_MIN_CHARS: u64 = 5;
pub const PLACEHOLDER_MAX_CHARS: u64 = 10;

/// Width of an empty word bubble: a simulated word length of 5 to 10
/// characters at five pixels per character.
pub fn sample_placeholder_width(rng: &mut SplitMix64) -> f64 {
    rng.range_inclusive(PLACEHOLDER_MIN_CHARS, PLACEHOLDER_MAX_CHARS) as f64 * PLACEHOLDER_PX_PER_CHAR
}
