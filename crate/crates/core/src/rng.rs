//! Seedable pseudo-random stream underlying every stochastic choice.
//!
//! The generator is a splitmix-style 64-bit mixer: the state advances by a
//! fixed odd increment and each output is the state pushed through an
//! avalanching finalizer. It is small, fast, and — the property everything
//! here leans on — fully determined by its seed, so a whole experiment replays
//! bit for bit from one number. Independent streams for parallel work are
//! derived with [`split_seed`], never by sharing a stream across threads.

/// Odd increment for the state walk (2^64 / golden ratio).
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a master seed and a stream index.
///
/// The mixer is a bijection on u64, and `index * GOLDEN_GAMMA` is a bijection
/// too (the increment is odd), so for a fixed master seed distinct indexes
/// always yield distinct sub-seeds. Run `i` of an experiment and cell `i` of a
/// grid get their streams this way.
pub fn split_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ index.wrapping_mul(GOLDEN_GAMMA))
}

/// Deterministic pseudo-random stream. Cheap to create, `Clone` for
/// lookahead-style tests; never shared across threads.
#[derive(Debug, Clone)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn seed_from(seed: u64) -> Self {
        RngStream { state: seed }
    }

    /// Next raw 64-bit value.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform f64 in [0, 1) with the full 53-bit mantissa.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform f64 in [low, high). `low == high` degenerates to the constant.
    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.next_f64()
    }

    /// Uniform integer in [0, bound), unbiased.
    ///
    /// Widening-multiply rejection: the fast path is a single multiply; the
    /// correction branch (probability bound / 2^64) keeps the distribution
    /// exact rather than merely close.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let mut wide = u128::from(self.next_u64()) * u128::from(bound);
        let mut low = wide as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                wide = u128::from(self.next_u64()) * u128::from(bound);
                low = wide as u64;
            }
        }
        (wide >> 64) as u64
    }

    /// In-place Fisher–Yates shuffle; uniform over permutations.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
