//! Small deterministic pseudo-random helpers.
//!
//! All stochastic behaviour in the crate (rate jitter, dataset shuffles,
//! per-run seed derivation) flows through these functions so that a given
//! seed reproduces bit-identical artifacts on every run and platform.
//! The generator is SplitMix64: tiny, stateless per call site, and
//! statistically solid for the light duty it has here.

/// One SplitMix64 scramble round.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a seed with a stream tag and a counter into an independent word.
///
/// Used to derive per-tick jitter draws and per-run seeds from one master
/// seed without shared mutable state.
#[inline]
pub fn mix(seed: u64, stream: u64, counter: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ counter)
}

/// Uniform draw in `[0, 1)` from a seed/stream/counter triple.
#[inline]
pub fn unit_f64(seed: u64, stream: u64, counter: u64) -> f64 {
    // 53 high bits -> the standard dyadic rational construction.
    (mix(seed, stream, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A tiny sequential generator for shuffles, seeded once.
pub struct SmallRng {
    state: u64,
}

impl SmallRng {
    pub fn new(seed: u64) -> Self {
        SmallRng {
            state: splitmix64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        splitmix64(self.state)
    }

    /// Uniform index in `[0, n)`; `n` must be nonzero.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Deterministic Fisher–Yates shuffle of `items` driven by `seed`.
pub fn shuffle<T>(items: &mut [T], seed: u64) {
    let mut rng = SmallRng::new(seed);
    for i in (1..items.len()).rev() {
        let j = rng.below(i + 1);
        items.swap(i, j);
    }
}
