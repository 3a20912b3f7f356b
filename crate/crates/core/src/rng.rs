//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, stream, counter)`, so work can be
//! split across threads or reordered without changing any value. The mixing
//! function is the SplitMix64 finalizer; Gaussian draws use the cosine branch
//! of Box–Muller on two consecutive uniforms.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_MULT: u64 = 0xD1B5_4A32_D192_ED03;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateless generator keyed by a seed and a stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            key: splitmix64(seed ^ splitmix64(stream.wrapping_mul(STREAM_MULT))),
        }
    }

    #[inline]
    pub fn u64_at(&self, counter: u64) -> u64 {
        splitmix64(self.key ^ counter.wrapping_mul(GOLDEN))
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform_at(&self, counter: u64) -> f64 {
        (self.u64_at(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    #[inline]
    pub fn uniform_range_at(&self, counter: u64, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform_at(counter)
    }

    /// Standard normal built from uniforms at `2k` and `2k + 1`.
    pub fn normal_at(&self, k: u64) -> f64 {
        let u1 = 1.0 - self.uniform_at(2 * k);
        let u2 = self.uniform_at(2 * k + 1);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
