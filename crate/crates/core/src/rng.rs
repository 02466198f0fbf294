//! Counter-based random stream.
//!
//! Every random ensemble in the crate is drawn from this generator so that a
//! single 64-bit seed fully determines the results, independent of call order
//! or platform. The stream is defined arithmetically (no hidden state beyond
//! the counter), so any other implementation can reproduce it:
//!
//! ```text
//! value(i) = mix(seed + (i + 1) * 0x9E3779B97F4A7C15)      (wrapping u64)
//! mix(z):  z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!          z ^= z >> 27; z *= 0x94D049BB133111EB;
//!          z ^= z >> 31
//! unit(i)  = (value(i) >> 11) * 2^-53                       in [0, 1)
//! ```

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The i-th raw value of the stream for `seed`.
#[inline]
pub fn value(seed: u64, i: u64) -> u64 {
    mix(seed.wrapping_add((i.wrapping_add(1)).wrapping_mul(GOLDEN)))
}

/// Sequential cursor over the counter stream.
#[derive(Clone, Copy, Debug)]
pub struct Stream {
    seed: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream { seed, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = value(self.seed, self.counter);
        self.counter += 1;
        v
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [-1, 1).
    pub fn next_symmetric(&mut self) -> f64 {
        2.0 * self.next_unit() - 1.0
    }
}
