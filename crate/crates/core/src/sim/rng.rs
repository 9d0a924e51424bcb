//! Portable random source for scenario runs.
//!
//! The generator is xoshiro256** seeded through SplitMix64, exactly as in
//! the reference C implementation by Blackman and Vigna. Every derived draw
//! below is spelled out so other implementations can reproduce a stream bit
//! for bit:
//!
//! * `unit()`: `(next_u64() >> 11) * 2^-53`, uniform in [0, 1)
//! * `below(n)`: `(next_u64() as u128 * n) >> 64`
//! * `exponential(rate)`: `-ln(1 - unit()) / rate`

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Debug, Clone)]
pub struct SimRng(Xoshiro256StarStar);

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    /// Starts from a raw 256-bit state (four little-endian words).
    pub fn from_state(words: [u64; 4]) -> Self {
        let mut seed = [0u8; 32];
        for (chunk, w) in seed.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        Self(Xoshiro256StarStar::from_seed(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Exponential variate with the given rate (events per unit time).
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -(1.0 - self.unit()).ln() / rate
    }
}
