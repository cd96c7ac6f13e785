//! Counter-based deterministic random streams.
//!
//! Every stream is identified by a [`StreamKey`] (run seed, domain, stream
//! index, generation). The n-th output of a stream is a pure function of the
//! key and `n`: the key is hashed into a 64-bit state and outputs are the
//! SplitMix64 finalizer applied to `state + n * GOLDEN`. Nothing depends on
//! the order in which streams are created or consumed, so per-register or
//! per-pair streams can be drawn concurrently and still reproduce the
//! sequential result bit for bit.

use crate::scalar::Scalar;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent purposes a run draws randomness for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Domain {
    Observe = 1,
    Select = 2,
    Move = 3,
    Placement = 4,
    Test = 5,
}

/// Coordinates of one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub domain: Domain,
    pub stream: u64,
    pub generation: u64,
}

impl StreamKey {
    pub fn new(seed: u64, domain: Domain, stream: u64, generation: u64) -> Self {
        Self {
            seed,
            domain,
            stream,
            generation,
        }
    }

    fn hash(&self) -> u64 {
        let mut h = mix64(self.seed ^ GOLDEN);
        for word in [self.domain as u64, self.stream, self.generation] {
            h = mix64(h ^ mix64(word.wrapping_add(GOLDEN)));
        }
        h
    }
}

/// Deterministic generator: output `n` of a stream depends only on `(key, n)`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: StreamKey) -> Self {
        Self {
            key: key.hash(),
            counter: 0,
        }
    }

    /// Convenience stream for tests and standalone use.
    pub fn from_seed(seed: u64) -> Self {
        Self::new(StreamKey::new(seed, Domain::Test, 0, 0))
    }

    /// Number of draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.counter
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, 1)` converted to the working scalar. One draw.
    pub fn next_unit<T: Scalar>(&mut self) -> T {
        let u = T::lit(self.next_f64());
        // f32 rounding can push values just below 1 up to exactly 1
        if u >= T::one() {
            T::one() - T::epsilon()
        } else {
            u
        }
    }

    pub fn next_bool(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_sequence() {
        let key = StreamKey::new(42, Domain::Observe, 3, 7);
        let mut a = CounterRng::new(key);
        let mut b = CounterRng::new(key);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn keys_separate_streams() {
        let base = StreamKey::new(42, Domain::Observe, 3, 7);
        let variants = [
            StreamKey { seed: 43, ..base },
            StreamKey {
                domain: Domain::Move,
                ..base
            },
            StreamKey { stream: 4, ..base },
            StreamKey {
                generation: 8,
                ..base
            },
        ];
        let first = CounterRng::new(base).next_u64();
        for key in variants {
            assert_ne!(CounterRng::new(key).next_u64(), first);
        }
    }

    #[test]
    fn unit_draws_in_range() {
        let mut rng = CounterRng::from_seed(9);
        for _ in 0..10_000 {
            let u: f64 = rng.next_unit();
            assert!((0.0..1.0).contains(&u));
            let v: f32 = rng.next_unit();
            assert!((0.0..1.0).contains(&v));
        }
        assert_eq!(rng.draws(), 20_000);
    }

    #[test]
    fn unit_mean_is_centered() {
        let mut rng = CounterRng::from_seed(1);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| rng.next_f64()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
    }
}
