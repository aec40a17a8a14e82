//! Deterministic random streams keyed by `(seed, stream_id)`.
//!
//! Each stream is a ChaCha8 generator seeded from `seed` and switched to
//! the ChaCha stream `stream_id`, so the output is a pure function of the
//! pair and of the number of draws taken.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    pub stream_id: u64,
    #[serde(default)]
    pub antithetic: bool,
}

#[derive(Debug, Clone)]
pub struct RngStream {
    key: StreamKey,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream::from_key(StreamKey {
            seed,
            stream_id,
            antithetic: false,
        })
    }

    pub fn from_key(key: StreamKey) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(key.seed);
        rng.set_stream(key.stream_id);
        RngStream { key, rng }
    }

    /// Same draws as `self` would produce from its start, with every
    /// symmetric sample negated.
    pub fn antithetic(&self) -> Self {
        RngStream::from_key(StreamKey {
            antithetic: !self.key.antithetic,
            ..self.key
        })
    }

    /// Independent child stream, e.g. one per replica.
    pub fn child(&self, index: u64) -> Self {
        RngStream::from_key(StreamKey {
            seed: self.key.seed,
            stream_id: splitmix64(self.key.stream_id ^ splitmix64(index.wrapping_add(1))),
            antithetic: self.key.antithetic,
        })
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    pub fn is_antithetic(&self) -> bool {
        self.key.antithetic
    }

    /// Sign applied to symmetric draws.
    pub fn sign(&self) -> f64 {
        if self.key.antithetic {
            -1.0
        } else {
            1.0
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        self.sign() * z
    }

    /// Uniform on `[-1, 1]`, symmetric under the antithetic flag.
    pub fn symmetric_uniform(&mut self) -> f64 {
        self.sign() * (2.0 * self.rng.random::<f64>() - 1.0)
    }

    pub fn rademacher(&mut self) -> f64 {
        let b: bool = self.rng.random();
        self.sign() * if b { 1.0 } else { -1.0 }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_draws() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.normal().to_bits(), b.normal().to_bits());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 4);
        assert_ne!(a.uniform(), b.uniform());
        assert_ne!(a.child(0).key(), a.child(1).key());
    }

    #[test]
    fn antithetic_flips_sign() {
        let mut a = RngStream::new(11, 0);
        let mut b = a.antithetic();
        for _ in 0..10 {
            assert_eq!(a.normal(), -b.normal());
        }
    }
}
