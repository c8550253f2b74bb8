//! Counter-based RNG streams: stream i of a seed is a pure function of
//! (seed, i), so Monte Carlo trajectories can be distributed across any
//! number of workers and still reproduce bit-for-bit. Each stream is a
//! ChaCha8 generator keyed by a SplitMix64 hash of (seed, stream).

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub struct StreamRng {
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> StreamRng {
        let mut state = seed ^ stream.wrapping_mul(0xd1342543de82ef95);
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        StreamRng {
            inner: ChaCha8Rng::from_seed(key),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        #[allow(unused_imports)] // needed on pure no_std targets
        use crate::scalar::Real;
        if let Some(x) = self.spare_normal.take() {
            return x;
        }
        let u1 = loop {
            let u = self.uniform();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * core::f64::consts::PI * u2;
        self.spare_normal = Some(r * t.sin());
        r * t.cos()
    }

    /// Index sampled according to a cumulative weight vector ending at 1.
    pub fn choose_cumulative(&mut self, cumulative: &[f64]) -> usize {
        let x = self.uniform();
        match cumulative.binary_search_by(|c| c.partial_cmp(&x).expect("finite weight")) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
        .min(cumulative.len() - 1)
    }
}
