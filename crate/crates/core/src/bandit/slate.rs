use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::numerics::RngStream;

/// The contexts presented at one round, one per arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slate {
    round: u64,
    contexts: Vec<Vec<f64>>,
}

impl Slate {
    pub fn new(round: u64, contexts: Vec<Vec<f64>>) -> Self {
        Self { round, contexts }
    }

    pub fn sample_uniform(round: u64, arms: usize, dim: usize, rng: &mut RngStream) -> Self {
        let scale = 1.0 / libm::sqrt(dim as f64);
        let contexts = (0..arms).map(|_| (0..dim).map(|_| scale * rng.uniform()).collect()).collect();
        Self { round, contexts }
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn arms(&self) -> usize {
        self.contexts.len()
    }

    pub fn context(&self, arm: usize) -> &[f64] {
        &self.contexts[arm]
    }

    pub fn contexts(&self) -> &[Vec<f64>] {
        &self.contexts
    }

    /// FNV-1a over the bit patterns of every context component.
    pub fn context_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in self.contexts.iter().flatten() {
            for b in v.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Purpose, StreamId};

    #[test]
    fn contexts_lie_in_the_unit_ball() {
        for d in [1usize, 2, 4, 9] {
            let mut rng = RngStream::new(1, StreamId::new(d as u64, Purpose::Slate));
            let s = Slate::sample_uniform(1, 50, d, &mut rng);
            let bound = 1.0 / libm::sqrt(d as f64);
            for x in s.contexts() {
                assert!(x.iter().all(|&v| (0.0..=bound).contains(&v)));
                assert!(x.iter().map(|v| v * v).sum::<f64>() <= 1.0);
            }
        }
    }

    #[test]
    fn same_stream_same_slate() {
        let id = StreamId::new(5, Purpose::Slate);
        let a = Slate::sample_uniform(5, 10, 3, &mut RngStream::new(11, id));
        let b = Slate::sample_uniform(5, 10, 3, &mut RngStream::new(11, id));
        assert_eq!(a, b);
        assert_eq!(a.context_hash(), b.context_hash());
    }
}
