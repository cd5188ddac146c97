//! The interface between a trial runner and whatever produces contexts and
//! rewards: a synthetic instance or a dataset.

use alloc::vec::Vec;

use crate::bandit::{GroupPartition, Slate};
use crate::numerics::RngStream;

/// Everything drawn at the start of a round.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub slate: Slate,
    /// Per-arm reward that a pull would return, for environments whose
    /// rewards are fixed once the round is drawn.
    pub payoffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regrets {
    /// Regret under bias-free utility, when the environment knows it.
    pub true_regret: Option<f64>,
    pub biased: f64,
}

pub trait Environment {
    fn partition(&self) -> &GroupPartition;

    fn dim(&self) -> usize;

    fn arms(&self) -> usize {
        self.partition().arms()
    }

    fn draw_round(&self, t: u64, rng: &mut RngStream) -> Round;

    fn pull(&self, round: &Round, arm: usize, rng: &mut RngStream) -> f64;

    fn regrets(&self, round: &Round, arm: usize) -> Regrets;
}
