use crate::bandit::GroupPartition;
use crate::error::{invalid_input, Result};
use crate::numerics::{DesignMatrix, LeastSquares, RewardVector};
use alloc::vec::Vec;

/// Append-only log of `(context, reward)` pairs plus their running
/// least-squares statistics.
#[derive(Debug, Clone)]
pub struct History {
    contexts: DesignMatrix,
    rewards: RewardVector,
    stats: LeastSquares,
}

/// Observations of a single arm.
pub type ArmHistory = History;
/// Observations of every arm in one group.
pub type GroupHistory = History;

impl History {
    pub fn new(dim: usize) -> Self {
        Self { contexts: DesignMatrix::new(dim), rewards: RewardVector::default(), stats: LeastSquares::new(dim) }
    }

    pub(crate) fn push(&mut self, x: &[f64], r: f64) -> Result<()> {
        self.contexts.push(x)?;
        self.stats.push(x, r)?;
        self.rewards.0.push(r);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn contexts(&self) -> &DesignMatrix {
        &self.contexts
    }

    pub fn rewards(&self) -> &RewardVector {
        &self.rewards
    }

    pub fn stats(&self) -> &LeastSquares {
        &self.stats
    }
}

/// Everything a policy has observed so far.
#[derive(Debug, Clone)]
pub struct PolicyState {
    partition: GroupPartition,
    dim: usize,
    arms: Vec<ArmHistory>,
    groups: Vec<GroupHistory>,
    reward_sum: f64,
}

impl PolicyState {
    pub fn new(partition: GroupPartition, dim: usize) -> Self {
        let arms = (0..partition.arms()).map(|_| History::new(dim)).collect();
        let groups = (0..partition.groups()).map(|_| History::new(dim)).collect();
        Self { partition, dim, arms, groups, reward_sum: 0.0 }
    }

    pub fn update(&mut self, arm: usize, x: &[f64], reward: f64) -> Result<()> {
        if arm >= self.arms.len() {
            return Err(invalid_input!("arm {arm} out of range for {} arms", self.arms.len()));
        }
        if x.len() != self.dim {
            return Err(invalid_input!("context has dimension {}, expected {}", x.len(), self.dim));
        }
        if !reward.is_finite() {
            return Err(invalid_input!("reward must be finite, got {reward}"));
        }
        self.arms[arm].push(x, reward)?;
        self.groups[self.partition.group_of(arm)].push(x, reward)?;
        self.reward_sum += reward;
        Ok(())
    }

    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arm(&self, i: usize) -> &ArmHistory {
        &self.arms[i]
    }

    pub fn group(&self, j: usize) -> &GroupHistory {
        &self.groups[j]
    }

    pub fn total_pulls(&self) -> usize {
        self.arms.iter().map(History::len).sum()
    }

    /// Mean of every observed reward, or 0 before the first observation.
    pub fn mean_reward(&self) -> f64 {
        match self.total_pulls() {
            0 => 0.0,
            n => self.reward_sum / n as f64,
        }
    }
}
