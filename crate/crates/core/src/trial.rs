//! Running one policy against one environment, and per-trajectory metrics.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bandit::GroupPartition;
use crate::env::Environment;
use crate::error::{invalid_input, Error, Result};
use crate::numerics::{Purpose, RngStream, StreamId};
use crate::policy::{Policy, PolicyKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub t: u64,
    pub arm: usize,
    pub group: usize,
    pub reward: f64,
    /// Absent when the environment has no bias-free ground truth.
    pub true_regret: Option<f64>,
    pub biased_regret: f64,
    pub explored: bool,
    pub context_hash: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub policy: PolicyKind,
    pub seed: u64,
    pub outcomes: Vec<RoundOutcome>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// Plays `horizon` rounds of `policy` on `env`.
///
/// Round `t` draws its slate, reward noise and policy randomness from three
/// streams keyed by `(seed, t)`, so every policy run at the same seed sees the
/// same slates.
pub fn run_trial<E: Environment + ?Sized>(
    env: &E,
    policy: &mut Policy,
    horizon: u64,
    seed: u64,
) -> Result<Trajectory> {
    if policy.state().total_pulls() != 0 {
        return Err(invalid_input!("run_trial needs a freshly initialized policy"));
    }
    if policy.state().partition() != env.partition() || policy.state().dim() != env.dim() {
        return Err(invalid_input!("policy was built for a different environment"));
    }
    let mut outcomes = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        let round = env.draw_round(t, &mut RngStream::new(seed, StreamId::new(t, Purpose::Slate)));
        let decision = policy.select(&round.slate, t, &mut RngStream::new(seed, StreamId::new(t, Purpose::Policy)))?;
        let arm = decision.arm;
        let reward = env.pull(&round, arm, &mut RngStream::new(seed, StreamId::new(t, Purpose::Noise)));
        let regrets = env.regrets(&round, arm);
        policy.update(arm, round.slate.context(arm), reward)?;
        outcomes.push(RoundOutcome {
            t,
            arm,
            group: env.partition().group_of(arm),
            reward,
            true_regret: regrets.true_regret,
            biased_regret: regrets.biased,
            explored: decision.explored,
            context_hash: round.slate.context_hash(),
        });
    }
    Ok(Trajectory { policy: policy.kind(), seed, outcomes })
}

/// Rounds `⌈T/2⌉..=T`.
pub fn trailing_window(horizon: u64) -> (u64, u64) {
    (horizon.div_ceil(2).max(1), horizon)
}

/// Share of pulls in the inclusive round window that went to sensitive arms.
pub fn sensitive_pull_fraction(
    trajectory: &Trajectory,
    partition: &GroupPartition,
    window: Option<(u64, u64)>,
) -> Result<f64> {
    let horizon = trajectory.len() as u64;
    let (from, to) = window.unwrap_or((1, horizon));
    if from < 1 || to > horizon || from > to {
        return Err(invalid_input!("window {from}..={to} is empty or outside 1..={horizon}"));
    }
    let rounds = &trajectory.outcomes[(from - 1) as usize..to as usize];
    let hits = rounds.iter().filter(|o| partition.is_sensitive(o.arm)).count();
    Ok(hits as f64 / rounds.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretKind {
    True,
    Biased,
}

/// Prefix sums of the per-round regret of the given kind.
pub fn cumulative_regret(trajectory: &Trajectory, kind: RegretKind) -> Result<Vec<f64>> {
    let mut acc = 0.0;
    trajectory
        .outcomes
        .iter()
        .map(|o| {
            acc += match kind {
                RegretKind::True => o.true_regret.ok_or(Error::NoTrueRegret)?,
                RegretKind::Biased => o.biased_regret,
            };
            Ok(acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn traj(arms: &[usize], regrets: &[f64]) -> Trajectory {
        let outcomes = arms
            .iter()
            .zip(regrets)
            .enumerate()
            .map(|(i, (&arm, &r))| RoundOutcome {
                t: i as u64 + 1,
                arm,
                group: 0,
                reward: 0.0,
                true_regret: Some(r),
                biased_regret: r,
                explored: false,
                context_hash: 0,
            })
            .collect();
        Trajectory { policy: PolicyKind::TopInterval, seed: 0, outcomes }
    }

    #[test]
    fn fraction_by_counting() {
        let p = GroupPartition::two_group(2, 1).unwrap();
        let t = traj(&[0, 1, 0, 0], &[0.0; 4]);
        assert_eq!(sensitive_pull_fraction(&t, &p, None).unwrap(), 0.75);
        assert_eq!(sensitive_pull_fraction(&t, &p, Some((2, 2))).unwrap(), 0.0);
        let all = traj(&[0, 0], &[0.0; 2]);
        assert_eq!(sensitive_pull_fraction(&all, &p, None).unwrap(), 1.0);
        assert!(sensitive_pull_fraction(&t, &p, Some((3, 2))).is_err());
        assert!(sensitive_pull_fraction(&t, &p, Some((0, 2))).is_err());
        assert!(sensitive_pull_fraction(&traj(&[], &[]), &p, None).is_err());
    }

    #[test]
    fn prefix_sums() {
        let t = traj(&[0, 0, 0], &[0.3, 0.0, 0.2]);
        let c = cumulative_regret(&t, RegretKind::True).unwrap();
        assert_eq!(c.len(), 3);
        assert!((c[0] - 0.3).abs() < 1e-15 && (c[1] - 0.3).abs() < 1e-15 && (c[2] - 0.5).abs() < 1e-15);
        assert_eq!(cumulative_regret(&traj(&[0, 0], &[0.0, 0.0]), RegretKind::Biased).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn missing_true_regret_is_reported() {
        let mut t = traj(&[0], &[0.1]);
        t.outcomes[0].true_regret = None;
        assert_eq!(cumulative_regret(&t, RegretKind::True), Err(Error::NoTrueRegret));
        assert!(cumulative_regret(&t, RegretKind::Biased).is_ok());
    }

    #[test]
    fn trailing_window_is_second_half() {
        assert_eq!(trailing_window(1000), (500, 1000));
        assert_eq!(trailing_window(7), (4, 7));
        assert_eq!(trailing_window(1), (1, 1));
    }
}
