//! Arm-selection policies behind one select/update contract.
//!
//! All five policies share the same observation state: an OLS history per arm
//! and one per group. They differ only in how an exploit round turns those
//! estimates into a choice.

mod history;
mod rules;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

pub use history::{ArmHistory, GroupHistory, History, PolicyState};
pub use rules::{
    argmax_lowest, exploration_probability, interval_chain, multi_group_bound, two_group_bound, ChainRule,
};

use crate::bandit::{GroupPartition, Slate};
use crate::error::{invalid_config, invalid_input, Error, Result};
use crate::numerics::{dot, interval_halfwidth, RngStream, DEFAULT_RIDGE};

/// Noise variance assumed by every confidence width.
const SIGMA2: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    TopInterval,
    IntervalChaining,
    NaiveGroupFair,
    GroupFair,
    GroupFairMulti,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::TopInterval,
        PolicyKind::IntervalChaining,
        PolicyKind::NaiveGroupFair,
        PolicyKind::GroupFair,
        PolicyKind::GroupFairMulti,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::TopInterval => "top_interval",
            PolicyKind::IntervalChaining => "interval_chaining",
            PolicyKind::NaiveGroupFair => "naive_group_fair",
            PolicyKind::GroupFair => "group_fair",
            PolicyKind::GroupFairMulti => "group_fair_multi",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid_config!("unknown policy `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    /// Confidence parameter δ.
    pub delta: f64,
    /// Horizon T; the group widths depend on it.
    pub horizon: u64,
    pub exploration_exponent: f64,
    pub ridge: f64,
    /// Non-sensitive arms use the bare estimate `β̂·x` in the two-group rule.
    pub literal_upper_bounds: bool,
    /// Common reward centre for the multi-group rule; `None` uses the running
    /// mean of all observed rewards.
    pub rho: Option<f64>,
    pub chain: ChainRule,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            delta: 0.05,
            horizon: 1000,
            exploration_exponent: 1.0 / 3.0,
            ridge: DEFAULT_RIDGE,
            literal_upper_bounds: false,
            rho: None,
            chain: ChainRule::Transitive,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid_config!("delta must lie in (0, 1), got {}", self.delta));
        }
        if self.horizon < 1 {
            return Err(invalid_config!("horizon must be at least 1"));
        }
        if !(self.exploration_exponent > 0.0) {
            return Err(invalid_config!("exploration_exponent must be positive"));
        }
        if !(self.ridge >= 0.0) || !self.ridge.is_finite() {
            return Err(invalid_config!("ridge must be finite and nonnegative"));
        }
        if self.rho.is_some_and(|r| !r.is_finite()) {
            return Err(invalid_config!("rho must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub arm: usize,
    pub explored: bool,
    /// Per-arm optimistic values; absent on explore rounds. Arms excluded from
    /// the round's candidate set carry `-inf`.
    pub upper_bounds: Option<Vec<f64>>,
    /// Per-arm confidence half-widths `w`, when the rule used them.
    pub widths: Option<Vec<f64>>,
}

/// Estimates for one arm at one context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmEstimate {
    pub pulls: usize,
    /// `β̂·x`
    pub mean: f64,
    /// `w`
    pub width: f64,
}

/// Group-level estimate at one context. Empty groups contribute zeros.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroupEstimate {
    /// `ψ̂·x`
    pub fit: f64,
    /// `b`
    pub width: f64,
}

pub struct Policy {
    kind: PolicyKind,
    config: PolicyConfig,
    state: PolicyState,
}

impl Policy {
    pub fn new(kind: PolicyKind, config: PolicyConfig, partition: GroupPartition, dim: usize) -> Result<Self> {
        config.validate()?;
        if dim == 0 {
            return Err(invalid_config!("context dimension must be positive"));
        }
        match kind {
            PolicyKind::GroupFair if partition.groups() != 2 => {
                return Err(invalid_config!("group_fair needs exactly 2 groups, got {}", partition.groups()));
            }
            PolicyKind::GroupFairMulti if partition.groups() < 2 => {
                return Err(invalid_config!("group_fair_multi needs at least 2 groups"));
            }
            _ => {}
        }
        Ok(Self { kind, config, state: PolicyState::new(partition, dim) })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    fn arms(&self) -> usize {
        self.state.partition().arms()
    }

    pub fn update(&mut self, arm: usize, x: &[f64], reward: f64) -> Result<()> {
        self.state.update(arm, x, reward)
    }

    /// `None` for an arm that has never been pulled.
    pub fn arm_estimate(&self, arm: usize, x: &[f64], t: u64) -> Result<Option<ArmEstimate>> {
        let h = self.state.arm(arm);
        if h.is_empty() {
            return Ok(None);
        }
        let solver = h.stats().solver(self.config.ridge)?;
        let mean = dot(&solver.coefficients(), x);
        let variance = SIGMA2 * solver.quadratic_form(x)?;
        let tail = self.config.delta / (2.0 * self.arms() as f64 * t as f64);
        Ok(Some(ArmEstimate { pulls: h.len(), mean, width: interval_halfwidth(variance, tail)? }))
    }

    /// `ψ̂_j·x` and `b_j` for group `j`, with the horizon-based tail
    /// `δ / (2 (n/|P_j|) T)`.
    pub fn group_estimate(&self, group: usize, x: &[f64]) -> Result<GroupEstimate> {
        let h = self.state.group(group);
        if h.is_empty() {
            return Ok(GroupEstimate::default());
        }
        let solver = h.stats().solver(self.config.ridge)?;
        let fit = dot(&solver.coefficients(), x);
        let variance = SIGMA2 * solver.quadratic_form(x)?;
        let share = self.arms() as f64 / self.state.partition().size(group) as f64;
        let tail = self.config.delta / (2.0 * share * self.config.horizon as f64);
        Ok(GroupEstimate { fit, width: interval_halfwidth(variance, tail)? })
    }

    fn check_slate(&self, slate: &Slate, t: u64) -> Result<()> {
        if t < 1 {
            return Err(invalid_input!("rounds are numbered from 1"));
        }
        if slate.arms() != self.arms() {
            return Err(invalid_input!("slate has {} contexts for {} arms", slate.arms(), self.arms()));
        }
        if slate.contexts().iter().any(|x| x.len() != self.state.dim()) {
            return Err(invalid_input!("slate context dimension differs from {}", self.state.dim()));
        }
        Ok(())
    }

    fn explores(&self, t: u64, rng: &mut RngStream) -> Result<bool> {
        let p = exploration_probability(t, self.config.exploration_exponent)?;
        Ok(rng.uniform() < p)
    }

    fn explore(arm: usize) -> Decision {
        Decision { arm, explored: true, upper_bounds: None, widths: None }
    }

    pub fn select(&self, slate: &Slate, t: u64, rng: &mut RngStream) -> Result<Decision> {
        self.check_slate(slate, t)?;
        match self.kind {
            PolicyKind::TopInterval => self.top_interval(slate, t, rng),
            PolicyKind::IntervalChaining => self.interval_chaining(slate, t, rng),
            PolicyKind::NaiveGroupFair => self.naive_group_fair(slate, t, rng),
            PolicyKind::GroupFair => self.group_fair(slate, t, rng),
            PolicyKind::GroupFairMulti => self.group_fair_multi(slate, t, rng),
        }
    }

    /// TopInterval restricted to `candidates` (all arms when `None`).
    fn top_interval_among(
        &self,
        candidates: Option<&[usize]>,
        slate: &Slate,
        t: u64,
        rng: &mut RngStream,
    ) -> Result<Decision> {
        if self.explores(t, rng)? {
            let arm = match candidates {
                Some(c) => c[rng.index(c.len())],
                None => rng.index(self.arms()),
            };
            return Ok(Self::explore(arm));
        }
        let n = self.arms();
        let mut bounds = alloc::vec![f64::NEG_INFINITY; n];
        let mut widths = alloc::vec![f64::INFINITY; n];
        let all: Vec<usize> = (0..n).collect();
        for &i in candidates.unwrap_or(&all) {
            match self.arm_estimate(i, slate.context(i), t)? {
                Some(e) => {
                    bounds[i] = e.mean + e.width;
                    widths[i] = e.width;
                }
                None => bounds[i] = f64::INFINITY,
            }
        }
        let arm = argmax_lowest(&bounds).ok_or_else(|| invalid_input!("no candidate arms"))?;
        Ok(Decision { arm, explored: false, upper_bounds: Some(bounds), widths: Some(widths) })
    }

    fn top_interval(&self, slate: &Slate, t: u64, rng: &mut RngStream) -> Result<Decision> {
        self.top_interval_among(None, slate, t, rng)
    }

    fn interval_chaining(&self, slate: &Slate, t: u64, rng: &mut RngStream) -> Result<Decision> {
        if self.explores(t, rng)? {
            return Ok(Self::explore(rng.index(self.arms())));
        }
        let n = self.arms();
        let mut lower = alloc::vec![f64::NEG_INFINITY; n];
        let mut upper = alloc::vec![f64::INFINITY; n];
        let mut widths = alloc::vec![f64::INFINITY; n];
        let mut unpulled = None;
        for i in 0..n {
            match self.arm_estimate(i, slate.context(i), t)? {
                Some(e) => {
                    lower[i] = e.mean - e.width;
                    upper[i] = e.mean + e.width;
                    widths[i] = e.width;
                }
                None => {
                    unpulled.get_or_insert(i);
                }
            }
        }
        // cold start: pull never-observed arms in index order
        let arm = match unpulled {
            Some(i) => i,
            None => {
                let chain = interval_chain(&lower, &upper, self.config.chain);
                chain[rng.index(chain.len())]
            }
        };
        Ok(Decision { arm, explored: false, upper_bounds: Some(upper), widths: Some(widths) })
    }

    fn naive_group_fair(&self, slate: &Slate, t: u64, rng: &mut RngStream) -> Result<Decision> {
        let partition = self.state.partition();
        if partition.groups() == 1 {
            return self.top_interval_among(None, slate, t, rng);
        }
        let group = rng.index(partition.groups());
        self.top_interval_among(Some(partition.members(group)), slate, t, rng)
    }

    fn group_fair(&self, slate: &Slate, t: u64, rng: &mut RngStream) -> Result<Decision> {
        if self.explores(t, rng)? {
            return Ok(Self::explore(rng.index(self.arms())));
        }
        let partition = self.state.partition();
        let sensitive = partition.sensitive_group();
        let other = 1 - sensitive;
        let n = self.arms();
        let mut bounds = alloc::vec![f64::INFINITY; n];
        let mut widths = alloc::vec![f64::INFINITY; n];
        for i in 0..n {
            let x = slate.context(i);
            let Some(e) = self.arm_estimate(i, x, t)? else {
                continue;
            };
            widths[i] = e.width;
            bounds[i] = if partition.is_sensitive(i) {
                let s = self.group_estimate(sensitive, x)?;
                let o = self.group_estimate(other, x)?;
                two_group_bound(e.mean, e.width, s.fit, s.width, o.fit, o.width)
            } else if self.config.literal_upper_bounds {
                e.mean
            } else {
                e.mean + e.width
            };
        }
        let arm = argmax_lowest(&bounds).expect("at least one arm");
        Ok(Decision { arm, explored: false, upper_bounds: Some(bounds), widths: Some(widths) })
    }

    fn group_fair_multi(&self, slate: &Slate, t: u64, rng: &mut RngStream) -> Result<Decision> {
        if self.explores(t, rng)? {
            return Ok(Self::explore(rng.index(self.arms())));
        }
        let partition = self.state.partition();
        let rho = self.config.rho.unwrap_or_else(|| self.state.mean_reward());
        let n = self.arms();
        let mut bounds = alloc::vec![f64::INFINITY; n];
        let mut widths = alloc::vec![f64::INFINITY; n];
        for i in 0..n {
            let x = slate.context(i);
            let Some(e) = self.arm_estimate(i, x, t)? else {
                continue;
            };
            let g = self.group_estimate(partition.group_of(i), x)?;
            widths[i] = e.width;
            bounds[i] = multi_group_bound(e.mean, e.width, rho, g.fit, g.width);
        }
        let arm = argmax_lowest(&bounds).expect("at least one arm");
        Ok(Decision { arm, explored: false, upper_bounds: Some(bounds), widths: Some(widths) })
    }
}

impl fmt::Debug for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Policy")
            .field("kind", &self.kind)
            .field("config", &self.config)
            .field("pulls", &self.state.total_pulls())
            .finish()
    }
}

/// Parses a comma-separated list of policy names.
pub fn parse_policy_list(s: &str) -> Result<Vec<PolicyKind>> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(PolicyKind::from_str).collect()
}

