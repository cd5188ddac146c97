use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{GroupPartition, Slate};
use crate::env::{Environment, Regrets, Round};
use crate::error::{invalid_config, invalid_input, Result};
use crate::numerics::{dot, RngStream};

/// Direction in which the societal bias shifts observed rewards of the
/// sensitive group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum BiasSign {
    /// Sensitive-group observed rewards are depressed.
    #[default]
    Negative,
    Positive,
}

impl BiasSign {
    pub fn value(self) -> f64 {
        match self {
            BiasSign::Negative => -1.0,
            BiasSign::Positive => 1.0,
        }
    }
}

impl TryFrom<i8> for BiasSign {
    type Error = crate::Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(BiasSign::Negative),
            1 => Ok(BiasSign::Positive),
            other => Err(invalid_config!("bias_sign must be -1 or 1, got {other}")),
        }
    }
}

impl From<BiasSign> for i8 {
    fn from(s: BiasSign) -> i8 {
        match s {
            BiasSign::Negative => -1,
            BiasSign::Positive => 1,
        }
    }
}

/// How true coefficient vectors are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientLayout {
    /// Every component ~ Uniform(0, c).
    #[default]
    Uniform,
    /// Sensitive components ~ Uniform(0, c/2), all others ~ Uniform(c/2, c), so
    /// every non-sensitive arm dominates every sensitive arm componentwise.
    Dominated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub arms: usize,
    pub dim: usize,
    pub group_sizes: Vec<usize>,
    pub sensitive_group: usize,
    /// Upper end `c` of the coefficient range `[0, c]`.
    pub coef_max: f64,
    /// Mean `μ` of each sensitive bias component.
    pub bias_mean: f64,
    pub bias_sign: BiasSign,
    pub noise: bool,
    pub layout: CoefficientLayout,
    /// Shift coefficients so every group has the same mean coefficient vector.
    pub recenter: bool,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            arms: 10,
            dim: 2,
            group_sizes: alloc::vec![5, 5],
            sensitive_group: 0,
            coef_max: 10.0,
            bias_mean: 10.0,
            bias_sign: BiasSign::Negative,
            noise: true,
            layout: CoefficientLayout::Uniform,
            recenter: false,
        }
    }
}

impl SyntheticConfig {
    /// Two groups, the first `sensitive` arms being the sensitive group.
    pub fn two_group(arms: usize, sensitive: usize) -> Self {
        Self { arms, group_sizes: alloc::vec![sensitive, arms.saturating_sub(sensitive)], ..Self::default() }
    }

    pub fn partition(&self) -> Result<GroupPartition> {
        let total: usize = self.group_sizes.iter().sum();
        if total != self.arms {
            return Err(invalid_config!("group sizes {:?} sum to {total}, not {} arms", self.group_sizes, self.arms));
        }
        GroupPartition::contiguous(&self.group_sizes, self.sensitive_group)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arms == 0 || self.dim == 0 {
            return Err(invalid_config!("arms and dim must be positive"));
        }
        if !(self.coef_max > 0.0) || !self.coef_max.is_finite() {
            return Err(invalid_config!("coef_max must be positive, got {}", self.coef_max));
        }
        if !(self.bias_mean >= 0.0) || !self.bias_mean.is_finite() {
            return Err(invalid_config!("bias_mean must be nonnegative, got {}", self.bias_mean));
        }
        self.partition().map(|_| ())
    }
}

/// Ground truth of a linear bandit with group-level bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct BanditInstance {
    dim: usize,
    betas: Vec<Vec<f64>>,
    psis: Vec<Vec<f64>>,
    partition: GroupPartition,
    bias_sign: BiasSign,
    noise: bool,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    n: usize,
    d: usize,
    betas: Vec<Vec<f64>>,
    psis: Vec<Vec<f64>>,
    partition: GroupPartition,
    bias_sign: BiasSign,
    #[serde(default = "default_true")]
    noise: bool,
}

fn default_true() -> bool {
    true
}

impl TryFrom<InstanceRepr> for BanditInstance {
    type Error = crate::Error;

    fn try_from(r: InstanceRepr) -> Result<Self> {
        if r.n != r.betas.len() {
            return Err(invalid_config!("n = {} but {} coefficient vectors", r.n, r.betas.len()));
        }
        let inst = Self::new(r.betas, r.psis, r.partition, r.bias_sign, r.noise)?;
        if inst.dim != r.d {
            return Err(invalid_config!("d = {} but vectors have dimension {}", r.d, inst.dim));
        }
        Ok(inst)
    }
}

impl From<BanditInstance> for InstanceRepr {
    fn from(i: BanditInstance) -> Self {
        Self {
            n: i.betas.len(),
            d: i.dim,
            betas: i.betas,
            psis: i.psis,
            partition: i.partition,
            bias_sign: i.bias_sign,
            noise: i.noise,
        }
    }
}

impl BanditInstance {
    pub fn new(
        betas: Vec<Vec<f64>>,
        psis: Vec<Vec<f64>>,
        partition: GroupPartition,
        bias_sign: BiasSign,
        noise: bool,
    ) -> Result<Self> {
        let dim = betas.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(invalid_config!("an instance needs at least one arm of positive dimension"));
        }
        if betas.len() != partition.arms() {
            return Err(invalid_config!("{} coefficient vectors for {} arms", betas.len(), partition.arms()));
        }
        if psis.len() != partition.groups() {
            return Err(invalid_config!("{} bias vectors for {} groups", psis.len(), partition.groups()));
        }
        if betas.iter().chain(&psis).any(|v| v.len() != dim) {
            return Err(invalid_config!("all coefficient and bias vectors must have dimension {dim}"));
        }
        if partition.groups() == 2 {
            let other = 1 - partition.sensitive_group();
            if psis[other].iter().any(|&v| v != 0.0) {
                return Err(invalid_config!("the non-sensitive group must have a zero bias vector"));
            }
        }
        Ok(Self { dim, betas, psis, partition, bias_sign, noise })
    }

    /// Draws coefficients and the sensitive-group bias for `config`.
    pub fn generate(config: &SyntheticConfig, rng: &mut RngStream) -> Result<Self> {
        config.validate()?;
        let partition = config.partition()?;
        let c = config.coef_max;
        let betas = (0..config.arms)
            .map(|arm| {
                let (lo, width) = match config.layout {
                    CoefficientLayout::Uniform => (0.0, c),
                    CoefficientLayout::Dominated if partition.is_sensitive(arm) => (0.0, 0.5 * c),
                    CoefficientLayout::Dominated => (0.5 * c, 0.5 * c),
                };
                (0..config.dim).map(|_| lo + width * rng.uniform()).collect()
            })
            .collect();
        let psis = (0..partition.groups())
            .map(|g| {
                if g == partition.sensitive_group() {
                    (0..config.dim).map(|_| 2.0 * config.bias_mean * rng.uniform()).collect()
                } else {
                    alloc::vec![0.0; config.dim]
                }
            })
            .collect();
        let mut inst = Self::new(betas, psis, partition, config.bias_sign, config.noise)?;
        if config.recenter {
            inst.recenter_group_means();
        }
        Ok(inst)
    }

    /// Shifts every arm's coefficients by the gap between the overall mean
    /// coefficient vector and its group's mean, equalizing group mean rewards.
    pub fn recenter_group_means(&mut self) {
        let n = self.betas.len() as f64;
        let overall: Vec<f64> =
            (0..self.dim).map(|k| self.betas.iter().map(|b| b[k]).sum::<f64>() / n).collect();
        for g in 0..self.partition.groups() {
            let members = self.partition.members(g).to_vec();
            let size = members.len() as f64;
            let shift: Vec<f64> = (0..self.dim)
                .map(|k| overall[k] - members.iter().map(|&i| self.betas[i][k]).sum::<f64>() / size)
                .collect();
            for &i in &members {
                for (b, s) in self.betas[i].iter_mut().zip(&shift) {
                    *b += s;
                }
            }
        }
    }

    pub fn arms(&self) -> usize {
        self.betas.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn betas(&self) -> &[Vec<f64>] {
        &self.betas
    }

    pub fn psis(&self) -> &[Vec<f64>] {
        &self.psis
    }

    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    pub fn bias_sign(&self) -> BiasSign {
        self.bias_sign
    }

    pub fn noise_enabled(&self) -> bool {
        self.noise
    }

    pub fn set_noise(&mut self, on: bool) {
        self.noise = on;
    }

    /// Contexts with components ~ Uniform(0, 1/√d), so `‖x‖ ≤ 1`.
    pub fn sample_slate(&self, t: u64, rng: &mut RngStream) -> Slate {
        Slate::sample_uniform(t, self.arms(), self.dim, rng)
    }

    /// `β_arm · x`.
    pub fn true_reward(&self, arm: usize, x: &[f64]) -> f64 {
        dot(&self.betas[arm], x)
    }

    /// Noise-free observed reward: `β_arm · x + sign · ψ_group(arm) · x`.
    pub fn biased_mean(&self, arm: usize, x: &[f64]) -> f64 {
        let g = self.partition.group_of(arm);
        self.true_reward(arm, x) + self.bias_sign.value() * dot(&self.psis[g], x)
    }

    pub fn observed_reward(&self, arm: usize, x: &[f64], rng: &mut RngStream) -> f64 {
        let mean = self.biased_mean(arm, x);
        if self.noise {
            mean + rng.standard_normal()
        } else {
            mean
        }
    }

    /// `(true regret, biased regret)` of pulling `chosen` on `slate`.
    pub fn round_regrets(&self, slate: &Slate, chosen: usize) -> Result<(f64, f64)> {
        if chosen >= self.arms() || slate.arms() != self.arms() {
            return Err(invalid_input!("arm {chosen} / slate of {} arms for {} arms", slate.arms(), self.arms()));
        }
        let gap = |f: &dyn Fn(usize, &[f64]) -> f64| {
            let best = (0..self.arms()).map(|i| f(i, slate.context(i))).fold(f64::NEG_INFINITY, f64::max);
            best - f(chosen, slate.context(chosen))
        };
        Ok((gap(&|i, x| self.true_reward(i, x)), gap(&|i, x| self.biased_mean(i, x))))
    }
}

impl Environment for BanditInstance {
    fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn draw_round(&self, t: u64, rng: &mut RngStream) -> Round {
        Round { slate: self.sample_slate(t, rng), payoffs: None }
    }

    fn pull(&self, round: &Round, arm: usize, rng: &mut RngStream) -> f64 {
        self.observed_reward(arm, round.slate.context(arm), rng)
    }

    fn regrets(&self, round: &Round, arm: usize) -> Regrets {
        let (true_regret, biased) =
            self.round_regrets(&round.slate, arm).expect("slate drawn from this instance");
        Regrets { true_regret: Some(true_regret), biased }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Purpose, StreamId};
    use alloc::vec;

    fn two_arm(psi: Vec<f64>, sign: BiasSign) -> BanditInstance {
        let p = GroupPartition::two_group(2, 1).unwrap();
        BanditInstance::new(vec![vec![1.0, 2.0], vec![1.0, 2.0]], vec![psi, vec![0.0, 0.0]], p, sign, false)
            .unwrap()
    }

    fn rng(i: u64) -> RngStream {
        RngStream::new(9, StreamId::new(i, Purpose::Instance))
    }

    #[test]
    fn observed_reward_by_hand() {
        let inst = two_arm(vec![4.0, 0.0], BiasSign::Negative);
        let x = [0.5, 0.25];
        // arm 1 is non-sensitive
        assert_eq!(inst.observed_reward(1, &x, &mut rng(0)), 1.0);
        assert_eq!(inst.observed_reward(0, &x, &mut rng(0)), -1.0);
        assert_eq!(inst.true_reward(0, &x), 1.0);
        let plus = two_arm(vec![4.0, 0.0], BiasSign::Positive);
        assert_eq!(plus.observed_reward(0, &x, &mut rng(0)), 3.0);
    }

    #[test]
    fn zero_bias_matches_true_reward() {
        let inst = two_arm(vec![0.0, 0.0], BiasSign::Negative);
        for arm in 0..2 {
            assert_eq!(inst.observed_reward(arm, &[0.3, 0.9], &mut rng(1)), inst.true_reward(arm, &[0.3, 0.9]));
        }
        assert_eq!(inst.true_reward(0, &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn regrets_by_hand() {
        let p = GroupPartition::two_group(2, 1).unwrap();
        let inst = BanditInstance::new(
            vec![vec![1.0], vec![0.7]],
            vec![vec![0.0], vec![0.0]],
            p,
            BiasSign::Negative,
            false,
        )
        .unwrap();
        let slate = Slate::new(1, vec![vec![1.0], vec![1.0]]);
        let (tr, br) = inst.round_regrets(&slate, 1).unwrap();
        assert!((tr - 0.3).abs() < 1e-15 && tr == br);
        assert_eq!(inst.round_regrets(&slate, 0).unwrap(), (0.0, 0.0));
        assert!(inst.round_regrets(&slate, 2).is_err());
    }

    #[test]
    fn generation_respects_ranges() {
        let cfg = SyntheticConfig { bias_mean: 0.0, ..SyntheticConfig::default() };
        let inst = BanditInstance::generate(&cfg, &mut rng(2)).unwrap();
        assert!(inst.psis().iter().all(|p| p.iter().all(|&v| v == 0.0)));
        assert!(inst.betas().iter().flatten().all(|&b| (0.0..=10.0).contains(&b)));
        assert_eq!(inst.arms(), 10);
    }

    #[test]
    fn generation_rejects_bad_group_sizes() {
        let cfg = SyntheticConfig { group_sizes: vec![5, 4], ..SyntheticConfig::default() };
        assert!(matches!(BanditInstance::generate(&cfg, &mut rng(3)), Err(crate::Error::InvalidConfig(_))));
    }

    #[test]
    fn dominated_layout_dominates() {
        let cfg = SyntheticConfig { layout: CoefficientLayout::Dominated, ..SyntheticConfig::default() };
        let inst = BanditInstance::generate(&cfg, &mut rng(4)).unwrap();
        for &s in inst.partition().members(0) {
            for &o in inst.partition().members(1) {
                assert!(inst.betas()[s].iter().zip(&inst.betas()[o]).all(|(a, b)| a < b));
            }
        }
    }

    #[test]
    fn recentering_equalizes_group_means() {
        let cfg = SyntheticConfig { recenter: true, ..SyntheticConfig::default() };
        let inst = BanditInstance::generate(&cfg, &mut rng(5)).unwrap();
        let mean = |g: usize, k: usize| {
            let m = inst.partition().members(g);
            m.iter().map(|&i| inst.betas()[i][k]).sum::<f64>() / m.len() as f64
        };
        for k in 0..2 {
            assert!((mean(0, k) - mean(1, k)).abs() < 1e-12);
        }
    }

    #[test]
    fn non_sensitive_bias_must_be_zero() {
        let p = GroupPartition::two_group(2, 1).unwrap();
        let r = BanditInstance::new(
            vec![vec![1.0], vec![1.0]],
            vec![vec![0.0], vec![1.0]],
            p,
            BiasSign::Negative,
            false,
        );
        assert!(r.is_err());
    }
}
