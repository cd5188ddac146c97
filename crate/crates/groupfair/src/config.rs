//! Experiment configuration: a TOML document merged with `key=value`
//! overrides, then deserialized with unknown keys rejected.

use std::path::{Path, PathBuf};

use groupfair_core::policy::ChainRule;
use groupfair_core::{BiasSign, CoefficientLayout, PolicyConfig, PolicyKind, SyntheticConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    /// Seeds `0..count`.
    Count(u64),
    List(Vec<u64>),
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::Count(k) => (0..*k).collect(),
            SeedSpec::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSection {
    pub arms: usize,
    pub dim: usize,
    /// Size of the sensitive group when `group_sizes` is not given.
    pub sensitive: usize,
    pub group_sizes: Option<Vec<usize>>,
    pub sensitive_group: usize,
    pub coef_max: f64,
    pub bias_mean: f64,
    pub bias_sign: BiasSign,
    pub noise: bool,
    pub layout: CoefficientLayout,
    pub recenter: bool,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        let d = SyntheticConfig::default();
        Self {
            arms: d.arms,
            dim: d.dim,
            sensitive: 5,
            group_sizes: None,
            sensitive_group: 0,
            coef_max: d.coef_max,
            bias_mean: d.bias_mean,
            bias_sign: d.bias_sign,
            noise: d.noise,
            layout: d.layout,
            recenter: d.recenter,
        }
    }
}

impl SyntheticSection {
    pub fn to_config(&self) -> SyntheticConfig {
        let group_sizes = self
            .group_sizes
            .clone()
            .unwrap_or_else(|| vec![self.sensitive, self.arms.saturating_sub(self.sensitive)]);
        SyntheticConfig {
            arms: self.arms,
            dim: self.dim,
            group_sizes,
            sensitive_group: self.sensitive_group,
            coef_max: self.coef_max,
            bias_mean: self.bias_mean,
            bias_sign: self.bias_sign,
            noise: self.noise,
            layout: self.layout,
            recenter: self.recenter,
        }
    }
}

/// Policy parameters; the horizon comes from the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySection {
    pub delta: f64,
    pub exploration_exponent: f64,
    pub ridge: f64,
    pub literal_upper_bounds: bool,
    pub rho: Option<f64>,
    pub chain: ChainRule,
}

impl Default for PolicySection {
    fn default() -> Self {
        let d = PolicyConfig::default();
        Self {
            delta: d.delta,
            exploration_exponent: d.exploration_exponent,
            ridge: d.ridge,
            literal_upper_bounds: d.literal_upper_bounds,
            rho: d.rho,
            chain: d.chain,
        }
    }
}

impl PolicySection {
    pub fn to_config(&self, horizon: u64) -> PolicyConfig {
        PolicyConfig {
            delta: self.delta,
            horizon,
            exploration_exponent: self.exploration_exponent,
            ridge: self.ridge,
            literal_upper_bounds: self.literal_upper_bounds,
            rho: self.rho,
            chain: self.chain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Horizon,
    Arms,
    BiasMean,
    Sensitive,
    CoefMax,
    Dim,
    Delta,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Horizon => "horizon",
            SweepParam::Arms => "arms",
            SweepParam::BiasMean => "bias_mean",
            SweepParam::Sensitive => "sensitive",
            SweepParam::CoefMax => "coef_max",
            SweepParam::Dim => "dim",
            SweepParam::Delta => "delta",
        }
    }

    /// Writes `value` into the matching field of `config`.
    pub fn apply(self, config: &mut ExperimentConfig, value: f64) -> Result<()> {
        let integral = || -> Result<u64> {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as u64)
            } else {
                Err(Error::Config(format!("{} needs a nonnegative integer, got {value}", self.name())))
            }
        };
        match self {
            SweepParam::Horizon => config.horizon = integral()?,
            SweepParam::Arms => config.synthetic.arms = integral()? as usize,
            SweepParam::Sensitive => config.synthetic.sensitive = integral()? as usize,
            SweepParam::Dim => config.synthetic.dim = integral()? as usize,
            SweepParam::BiasMean => config.synthetic.bias_mean = value,
            SweepParam::CoefMax => config.synthetic.coef_max = value,
            SweepParam::Delta => config.policy.delta = value,
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub path: PathBuf,
    pub schema: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Label written to the `preset` column of summaries.
    pub name: String,
    pub preset: Option<String>,
    pub horizon: u64,
    pub seeds: SeedSpec,
    pub policies: Vec<PolicyKind>,
    /// Worker threads; 0 uses every logical core. Not echoed into outputs,
    /// since results do not depend on it.
    #[serde(skip_serializing)]
    pub jobs: usize,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub synthetic: SyntheticSection,
    pub policy: PolicySection,
    pub sweep: Option<SweepSection>,
    pub dataset: Option<DatasetSection>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            preset: None,
            horizon: 1000,
            seeds: SeedSpec::Count(20),
            policies: vec![PolicyKind::TopInterval, PolicyKind::IntervalChaining, PolicyKind::GroupFair],
            jobs: 0,
            out: None,
            synthetic: SyntheticSection::default(),
            policy: PolicySection::default(),
            sweep: None,
            dataset: None,
        }
    }
}

impl ExperimentConfig {
    pub fn seeds(&self) -> Vec<u64> {
        self.seeds.seeds()
    }

    pub fn synthetic_config(&self) -> SyntheticConfig {
        self.synthetic.to_config()
    }

    pub fn policy_config(&self) -> PolicyConfig {
        self.policy.to_config(self.horizon)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds().is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("no policies configured".into()));
        }
        if self.dataset.is_none() {
            self.synthetic_config().validate()?;
        }
        self.policy_config().validate()?;
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::Config("sweep has no values".into()));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// A config document before deserialization, so overrides can be layered on.
#[derive(Debug, Clone, Default)]
pub struct ConfigDocument {
    table: toml::Table,
    base_dir: Option<PathBuf>,
}

impl ConfigDocument {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(Self { table, base_dir: path.parent().map(Path::to_path_buf) })
    }

    pub fn from_table(table: toml::Table) -> Self {
        Self { table, base_dir: None }
    }

    /// A top-level string value, if present.
    pub fn get_str(&self, key: &str) -> Option<String> {
        self.table.get(key).and_then(|v| v.as_str()).map(str::to_string)
    }

    /// Sets a dotted key, creating intermediate tables.
    pub fn set(&mut self, key: &str, value: toml::Value) -> Result<()> {
        let mut parts: Vec<&str> = key.split('.').collect();
        let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| Error::Config(format!("bad key `{key}`")))?;
        let mut table = &mut self.table;
        for p in parts {
            let entry = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table = entry.as_table_mut().ok_or_else(|| Error::Config(format!("`{p}` in `{key}` is not a table")))?;
        }
        table.insert(last.to_string(), value);
        Ok(())
    }

    /// Applies a `key=value` override. The value is read as a TOML literal,
    /// falling back to a bare string.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        let raw = raw.trim();
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        self.set(key.trim(), value)
    }

    pub fn resolve(self) -> Result<ExperimentConfig> {
        let mut cfg: ExperimentConfig =
            toml::Value::Table(self.table).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let (Some(base), Some(ds)) = (&self.base_dir, cfg.dataset.as_mut()) {
            if ds.path.is_relative() {
                ds.path = base.join(&ds.path);
            }
            if ds.schema.is_relative() {
                ds.schema = base.join(&ds.schema);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
