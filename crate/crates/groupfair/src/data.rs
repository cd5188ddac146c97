//! CSV datasets as bandit environments.
//!
//! Arms are the cross product of a sensitive attribute and a bucketed
//! attribute. Every other column (minus exclusions and the reward) becomes a
//! context feature. Each round draws one row per arm, with replacement.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use groupfair_core::env::{Environment, Regrets, Round};
use groupfair_core::{GroupPartition, RngStream, Slate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Matches every sensitive value not listed explicitly.
pub const CATCH_ALL: &str = "*";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Buckets {
    /// Half-open numeric intervals `(lo, hi]`.
    Ranges(Vec<(f64, f64)>),
    /// Exact category labels.
    Labels(Vec<String>),
}

impl Buckets {
    fn len(&self) -> usize {
        match self {
            Buckets::Ranges(r) => r.len(),
            Buckets::Labels(l) => l.len(),
        }
    }

    fn label(&self, i: usize) -> String {
        match self {
            Buckets::Ranges(r) => format!("({}, {}]", r[i].0, r[i].1),
            Buckets::Labels(l) => l[i].clone(),
        }
    }

    /// `Ok(None)` when the value falls outside every bucket, `Err` when it
    /// does not parse.
    fn locate(&self, raw: &str) -> std::result::Result<Option<usize>, ()> {
        match self {
            Buckets::Ranges(ranges) => {
                let v: f64 = raw.parse().map_err(|_| ())?;
                Ok(ranges.iter().position(|&(lo, hi)| v > lo && v <= hi))
            }
            Buckets::Labels(labels) => Ok(labels.iter().position(|l| l == raw)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardOrientation {
    /// The column value is the reward.
    #[default]
    AsIs,
    /// Smaller column values are better; the reward is negated.
    Reversed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSchema {
    pub sensitive_column: String,
    /// The first value designates the sensitive group.
    pub sensitive_values: Vec<String>,
    pub bucket_column: String,
    pub buckets: Buckets,
    pub reward_column: String,
    #[serde(default)]
    pub nominal_columns: Vec<String>,
    #[serde(default)]
    pub exclude: Vec<String>,
    #[serde(default = "yes")]
    pub normalize_reward: bool,
    #[serde(default)]
    pub reward_orientation: RewardOrientation,
}

fn yes() -> bool {
    true
}

impl DatasetSchema {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let schema: Self = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sensitive_values.len() < 2 {
            return Err(Error::Config("a schema needs at least two sensitive values".into()));
        }
        if self.buckets.len() == 0 {
            return Err(Error::Config("a schema needs at least one bucket".into()));
        }
        if let Buckets::Ranges(r) = &self.buckets {
            if r.iter().any(|(lo, hi)| !(lo < hi)) || r.windows(2).any(|w| w[0].1 > w[1].0) {
                return Err(Error::Config("buckets must be ordered, disjoint and nonempty".into()));
            }
        }
        if self.sensitive_values.iter().skip(1).take(self.sensitive_values.len() - 2).any(|v| v == CATCH_ALL)
            || self.sensitive_values[0] == CATCH_ALL
        {
            return Err(Error::Config(format!("`{CATCH_ALL}` may only be the last sensitive value")));
        }
        let special = [&self.sensitive_column, &self.bucket_column, &self.reward_column];
        if self.nominal_columns.iter().any(|c| special.contains(&c)) {
            return Err(Error::Config("nominal_columns may only name context columns".into()));
        }
        Ok(())
    }

    fn group_of(&self, value: &str) -> Option<usize> {
        self.sensitive_values
            .iter()
            .position(|v| v == value)
            .or_else(|| self.sensitive_values.iter().position(|v| v == CATCH_ALL))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub total_rows: usize,
    pub retained_rows: usize,
    pub dropped_missing: usize,
    pub dropped_out_of_bucket: usize,
    pub dropped_unknown_sensitive: usize,
    pub context_columns: Vec<String>,
    pub nominal_columns: Vec<String>,
    pub pool_sizes: Vec<(String, usize)>,
}

impl fmt::Display for LoadReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "rows: {} read, {} kept, {} missing values, {} outside buckets, {} unknown sensitive value",
            self.total_rows,
            self.retained_rows,
            self.dropped_missing,
            self.dropped_out_of_bucket,
            self.dropped_unknown_sensitive
        )?;
        for (arm, size) in &self.pool_sizes {
            writeln!(f, "  {arm}: {size}")?;
        }
        Ok(())
    }
}

/// A loaded dataset: encoded contexts and rewards grouped into per-arm pools.
#[derive(Debug, Clone)]
pub struct DatasetEnvironment {
    partition: GroupPartition,
    dim: usize,
    contexts: Vec<Vec<f64>>,
    rewards: Vec<f64>,
    pools: Vec<Vec<usize>>,
    arm_labels: Vec<String>,
    report: LoadReport,
}

fn is_missing(v: &str) -> bool {
    let v = v.trim();
    v.is_empty() || ["na", "nan", "null", "?"].iter().any(|m| v.eq_ignore_ascii_case(m))
}

fn min_max(values: &mut [f64]) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    for v in values.iter_mut() {
        *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
    }
}

/// Reads `path` and builds the arm pools described by `schema`.
pub fn load_dataset(path: &Path, schema: &DatasetSchema) -> Result<DatasetEnvironment> {
    schema.validate()?;
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("{}: missing column `{name}`", path.display())))
    };
    let sens_col = column(&schema.sensitive_column)?;
    let bucket_col = column(&schema.bucket_column)?;
    let reward_col = column(&schema.reward_column)?;
    for c in schema.nominal_columns.iter().chain(&schema.exclude) {
        column(c)?;
    }
    let context_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| i != sens_col && i != bucket_col && i != reward_col && !schema.exclude.contains(&headers[i]))
        .collect();
    if context_cols.is_empty() {
        return Err(Error::Data("no context columns remain after exclusions".into()));
    }

    let n_buckets = schema.buckets.len();
    let mut report = LoadReport::default();
    let mut raw_contexts: Vec<Vec<String>> = Vec::new();
    let mut rewards = Vec::new();
    let mut arm_of_row = Vec::new();
    for record in reader.records() {
        let record = record?;
        report.total_rows += 1;
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let used = [sens_col, bucket_col, reward_col].into_iter().chain(context_cols.iter().copied());
        if used.clone().any(|i| is_missing(field(i))) {
            report.dropped_missing += 1;
            continue;
        }
        let Some(group) = schema.group_of(field(sens_col)) else {
            report.dropped_unknown_sensitive += 1;
            continue;
        };
        let bucket = match schema.buckets.locate(field(bucket_col)) {
            Ok(Some(b)) => b,
            Ok(None) => {
                report.dropped_out_of_bucket += 1;
                continue;
            }
            Err(()) => {
                report.dropped_missing += 1;
                continue;
            }
        };
        let Ok(reward) = field(reward_col).parse::<f64>() else {
            report.dropped_missing += 1;
            continue;
        };
        raw_contexts.push(context_cols.iter().map(|&i| field(i).to_string()).collect());
        rewards.push(reward);
        arm_of_row.push(group * n_buckets + bucket);
    }
    report.retained_rows = rewards.len();

    // Encode columns: nominal ones by first-appearance order, then min-max.
    let dim = context_cols.len();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for (j, &ci) in context_cols.iter().enumerate() {
        let name = &headers[ci];
        let numeric: Option<Vec<f64>> = if schema.nominal_columns.contains(name) {
            None
        } else {
            raw_contexts.iter().map(|r| r[j].parse::<f64>().ok()).collect()
        };
        let mut col = match numeric {
            Some(values) => values,
            None => {
                report.nominal_columns.push(name.clone());
                let mut codes: HashMap<&str, usize> = HashMap::new();
                raw_contexts
                    .iter()
                    .map(|r| {
                        let next = codes.len();
                        *codes.entry(r[j].as_str()).or_insert(next) as f64
                    })
                    .collect()
            }
        };
        min_max(&mut col);
        columns.push(col);
        report.context_columns.push(name.clone());
    }
    let scale = 1.0 / (dim as f64).sqrt();
    let contexts: Vec<Vec<f64>> =
        (0..rewards.len()).map(|r| columns.iter().map(|c| c[r] * scale).collect()).collect();

    if schema.reward_orientation == RewardOrientation::Reversed {
        rewards.iter_mut().for_each(|r| *r = -*r);
    }
    if schema.normalize_reward {
        min_max(&mut rewards);
    }

    let n_arms = schema.sensitive_values.len() * n_buckets;
    let mut pools = vec![Vec::new(); n_arms];
    for (row, &arm) in arm_of_row.iter().enumerate() {
        pools[arm].push(row);
    }
    let arm_labels: Vec<String> = (0..n_arms)
        .map(|a| format!("{} {}", schema.sensitive_values[a / n_buckets], schema.buckets.label(a % n_buckets)))
        .collect();
    report.pool_sizes = arm_labels.iter().cloned().zip(pools.iter().map(Vec::len)).collect();
    if let Some(a) = pools.iter().position(Vec::is_empty) {
        return Err(Error::Data(format!("arm {a} ({}) has no rows", arm_labels[a])));
    }
    let assignment = (0..n_arms).map(|a| a / n_buckets).collect();
    let partition = GroupPartition::new(assignment, schema.sensitive_values.len(), 0)?;
    Ok(DatasetEnvironment { partition, dim, contexts, rewards, pools, arm_labels, report })
}

impl DatasetEnvironment {
    pub fn report(&self) -> &LoadReport {
        &self.report
    }

    pub fn arm_labels(&self) -> &[String] {
        &self.arm_labels
    }

    pub fn pool(&self, arm: usize) -> &[usize] {
        &self.pools[arm]
    }

    pub fn row_context(&self, row: usize) -> &[f64] {
        &self.contexts[row]
    }

    pub fn row_reward(&self, row: usize) -> f64 {
        self.rewards[row]
    }

    /// Rows drawn for round `t`, one per arm.
    pub fn draw_rows(&self, rng: &mut RngStream) -> Vec<usize> {
        self.pools.iter().map(|p| p[rng.index(p.len())]).collect()
    }

    /// The slate for round `t` and the reward each arm would pay.
    pub fn dataset_round(&self, t: u64, rng: &mut RngStream) -> Round {
        let rows = self.draw_rows(rng);
        let slate = Slate::new(t, rows.iter().map(|&r| self.contexts[r].clone()).collect());
        Round { slate, payoffs: Some(rows.iter().map(|&r| self.rewards[r]).collect()) }
    }
}

impl Environment for DatasetEnvironment {
    fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn draw_round(&self, t: u64, rng: &mut RngStream) -> Round {
        self.dataset_round(t, rng)
    }

    fn pull(&self, round: &Round, arm: usize, _rng: &mut RngStream) -> f64 {
        round.payoffs.as_ref().expect("dataset rounds carry payoffs")[arm]
    }

    /// Only the biased regret exists: the drawn rows' rewards are all there is.
    fn regrets(&self, round: &Round, arm: usize) -> Regrets {
        let payoffs = round.payoffs.as_ref().expect("dataset rounds carry payoffs");
        let best = payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Regrets { true_regret: None, biased: best - payoffs[arm] }
    }
}
