//! Grids of (config, policy, seed) cells, run in parallel and summarized.

use groupfair_core::env::Environment;
use groupfair_core::{
    cumulative_regret, run_trial, sensitive_pull_fraction, trailing_window, BanditInstance, GroupPartition, Policy,
    PolicyKind, Purpose, RegretKind, RngStream, StreamId, Trajectory,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SweepParam};
use crate::data::DatasetEnvironment;
use crate::error::{Error, Result};

/// Number of evenly spaced rounds at which regret curves are sampled.
pub const CURVE_POINTS: u64 = 10;

#[derive(Debug, Clone)]
pub struct GridPoint {
    pub swept_param: Option<SweepParam>,
    pub swept_value: Option<f64>,
    pub config: ExperimentConfig,
    pub partition: GroupPartition,
}

impl GridPoint {
    pub fn run_id(&self) -> String {
        match (self.swept_param, self.swept_value) {
            (Some(p), Some(v)) => format!("{}:{}={}", self.config.name, p.name(), crate::output::fmt_real(v)),
            _ => self.config.name.clone(),
        }
    }
}

/// Expands the sweep section of `config` into validated grid points. Without a
/// sweep the config itself is the only point.
pub fn build_grid(config: &ExperimentConfig, dataset: Option<&DatasetEnvironment>) -> Result<Vec<GridPoint>> {
    let partition_for = |cfg: &ExperimentConfig| -> Result<GroupPartition> {
        match dataset {
            Some(env) => Ok(env.partition().clone()),
            None => Ok(cfg.synthetic_config().partition()?),
        }
    };
    let Some(sweep) = &config.sweep else {
        config.validate()?;
        return Ok(vec![GridPoint {
            swept_param: None,
            swept_value: None,
            config: config.clone(),
            partition: partition_for(config)?,
        }]);
    };
    if dataset.is_some() && !matches!(sweep.param, SweepParam::Horizon | SweepParam::Delta) {
        return Err(Error::Config(format!("sweeping `{}` has no effect in dataset mode", sweep.param.name())));
    }
    sweep
        .values
        .iter()
        .map(|&v| {
            let mut cfg = config.clone();
            sweep.param.apply(&mut cfg, v)?;
            cfg.validate()
                .map_err(|e| Error::Cell { cell: format!("{}={v}", sweep.param.name()), source: Box::new(e) })?;
            let partition = partition_for(&cfg)?;
            Ok(GridPoint { swept_param: Some(sweep.param), swept_value: Some(v), config: cfg, partition })
        })
        .collect()
}

/// The instance every policy at `seed` plays against.
pub fn cell_instance(config: &ExperimentConfig, seed: u64) -> Result<BanditInstance> {
    let mut rng = RngStream::new(seed, StreamId::new(0, Purpose::Instance));
    Ok(BanditInstance::generate(&config.synthetic_config(), &mut rng)?)
}

#[derive(Debug, Clone)]
pub struct CellRun {
    pub point: usize,
    pub policy: PolicyKind,
    pub seed: u64,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub preset: String,
    pub swept_param: Option<SweepParam>,
    pub swept_value: Option<f64>,
    pub policy: PolicyKind,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub points: Vec<GridPoint>,
    /// Ordered by point, then policy, then seed.
    pub cells: Vec<CellRun>,
    pub summary: Vec<SummaryRow>,
    pub dataset_mode: bool,
}

impl SweepOutput {
    pub fn cells_for(&self, point: usize, policy: PolicyKind) -> impl Iterator<Item = &CellRun> {
        self.cells.iter().filter(move |c| c.point == point && c.policy == policy)
    }

    /// The summary value of `metric` for one (point, policy) pair.
    pub fn metric(&self, point: usize, policy: PolicyKind, metric: &str) -> Option<&SummaryRow> {
        let p = &self.points[point];
        self.summary.iter().find(|r| {
            r.policy == policy && r.metric == metric && r.swept_value == p.swept_value && r.swept_param == p.swept_param
        })
    }
}

fn run_cell(point: &GridPoint, policy: PolicyKind, seed: u64, dataset: Option<&DatasetEnvironment>) -> Result<Trajectory> {
    let cfg = &point.config;
    let instance;
    let env: &dyn Environment = match dataset {
        Some(d) => d,
        None => {
            instance = cell_instance(cfg, seed)?;
            &instance
        }
    };
    let mut p = Policy::new(policy, cfg.policy_config(), env.partition().clone(), env.dim())?;
    Ok(run_trial(env, &mut p, cfg.horizon, seed)?)
}

/// Runs every cell of `config`'s grid on a pool of `config.jobs` threads.
/// Results do not depend on the thread count.
pub fn run_sweep(config: &ExperimentConfig, dataset: Option<&DatasetEnvironment>) -> Result<SweepOutput> {
    let points = build_grid(config, dataset)?;
    let seeds = config.seeds();
    let jobs: Vec<(usize, PolicyKind, u64)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, pt)| {
            let seeds = &seeds;
            pt.config.policies.iter().flat_map(move |&k| seeds.iter().map(move |&s| (i, k, s)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let cells: Vec<CellRun> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, policy, seed)| {
                run_cell(&points[i], policy, seed, dataset)
                    .map(|trajectory| CellRun { point: i, policy, seed, trajectory })
                    .map_err(|e| Error::Cell {
                        cell: format!("{} policy={} seed={seed}", points[i].run_id(), policy.name()),
                        source: Box::new(e),
                    })
            })
            .collect::<Result<_>>()
    })?;
    let summary = summarize(&points, &cells, dataset.is_some())?;
    Ok(SweepOutput { points, cells, summary, dataset_mode: dataset.is_some() })
}

/// Rounds at which curve samples are reported: `⌈kT/10⌉` for k = 1..=10.
pub fn curve_rounds(horizon: u64) -> Vec<u64> {
    let mut rounds: Vec<u64> = (1..=CURVE_POINTS).map(|k| (k * horizon).div_ceil(CURVE_POINTS).max(1)).collect();
    rounds.dedup();
    rounds
}

/// Mean per-round regret over the last tenth of the rounds.
pub fn tail_regret_rate(cumulative: &[f64]) -> f64 {
    let n = cumulative.len();
    let tail = (n / 10).max(1).min(n);
    let before = if n > tail { cumulative[n - tail - 1] } else { 0.0 };
    (cumulative[n - 1] - before) / tail as f64
}

fn cell_metrics(cell: &CellRun, partition: &GroupPartition, dataset_mode: bool) -> Result<Vec<(String, f64)>> {
    let traj = &cell.trajectory;
    let horizon = traj.len() as u64;
    let mut out = vec![
        ("sensitive_fraction".to_string(), sensitive_pull_fraction(traj, partition, None)?),
        ("sensitive_fraction_trailing".to_string(), sensitive_pull_fraction(traj, partition, Some(trailing_window(horizon)))?),
    ];
    let kinds: &[(RegretKind, &str)] = if dataset_mode {
        &[(RegretKind::Biased, "biased")]
    } else {
        &[(RegretKind::True, "true"), (RegretKind::Biased, "biased")]
    };
    for &(kind, label) in kinds {
        let cum = cumulative_regret(traj, kind)?;
        out.push((format!("{label}_regret_cum"), cum[cum.len() - 1]));
        out.push((format!("{label}_regret_tail_rate"), tail_regret_rate(&cum)));
        for t in curve_rounds(horizon) {
            out.push((format!("{label}_regret_cum@{t}"), cum[t as usize - 1]));
        }
    }
    Ok(out)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One row per (point, policy, metric) with the mean and sample standard
/// deviation across seeds.
pub fn summarize(points: &[GridPoint], cells: &[CellRun], dataset_mode: bool) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for (i, point) in points.iter().enumerate() {
        for &policy in &point.config.policies {
            let mut names: Vec<String> = Vec::new();
            let mut columns: Vec<Vec<f64>> = Vec::new();
            for cell in cells.iter().filter(|c| c.point == i && c.policy == policy) {
                for (j, (name, value)) in cell_metrics(cell, &point.partition, dataset_mode)?.into_iter().enumerate() {
                    if j == names.len() {
                        names.push(name);
                        columns.push(Vec::new());
                    }
                    columns[j].push(value);
                }
            }
            for (metric, values) in names.into_iter().zip(columns) {
                let (mean, std) = mean_std(&values);
                rows.push(SummaryRow {
                    preset: point.config.name.clone(),
                    swept_param: point.swept_param,
                    swept_value: point.swept_value,
                    policy,
                    metric,
                    mean,
                    std,
                    n_seeds: values.len(),
                });
            }
        }
    }
    Ok(rows)
}
