//! The `groupfair` command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use groupfair_core::numerics::{normal_cdf, normal_quantile, ols_fit, DesignMatrix, RewardVector};

use crate::config::{ConfigDocument, ExperimentConfig};
use crate::data::{load_dataset, DatasetEnvironment, DatasetSchema};
use crate::error::{Error, Result};
use crate::output;
use crate::presets::figure_preset;
use crate::sweep::{build_grid, cell_instance, run_sweep};

/// Default output directory when neither `--out` nor the config sets one.
pub const OUT_ENV: &str = "GROUPFAIR_OUT";

#[derive(Debug, Parser)]
#[command(name = "groupfair", version, about = "Group-fair contextual bandit experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML experiment config.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Output directory [config `out`, then $GROUPFAIR_OUT, then `results`].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run seeds 0..k.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Override a config key, e.g. `--set synthetic.arms=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker threads; 0 uses every logical core.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Apply a figure preset before overrides.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One trial per policy at the first seed.
    Run(Common),
    /// Every cell of the config's sweep grid.
    Sweep(Common),
    /// A figure preset's grid.
    Replicate {
        /// Preset name, e.g. pulls_T.
        name: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// A sweep against the CSV dataset named in the config.
    Dataset(Common),
    /// Check the config, instance and dataset, and run numeric self-tests.
    Validate(Common),
}

/// Layers defaults, config file, preset, `--set` overrides and flags.
pub fn resolve_config(common: &Common) -> Result<ExperimentConfig> {
    let mut doc = match &common.config {
        Some(path) => {
            if !path.exists() {
                return Err(Error::Config(format!("{}: no such file", path.display())));
            }
            ConfigDocument::load(path)?
        }
        None => ConfigDocument::default(),
    };
    let preset = match &common.preset {
        Some(p) => Some(p.clone()),
        None => doc.get_str("preset"),
    };
    if let Some(name) = preset {
        figure_preset(&name)?.apply(&mut doc)?;
    }
    for assignment in &common.set {
        doc.set_assignment(assignment)?;
    }
    if let Some(k) = common.seeds {
        doc.set("seeds", toml::Value::Integer(to_toml_int(k)?))?;
    }
    if let Some(j) = common.jobs {
        doc.set("jobs", toml::Value::Integer(to_toml_int(j as u64)?))?;
    }
    if let Some(out) = &common.out {
        doc.set("out", toml::Value::String(out.to_string_lossy().into_owned()))?;
    }
    doc.resolve()
}

fn to_toml_int(v: u64) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Config(format!("{v} is too large")))
}

/// Output directory: flag or config, then the environment, then `results`.
pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    config
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn load_configured_dataset(config: &ExperimentConfig) -> Result<Option<DatasetEnvironment>> {
    let Some(ds) = &config.dataset else {
        return Ok(None);
    };
    for p in [&ds.path, &ds.schema] {
        if !p.exists() {
            return Err(Error::Data(format!("{}: no such file", p.display())));
        }
    }
    let schema = DatasetSchema::load(&ds.schema)?;
    Ok(Some(load_dataset(&ds.path, &schema)?))
}

fn report(dir: &Path, paths: &[PathBuf]) {
    println!("wrote {} files to {}", paths.len(), dir.display());
}

fn execute(config: &ExperimentConfig, dataset: Option<&DatasetEnvironment>) -> Result<()> {
    let dir = output_dir(config);
    let out = run_sweep(config, dataset)?;
    let mut paths = output::write_all(&dir, config, &out)?;
    if let Some(env) = dataset {
        let path = dir.join("load_report.json");
        output::write_json(&path, env.report())?;
        paths.push(path);
    }
    report(&dir, &paths);
    Ok(())
}

fn cmd_run(mut config: ExperimentConfig) -> Result<()> {
    config.sweep = None;
    let seed = config.seeds()[0];
    config.seeds = crate::config::SeedSpec::List(vec![seed]);
    let dataset = load_configured_dataset(&config)?;
    if dataset.is_none() {
        let dir = output_dir(&config);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        output::write_json(&dir.join("instance.json"), &cell_instance(&config, seed)?)?;
    }
    execute(&config, dataset.as_ref())
}

fn cmd_dataset(config: ExperimentConfig) -> Result<()> {
    let dataset = load_configured_dataset(&config)?
        .ok_or_else(|| Error::Config("the dataset command needs a [dataset] section with path and schema".into()))?;
    eprint!("{}", dataset.report());
    execute(&config, Some(&dataset))
}

/// Numeric spot checks against frozen reference values.
pub fn self_test() -> Result<()> {
    let fail = |what: &str| Error::Numeric(groupfair_core::Error::InvalidInput(format!("self-test failed: {what}")));
    let q = normal_quantile(0.975)?;
    if (q - 1.959963984540054).abs() > 1e-12 {
        return Err(fail("normal quantile at 0.975"));
    }
    for p in [1e-12, 1e-6, 0.01, 0.3, 0.5, 0.8, 0.999] {
        if (normal_cdf(normal_quantile(p)?) - p).abs() > 1e-8 * p.max(1e-3) {
            return Err(fail("cdf/quantile round trip"));
        }
    }
    // y = 2 x1 - x2 exactly
    let rows = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 3.0]];
    let x = DesignMatrix::from_rows(2, &rows)?;
    let y = RewardVector(rows.iter().map(|r| 2.0 * r[0] - r[1]).collect());
    let beta = ols_fit(&x, &y, 0.0)?;
    if (beta[0] - 2.0).abs() > 1e-10 || (beta[1] + 1.0).abs() > 1e-10 {
        return Err(fail("least squares"));
    }
    Ok(())
}

fn cmd_validate(config: ExperimentConfig) -> Result<()> {
    let dataset = load_configured_dataset(&config)?;
    let points = build_grid(&config, dataset.as_ref())?;
    if dataset.is_none() {
        for p in &points {
            for seed in p.config.seeds() {
                cell_instance(&p.config, seed)?;
            }
        }
    }
    self_test()?;
    println!(
        "ok: {} grid point(s), {} polic{}, {} seed(s){}",
        points.len(),
        config.policies.len(),
        if config.policies.len() == 1 { "y" } else { "ies" },
        config.seeds().len(),
        if dataset.is_some() { ", dataset loaded" } else { "" }
    );
    Ok(())
}

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(c) => cmd_run(resolve_config(&c)?),
        Command::Sweep(c) => {
            let config = resolve_config(&c)?;
            execute(&config, load_configured_dataset(&config)?.as_ref())
        }
        Command::Replicate { name, mut common } => {
            if let Some(n) = name {
                common.preset = Some(n);
            }
            if common.preset.is_none() {
                return Err(Error::Config("replicate needs a preset name".into()));
            }
            let config = resolve_config(&common)?;
            execute(&config, None)
        }
        Command::Dataset(c) => cmd_dataset(resolve_config(&c)?),
        Command::Validate(c) => cmd_validate(resolve_config(&c)?),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("groupfair: {e}");
            e.exit_code()
        }
    }
}
