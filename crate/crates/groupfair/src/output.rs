//! Result tables and run metadata.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::sweep::SweepOutput;

pub const ROUNDS_FILE: &str = "rounds.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const CONFIG_FILE: &str = "effective_config.toml";
pub const GRID_FILE: &str = "grid.json";

/// Formats a real with 9 significant digits, `%.9g` style.
pub fn fmt_real(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        trim_zeros(format!("{v:.*}", (8 - exp) as usize))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt_real(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    }
}

/// Long-format per-round table.
pub fn write_rounds(path: &Path, out: &SweepOutput) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "run_id",
        "policy",
        "seed",
        "t",
        "arm",
        "group",
        "explored",
        "reward",
        "true_regret_cum",
        "biased_regret_cum",
    ])
    .map_err(|e| csv_err(path, e))?;
    for cell in &out.cells {
        let run_id = out.points[cell.point].run_id();
        let (mut true_cum, mut biased_cum) = (Some(0.0), 0.0);
        for o in &cell.trajectory.outcomes {
            true_cum = match (true_cum, o.true_regret) {
                (Some(acc), Some(r)) => Some(acc + r),
                _ => None,
            };
            biased_cum += o.biased_regret;
            w.write_record([
                run_id.as_str(),
                cell.policy.name(),
                &cell.seed.to_string(),
                &o.t.to_string(),
                &o.arm.to_string(),
                &o.group.to_string(),
                if o.explored { "1" } else { "0" },
                &fmt_real(o.reward),
                &opt_real(true_cum),
                &fmt_real(biased_cum),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    finish(w, path)
}

pub fn write_summary(path: &Path, out: &SweepOutput) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["preset", "swept_param", "swept_value", "policy", "metric", "mean", "std", "n_seeds"])
        .map_err(|e| csv_err(path, e))?;
    for r in &out.summary {
        w.write_record([
            r.preset.as_str(),
            r.swept_param.map_or("", |p| p.name()),
            &opt_real(r.swept_value),
            r.policy.name(),
            &r.metric,
            &fmt_real(r.mean),
            &fmt_real(r.std),
            &r.n_seeds.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    finish(w, path)
}

#[derive(Serialize)]
struct GridMeta<'a> {
    name: &'a str,
    preset: Option<&'a str>,
    swept_param: Option<&'a str>,
    values: Vec<Option<f64>>,
    run_ids: Vec<String>,
    policies: Vec<&'a str>,
    seeds: Vec<u64>,
    dataset_mode: bool,
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Data(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

/// Writes the per-round table, the summary, the grid description and the
/// effective config into `dir`, returning the paths written.
pub fn write_all(dir: &Path, config: &ExperimentConfig, out: &SweepOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths: Vec<PathBuf> = [ROUNDS_FILE, SUMMARY_FILE, GRID_FILE, CONFIG_FILE].iter().map(|f| dir.join(f)).collect();
    write_rounds(&paths[0], out)?;
    write_summary(&paths[1], out)?;
    let meta = GridMeta {
        name: &config.name,
        preset: config.preset.as_deref(),
        swept_param: config.sweep.as_ref().map(|s| s.param.name()),
        values: out.points.iter().map(|p| p.swept_value).collect(),
        run_ids: out.points.iter().map(|p| p.run_id()).collect(),
        policies: config.policies.iter().map(|p| p.name()).collect(),
        seeds: config.seeds(),
        dataset_mode: out.dataset_mode,
    };
    write_json(&paths[2], &meta)?;
    write_text(&paths[3], &config.to_toml()?)?;
    Ok(paths)
}
