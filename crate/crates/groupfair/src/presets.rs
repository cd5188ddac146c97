//! Parameter grids for the synthetic figure reproductions.

use crate::config::{ConfigDocument, SweepParam};
use crate::error::{Error, Result};

/// One named grid: fixed settings plus one swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub fixed: Vec<(&'static str, toml::Value)>,
    pub param: SweepParam,
    pub values: Vec<f64>,
}

pub const PRESET_NAMES: [&str; 11] = [
    "pulls_T",
    "pulls_arms",
    "pulls_error",
    "pulls_ratio",
    "regret_T",
    "regret_arms",
    "regret_error",
    "regret_ratio",
    "appx_c",
    "appx_dim",
    "appx_delta",
];

fn int(v: i64) -> toml::Value {
    toml::Value::Integer(v)
}

fn float(v: f64) -> toml::Value {
    toml::Value::Float(v)
}

pub fn figure_preset(name: &str) -> Result<Preset> {
    let name = PRESET_NAMES
        .into_iter()
        .find(|p| *p == name)
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}` (known: {})", PRESET_NAMES.join(", "))))?;
    // n = 10, T = 1000, μ = 10, 5 sensitive arms, d = 2 unless swept
    let mut fixed = vec![
        ("horizon", int(1000)),
        ("synthetic.arms", int(10)),
        ("synthetic.bias_mean", float(10.0)),
        ("synthetic.sensitive", int(5)),
        ("synthetic.dim", int(2)),
    ];
    let (param, values) = match name.split_once('_').map_or(name, |(_, axis)| axis) {
        "T" => (SweepParam::Horizon, vec![250.0, 500.0, 1000.0, 2000.0, 4000.0]),
        "arms" => (SweepParam::Arms, vec![6.0, 8.0, 10.0, 15.0, 20.0]),
        "error" => {
            fixed.retain(|(k, _)| *k != "synthetic.dim");
            fixed.push(("synthetic.dim", int(5)));
            (SweepParam::BiasMean, vec![0.0, 5.0, 10.0, 20.0, 40.0])
        }
        "ratio" => (SweepParam::Sensitive, (1..=9).map(f64::from).collect()),
        "c" => (SweepParam::CoefMax, vec![1.0, 5.0, 10.0, 20.0, 50.0]),
        "dim" => (SweepParam::Dim, vec![1.0, 2.0, 3.0, 5.0, 10.0]),
        "delta" => (SweepParam::Delta, vec![0.01, 0.05, 0.1, 0.2, 0.5]),
        _ => unreachable!("every preset name has a known axis"),
    };
    fixed.retain(|(k, _)| k.rsplit('.').next() != Some(param.name()));
    Ok(Preset { name, fixed, param, values })
}

impl Preset {
    /// Writes the fixed settings, the preset name and the sweep axis into `doc`.
    pub fn apply(&self, doc: &mut ConfigDocument) -> Result<()> {
        for (k, v) in &self.fixed {
            doc.set(k, v.clone())?;
        }
        doc.set("name", toml::Value::String(self.name.into()))?;
        doc.set("preset", toml::Value::String(self.name.into()))?;
        doc.set("sweep.param", toml::Value::String(self.param.name().into()))?;
        doc.set("sweep.values", toml::Value::Array(self.values.iter().map(|&v| float(v)).collect()))?;
        Ok(())
    }
}
