use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use stdpp::{
    BandwidthSpec, Family, FitOptions, InversionGrid, KernelModel, LagGrid, ParamBounds, SpectralConfig, Statistic,
    Window,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Validate,
    Curves,
    Simulate,
    Summarize,
    Fit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Which process `simulate` draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    #[default]
    Stdpp,
    /// Homogeneous Poisson process at the model's intensity.
    Poisson,
}

/// Lag grid as written in a config file: either explicit lag lists or a
/// regular layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Explicit {
        spatial_lags: Vec<f64>,
        temporal_lags: Vec<f64>,
    },
    Regular {
        u_max: f64,
        n_u: usize,
        t_max: f64,
        n_t: usize,
        /// With zero, `n` lags span `[0, max]`; without, they are `max·i/n`, `i = 1..=n`.
        #[serde(default = "yes")]
        include_zero: bool,
    },
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

impl GridSpec {
    pub fn build(&self) -> stdpp::error::Result<LagGrid> {
        match self {
            GridSpec::Explicit {
                spatial_lags,
                temporal_lags,
            } => LagGrid::new(spatial_lags.clone(), temporal_lags.clone()),
            GridSpec::Regular {
                u_max,
                n_u,
                t_max,
                n_t,
                include_zero: true,
            } => LagGrid::regular(*u_max, *n_u, *t_max, *n_t),
            GridSpec::Regular {
                u_max,
                n_u,
                t_max,
                n_t,
                include_zero: false,
            } => LagGrid::positive(*u_max, *n_u, *t_max, *n_t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<KernelModel>,
    /// Parameter settings for `curves`; `model` is used when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<KernelModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub process: Process,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inversion: Option<InversionGrid>,
    /// `curves` also writes the K-function.
    #[serde(default)]
    pub include_k: bool,
    /// Pattern CSV files read by `summarize` and `fit`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
    /// Statistics written by `summarize`; both when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistics: Option<Vec<Statistic>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<BandwidthSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<ParamBounds>,
    /// Statistic matched by `fit`.
    #[serde(default)]
    pub statistic: Statistic,
    #[serde(default)]
    pub fit: FitOptions,
    /// `fit` exits with status 1 when the optimizer did not converge.
    #[serde(default)]
    pub strict: bool,
}

impl RunConfig {
    /// Reads a config document, applies `key=value` overrides and checks the
    /// fields the command needs.
    pub fn load(path: Option<&Path>, overrides: &[String], command: Command) -> anyhow::Result<Self> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => Value::Object(Default::default()),
        };
        for item in overrides {
            apply_override(&mut doc, item)?;
        }
        let mut config: RunConfig = serde_json::from_value(doc).context("invalid config")?;
        match config.command {
            Some(c) if c != command => bail!("config is for `{}` but `{}` was requested", name(c), name(command)),
            _ => config.command = Some(command),
        }
        config.check(command)?;
        Ok(config)
    }

    fn check(&self, command: Command) -> anyhow::Result<()> {
        if self.replicates == 0 {
            bail!("replicates must be at least 1");
        }
        let need = |present: bool, field: &str| {
            if present {
                Ok(())
            } else {
                Err(anyhow!("`{}` requires the `{field}` field", name(command)))
            }
        };
        match command {
            Command::Validate => need(self.model.is_some(), "model")?,
            Command::Curves => {
                need(self.model.is_some() || !self.models.is_empty(), "model")?;
                need(self.grid.is_some(), "grid")?;
            }
            Command::Simulate => {
                need(self.model.is_some(), "model")?;
                need(self.window.is_some(), "window")?;
            }
            Command::Summarize => {
                need(!self.inputs.is_empty(), "inputs")?;
                need(self.window.is_some(), "window")?;
                need(self.grid.is_some(), "grid")?;
            }
            Command::Fit => {
                need(!self.inputs.is_empty(), "inputs")?;
                need(self.window.is_some(), "window")?;
                need(self.grid.is_some(), "grid")?;
                need(self.family.is_some(), "family")?;
                need(self.bounds.is_some(), "bounds")?;
            }
        }
        if let Some(w) = &self.window {
            w.check()?;
        }
        if let Some(g) = &self.grid {
            g.build()?;
        }
        if let Some(b) = &self.bounds {
            ParamBounds::new(b.alpha_s, b.alpha_t)?;
        }
        if let Some(b) = &self.bandwidth {
            BandwidthSpec::new(b.spatial_bw, b.temporal_bw)?;
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_path.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

pub fn name(c: Command) -> &'static str {
    match c {
        Command::Validate => "validate",
        Command::Curves => "curves",
        Command::Simulate => "simulate",
        Command::Summarize => "summarize",
        Command::Fit => "fit",
    }
}

/// Sets a dotted key, e.g. `model.alpha_s=2` or `window={"x_extent":1,...}`.
/// The value is read as JSON when it parses, otherwise as a string.
pub fn apply_override(doc: &mut Value, item: &str) -> anyhow::Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{item}` is not of the form key=value"))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        bail!("override `{item}` has an empty key segment");
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    for part in key.split('.') {
        if !node.is_object() {
            if node.is_null() {
                *node = Value::Object(Default::default());
            } else {
                bail!("override `{item}`: `{part}` is not inside an object");
            }
        }
        node = node
            .as_object_mut()
            .expect("checked above")
            .entry(part.to_string())
            .or_insert(Value::Null);
    }
    *node = value;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_create_nested_objects() {
        let mut doc = serde_json::json!({"model": {"family": "sep_gauss_exp", "rho": 0.1}});
        apply_override(&mut doc, "model.alpha_s=2").unwrap();
        apply_override(&mut doc, "spectral.cutoff=[4,4,8]").unwrap();
        apply_override(&mut doc, "output_path=out dir").unwrap();
        assert_eq!(doc["model"]["alpha_s"], 2);
        assert_eq!(doc["spectral"]["cutoff"][2], 8);
        assert_eq!(doc["output_path"], "out dir");
    }

    #[test]
    fn malformed_overrides_are_rejected() {
        let mut doc = serde_json::json!({"seed": 3});
        assert!(apply_override(&mut doc, "seed").is_err());
        assert!(apply_override(&mut doc, "seed.x=1").is_err());
        assert!(apply_override(&mut doc, "a..b=1").is_err());
    }

    #[test]
    fn grid_layouts() {
        let g: GridSpec = serde_json::from_str(r#"{"u_max":1,"n_u":3,"t_max":2,"n_t":2}"#).unwrap();
        let g = g.build().unwrap();
        assert_eq!(g.spatial_lags(), &[0.0, 0.5, 1.0]);
        assert_eq!(g.temporal_lags(), &[0.0, 2.0]);
        let g: GridSpec =
            serde_json::from_str(r#"{"u_max":1,"n_u":2,"t_max":1,"n_t":1,"include_zero":false}"#).unwrap();
        assert_eq!(g.build().unwrap().spatial_lags(), &[0.5, 1.0]);
    }
}
