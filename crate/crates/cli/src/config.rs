//! Experiment configuration. A value given as a flag wins over the config
//! file, which wins over the built-in default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use uq_core::eval::ExperimentConfig;

/// Optional settings shared by the JSON config file and the command line.
/// Keys mirror the flag names.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigLayer {
    pub data: Option<PathBuf>,
    pub label: Option<String>,
    pub train_fraction: Option<f64>,
    pub runs: Option<usize>,
    pub delta: Option<f64>,
    pub trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub rejection_grid: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub oob_likelihood: Option<bool>,
}

impl ConfigLayer {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            data: top.data.or(self.data),
            label: top.label.or(self.label),
            train_fraction: top.train_fraction.or(self.train_fraction),
            runs: top.runs.or(self.runs),
            delta: top.delta.or(self.delta),
            trees: top.trees.or(self.trees),
            max_depth: top.max_depth.or(self.max_depth),
            rejection_grid: top.rejection_grid.or(self.rejection_grid),
            seed: top.seed.or(self.seed),
            oob_likelihood: top.oob_likelihood.or(self.oob_likelihood),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ResolvedConfig {
    pub data: PathBuf,
    pub label: String,
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
}

/// Applies `flags` over `file` over the defaults and validates the result.
pub fn resolve(file: ConfigLayer, flags: ConfigLayer) -> anyhow::Result<ResolvedConfig> {
    let merged = file.overlay(flags);
    let d = ExperimentConfig::default();
    let experiment = ExperimentConfig {
        train_fraction: merged.train_fraction.unwrap_or(d.train_fraction),
        runs: merged.runs.unwrap_or(d.runs),
        delta: merged.delta.unwrap_or(d.delta),
        trees: merged.trees.unwrap_or(d.trees),
        max_depth: merged.max_depth.unwrap_or(d.max_depth),
        rejection_grid: merged.rejection_grid.unwrap_or(d.rejection_grid),
        seed: merged.seed.unwrap_or(d.seed),
        oob_likelihood: merged.oob_likelihood.unwrap_or(d.oob_likelihood),
    };
    experiment.validate()?;
    Ok(ResolvedConfig {
        data: merged.data.ok_or_else(|| anyhow::anyhow!("no dataset given (--data)"))?,
        label: merged.label.ok_or_else(|| anyhow::anyhow!("no label column given (--label)"))?,
        experiment,
    })
}

/// Parses a comma-separated list of rejection rates such as `0,0.1,0.2`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number")))
        .collect()
}
