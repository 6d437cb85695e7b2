//! Optional TOML run configuration.
//!
//! Every field mirrors a command-line flag; flags win over the file, the
//! file wins over built-in defaults. Unknown keys anywhere are errors so a
//! typo cannot silently fall back to a default.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub envelope: EnvelopeSection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub synth: SynthSection,
    #[serde(default)]
    pub decode: DecodeSection,
    #[serde(default)]
    pub psds1: PsdsSection,
    #[serde(default)]
    pub psds2: PsdsSection,
    #[serde(default)]
    pub paths: PathsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSection {
    pub latent_rate: Option<f64>,
    pub threshold: Option<f64>,
    pub format: Option<String>,
    pub normalize: Option<bool>,
    pub trim: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub weight: Option<f64>,
    pub top_percent: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub duration: Option<f64>,
    pub events_min: Option<u32>,
    pub events_max: Option<u32>,
    pub snr_min: Option<f64>,
    pub snr_max: Option<f64>,
    pub peak_limit: Option<f64>,
    pub trim_threshold: Option<f64>,
    pub sample_rate: Option<u32>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeSection {
    pub median_window: Option<usize>,
    pub thresholds: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdsSection {
    pub rho_dtc: Option<f64>,
    pub rho_gtc: Option<f64>,
    pub rho_cttc: Option<f64>,
    pub alpha_ct: Option<f64>,
    pub alpha_st: Option<f64>,
    pub e_max: Option<f64>,
}

impl PsdsSection {
    /// Apply the section's overrides to a preset.
    pub fn apply(&self, mut params: sedpipe_core::PsdsParams) -> sedpipe_core::PsdsParams {
        if let Some(v) = self.rho_dtc {
            params.rho_dtc = v;
        }
        if let Some(v) = self.rho_gtc {
            params.rho_gtc = v;
        }
        if let Some(v) = self.rho_cttc {
            params.rho_cttc = v;
        }
        if let Some(v) = self.alpha_ct {
            params.alpha_ct = v;
        }
        if let Some(v) = self.alpha_st {
            params.alpha_st = v;
        }
        if let Some(v) = self.e_max {
            params.e_max = v;
        }
        params
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub audio_in: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub fg_dir: Option<PathBuf>,
    pub bg_dir: Option<PathBuf>,
    pub include_real_fg: Option<PathBuf>,
    pub gen_bg_dir: Option<PathBuf>,
    pub posteriors_dir: Option<PathBuf>,
    pub detections_dir: Option<PathBuf>,
    pub gt: Option<PathBuf>,
    pub durations: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Flag, then config value, then default.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

/// Flag, then config value; error naming the flag when neither is present.
pub fn require<T>(flag: Option<T>, config: Option<T>, name: &str) -> anyhow::Result<T> {
    flag.or(config)
        .ok_or_else(|| anyhow::anyhow!("missing required --{name} (or config entry)"))
}
