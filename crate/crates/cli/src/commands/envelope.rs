//! `sedpipe envelope`: batch-export energy-envelope control signals.

use std::path::PathBuf;

use anyhow::Context;
use sedpipe_core::envelope::{self, ControlSignalFormat, EnvelopeParams};
use sedpipe_core::{audio_io, EnergyEnvelope};

use crate::config::{pick, require, PipelineConfig};

#[derive(clap::Args)]
pub struct Args {
    /// Input WAV file or directory of WAV files
    #[arg(long)]
    audio_in: Option<PathBuf>,
    /// Output directory for control-signal files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Latent frame rate the hop aligns to [default: 50]
    #[arg(long)]
    latent_rate: Option<f64>,
    /// Relative envelope threshold for active-region detection [default: 0.05]
    #[arg(long)]
    threshold: Option<f64>,
    /// Control-signal layout: csv or f32le [default: csv]
    #[arg(long)]
    format: Option<String>,
    /// Rescale each envelope to a maximum of 1 before export
    #[arg(long)]
    normalize: bool,
    /// Trim leading/trailing silence before computing the envelope
    #[arg(long)]
    trim: bool,
    /// TOML run configuration; flags given here win over it
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_format(name: &str) -> anyhow::Result<ControlSignalFormat> {
    match name {
        "csv" => Ok(ControlSignalFormat::Csv),
        "f32le" => Ok(ControlSignalFormat::F32le),
        other => anyhow::bail!("unknown control-signal format {other:?} (use csv or f32le)"),
    }
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let config = PipelineConfig::load(args.config.as_deref())?;
    let audio_in = require(args.audio_in, config.paths.audio_in, "audio-in")?;
    let out = require(args.out, config.paths.out_dir, "out")?;
    let latent_rate = pick(args.latent_rate, config.envelope.latent_rate, 50.0);
    let threshold = pick(args.threshold, config.envelope.threshold, 0.05);
    let format = parse_format(&pick(
        args.format,
        config.envelope.format,
        "csv".to_string(),
    ))?;
    let normalize = args.normalize || config.envelope.normalize.unwrap_or(false);
    let trim = args.trim || config.envelope.trim.unwrap_or(false);

    let files: Vec<PathBuf> = if audio_in.is_dir() {
        let mut list: Vec<PathBuf> = std::fs::read_dir(&audio_in)
            .with_context(|| format!("listing {}", audio_in.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")))
            .collect();
        list.sort();
        list
    } else {
        vec![audio_in.clone()]
    };
    anyhow::ensure!(
        !files.is_empty(),
        "no wav files under {}",
        audio_in.display()
    );
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    for file in &files {
        let clip = audio_io::read_wav(file)?;
        let params = EnvelopeParams::from_latent_rate(clip.sample_rate(), latent_rate)?;
        let clip = if trim {
            envelope::trim_silence(&clip, &params, threshold)?
        } else {
            clip
        };
        let env = envelope::compute_envelope(&clip, &params)?;
        let env: EnergyEnvelope = if normalize {
            envelope::normalize_envelope(&env)
        } else {
            env
        };
        let stem = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "envelope".to_string());
        let target = out.join(format!("{stem}.{}", format.extension()));
        envelope::export_control_signal(&env, &target, format)?;

        let region = envelope::detect_active_region(&env, threshold)?;
        let (active_start, active_end) = region
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .unwrap_or_else(|| ("-".to_string(), "-".to_string()));
        println!(
            "{},{},{},{},{},{}",
            file.display(),
            target.display(),
            env.len(),
            params.hop(),
            active_start,
            active_end
        );
    }
    println!(
        "envelope: exported {} control signal(s) to {}",
        files.len(),
        out.display()
    );
    Ok(())
}
