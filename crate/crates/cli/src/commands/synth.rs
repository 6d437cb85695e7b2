//! `sedpipe synth`: render a strongly labeled mixture dataset.

use std::path::PathBuf;

use sedpipe_core::synth::{self, SoundBank, SynthParams};

use crate::config::{pick, require, PipelineConfig};

#[derive(clap::Args)]
pub struct Args {
    /// Foreground bank: one subdirectory of WAV files per class
    #[arg(long)]
    fg_dir: Option<PathBuf>,
    /// Background bank: flat directory of WAV files
    #[arg(long)]
    bg_dir: Option<PathBuf>,
    /// Number of mixtures to render [default: 100]
    #[arg(long)]
    n_clips: Option<u64>,
    /// Mixture length in seconds [default: 10]
    #[arg(long)]
    duration: Option<f64>,
    /// Fewest events per mixture [default: 1]
    #[arg(long)]
    events_min: Option<u32>,
    /// Most events per mixture [default: 5]
    #[arg(long)]
    events_max: Option<u32>,
    /// Lowest event-over-background level in dB [default: 6]
    #[arg(long)]
    snr_min: Option<f64>,
    /// Highest event-over-background level in dB [default: 30]
    #[arg(long)]
    snr_max: Option<f64>,
    /// Output sample rate in Hz [default: 16000]
    #[arg(long)]
    sample_rate: Option<u32>,
    /// Seed for the per-clip generators [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Output dataset directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also draw foregrounds from this class-per-subdirectory bank
    #[arg(long)]
    include_real_fg: Option<PathBuf>,
    /// Also draw backgrounds from this directory
    #[arg(long)]
    gen_bg_dir: Option<PathBuf>,
    /// TOML run configuration; flags given here win over it
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let config = PipelineConfig::load(args.config.as_deref())?;
    let fg_dir = require(args.fg_dir, config.paths.fg_dir, "fg-dir")?;
    let bg_dir = require(args.bg_dir, config.paths.bg_dir, "bg-dir")?;
    let out_dir = require(args.out_dir, config.paths.out_dir, "out-dir")?;
    let n_clips = pick(args.n_clips, None, 100);

    let defaults = SynthParams::default();
    let params = SynthParams {
        duration: pick(args.duration, config.synth.duration, defaults.duration),
        events_min: pick(
            args.events_min,
            config.synth.events_min,
            defaults.events_min,
        ),
        events_max: pick(
            args.events_max,
            config.synth.events_max,
            defaults.events_max,
        ),
        snr_min: pick(args.snr_min, config.synth.snr_min, defaults.snr_min),
        snr_max: pick(args.snr_max, config.synth.snr_max, defaults.snr_max),
        peak_limit: pick(None, config.synth.peak_limit, defaults.peak_limit),
        trim_threshold: pick(None, config.synth.trim_threshold, defaults.trim_threshold),
        sample_rate: pick(
            args.sample_rate,
            config.synth.sample_rate,
            defaults.sample_rate,
        ),
        seed: pick(args.seed, config.synth.seed, defaults.seed),
    };

    let mut catalog = synth::load_catalog(&fg_dir, &bg_dir)?;
    if let Some(extra_fg) = args.include_real_fg.or(config.paths.include_real_fg) {
        catalog.add_foreground_dir(&extra_fg)?;
    }
    if let Some(extra_bg) = args.gen_bg_dir.or(config.paths.gen_bg_dir) {
        catalog.add_background_dir(&extra_bg)?;
    }

    let bank = SoundBank::load(&catalog, &params)?;
    let manifest = synth::synthesize_set(&bank, n_clips, &params, &out_dir)?;
    let n_events: usize = manifest.clips.iter().map(|c| c.events.len()).sum();
    println!(
        "synth: rendered {} clip(s), {} event(s), seed {} -> {}",
        manifest.n_clips,
        n_events,
        params.seed,
        out_dir.display()
    );
    Ok(())
}
