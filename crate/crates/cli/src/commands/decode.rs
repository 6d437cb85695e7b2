//! `sedpipe decode`: posterior matrices to per-threshold detection TSVs.

use std::path::{Path, PathBuf};

use anyhow::Context;
use sedpipe_core::postprocess::{self, PosteriorMatrix};

use crate::config::{pick, require, PipelineConfig};

#[derive(clap::Args)]
pub struct Args {
    /// Directory of per-clip posterior CSV files
    #[arg(long)]
    posteriors_dir: Option<PathBuf>,
    /// Directory for detections_t<threshold>.tsv files
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Comma-separated thresholds in (0,1) [default: the 50-point grid]
    #[arg(long)]
    thresholds: Option<String>,
    /// Median smoothing window in frames, odd [default: 7]
    #[arg(long)]
    median_window: Option<usize>,
    /// TOML run configuration; flags given here win over it
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn load_posteriors_dir(dir: &Path) -> anyhow::Result<Vec<PosteriorMatrix>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    anyhow::ensure!(
        !files.is_empty(),
        "no posterior csv files under {}",
        dir.display()
    );
    files
        .iter()
        .map(|f| postprocess::read_posteriors(f).map_err(Into::into))
        .collect()
}

pub fn parse_thresholds(
    flag: Option<String>,
    config: Option<Vec<f64>>,
) -> anyhow::Result<Vec<f64>> {
    if let Some(list) = flag {
        return list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad threshold {v:?}"))
            })
            .collect();
    }
    if let Some(list) = config {
        if !list.is_empty() {
            return Ok(list);
        }
    }
    Ok(postprocess::default_thresholds())
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let config = PipelineConfig::load(args.config.as_deref())?;
    let posteriors_dir = require(
        args.posteriors_dir,
        config.paths.posteriors_dir,
        "posteriors-dir",
    )?;
    let out_dir = require(args.out_dir, config.paths.out_dir, "out-dir")?;
    let thresholds = parse_thresholds(args.thresholds, config.decode.thresholds)?;
    let median_window = pick(
        args.median_window,
        config.decode.median_window,
        postprocess::DEFAULT_MEDIAN_WINDOW,
    );

    let posteriors = load_posteriors_dir(&posteriors_dir)?;
    let sets = postprocess::sweep_operating_points(&posteriors, &thresholds, median_window)?;
    postprocess::write_detection_sets(&sets, &out_dir)?;
    let n_events: usize = sets.iter().map(|s| s.events.len()).sum();
    println!(
        "decode: {} clip(s) x {} operating point(s), {} event(s) -> {}",
        posteriors.len(),
        sets.len(),
        n_events,
        out_dir.display()
    );
    Ok(())
}
