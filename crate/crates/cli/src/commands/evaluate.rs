//! `sedpipe evaluate`: PSDS1/PSDS2 against strong-label ground truth, from
//! either ready-made detection TSVs or raw posteriors.

use std::path::{Path, PathBuf};

use anyhow::Context;
use sedpipe_core::label;
use sedpipe_core::postprocess::{self, DetectionSet};
use sedpipe_core::psds::{self, PsdsEvaluation};

use crate::config::{pick, require, PipelineConfig};

#[derive(clap::Args)]
pub struct Args {
    /// Ground-truth strong-label TSV
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Clip-duration TSV (filename<TAB>duration)
    #[arg(long)]
    durations: Option<PathBuf>,
    /// Directory of detection TSVs, one per operating point
    #[arg(long, conflicts_with = "posteriors_dir")]
    detections_dir: Option<PathBuf>,
    /// Directory of posterior CSVs; decoded internally before scoring
    #[arg(long)]
    posteriors_dir: Option<PathBuf>,
    /// Which metric to report: psds1, psds2, or both [default: both]
    #[arg(long)]
    metric: Option<String>,
    /// Report CSV path [default: psds_report.csv]
    #[arg(long)]
    report: Option<PathBuf>,
    /// Median smoothing window for the posterior route, odd [default: 7]
    #[arg(long)]
    median_window: Option<usize>,
    /// Comma-separated thresholds for the posterior route
    #[arg(long)]
    thresholds: Option<String>,
    /// TOML run configuration; flags given here win over it
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Read every `*.tsv` in a directory as one detection set each. Thresholds
/// are recovered from `detections_t<threshold>.tsv` names; files named
/// otherwise get evenly spaced placeholder operating points.
fn load_detections_dir(dir: &Path) -> anyhow::Result<Vec<DetectionSet>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsv")))
        .collect();
    files.sort();
    let n = files.len();
    files
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let threshold = path
                .file_name()
                .and_then(|s| s.to_str())
                .and_then(|s| s.strip_prefix("detections_t"))
                .and_then(|s| s.strip_suffix(".tsv"))
                .and_then(|s| s.parse::<f64>().ok())
                .unwrap_or((i + 1) as f64 / (n + 1) as f64);
            let events = label::read_strong_labels(path)?;
            Ok(DetectionSet {
                operating_point: threshold,
                events,
            })
        })
        .collect()
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let config = PipelineConfig::load(args.config.as_deref())?;
    let gt_path = require(args.gt, config.paths.gt, "gt")?;
    let durations_path = require(args.durations, config.paths.durations, "durations")?;
    let metric = pick(args.metric, None, "both".to_string());
    anyhow::ensure!(
        ["psds1", "psds2", "both"].contains(&metric.as_str()),
        "unknown metric {metric:?} (use psds1, psds2, or both)"
    );
    let report_path = pick(
        args.report,
        config.paths.report,
        PathBuf::from("psds_report.csv"),
    );

    let ground_truth = label::read_strong_labels(&gt_path)?;
    let durations = label::read_durations(&durations_path)?;
    let total_duration: f64 = durations.values().sum();
    anyhow::ensure!(
        total_duration > 0.0,
        "duration file lists no positive durations"
    );

    let detections_dir = args.detections_dir.or(config.paths.detections_dir);
    let posteriors_dir = args.posteriors_dir.or(config.paths.posteriors_dir);
    let sets = match (&detections_dir, &posteriors_dir) {
        (Some(dir), _) => load_detections_dir(dir)?,
        (None, Some(dir)) => {
            let posteriors = super::decode::load_posteriors_dir(dir)?;
            let thresholds =
                super::decode::parse_thresholds(args.thresholds, config.decode.thresholds)?;
            let window = pick(
                args.median_window,
                config.decode.median_window,
                postprocess::DEFAULT_MEDIAN_WINDOW,
            );
            postprocess::sweep_operating_points(&posteriors, &thresholds, window)?
        }
        (None, None) => anyhow::bail!("pass either --detections-dir or --posteriors-dir"),
    };

    let mut evaluations: Vec<(&str, PsdsEvaluation)> = Vec::new();
    if metric == "psds1" || metric == "both" {
        let params = config.psds1.apply(psds::psds1_params());
        evaluations.push((
            "psds1",
            psds::evaluate_detection_sets(&sets, &ground_truth, &params, total_duration)?,
        ));
    }
    if metric == "psds2" || metric == "both" {
        let params = config.psds2.apply(psds::psds2_params());
        evaluations.push((
            "psds2",
            psds::evaluate_detection_sets(&sets, &ground_truth, &params, total_duration)?,
        ));
    }

    let named: Vec<(&str, &PsdsEvaluation)> = evaluations.iter().map(|(n, e)| (*n, e)).collect();
    psds::write_report(&named, &report_path)?;
    for (name, eval) in &evaluations {
        println!("{}\t{:.6}", name.to_uppercase(), eval.psds);
    }
    eprintln!(
        "evaluate: {} operating point(s) against {} ground-truth event(s); report at {}",
        sets.len(),
        ground_truth.len(),
        report_path.display()
    );
    Ok(())
}
