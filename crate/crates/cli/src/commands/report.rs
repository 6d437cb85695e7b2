//! `sedpipe report`: human-readable summaries of pipeline artifacts.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Context;
use sedpipe_core::synth::Manifest;

#[derive(clap::Args)]
#[group(required = true, multiple = false)]
pub struct Args {
    /// Summarize a synthesis manifest
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Summarize an evaluation report CSV
    #[arg(long)]
    psds: Option<PathBuf>,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    if let Some(path) = args.manifest {
        let manifest = Manifest::load(&path)?;
        let mut per_class: BTreeMap<&str, usize> = BTreeMap::new();
        for clip in &manifest.clips {
            for e in &clip.events {
                *per_class.entry(&e.class_name).or_default() += 1;
            }
        }
        let n_events: usize = per_class.values().sum();
        println!("clips\t{}", manifest.n_clips);
        println!("events\t{n_events}");
        println!(
            "audio\t{:.1} s total at {} Hz, {}",
            manifest.n_clips as f64 * manifest.params.duration,
            manifest.params.sample_rate,
            manifest.encoding
        );
        println!(
            "params\tduration {} s, events {}..{}, snr {}..{} dB, seed {}",
            manifest.params.duration,
            manifest.params.events_min,
            manifest.params.events_max,
            manifest.params.snr_min,
            manifest.params.snr_max,
            manifest.params.seed
        );
        for (class, count) in per_class {
            println!("class\t{class}\t{count}");
        }
        return Ok(());
    }

    let path = args.psds.expect("clap enforces one of --manifest/--psds");
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    anyhow::ensure!(
        header == "record,metric,threshold,class,tpr,efpr,etpr,psds",
        "{} does not look like an evaluation report",
        path.display()
    );
    let mut operating_points: BTreeMap<&str, usize> = BTreeMap::new();
    let mut summaries: Vec<(&str, &str)> = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        match fields.first() {
            Some(&"operating_point") => {
                *operating_points.entry(fields[1]).or_default() += 1;
            }
            Some(&"summary") => summaries.push((fields[1], fields[7])),
            _ => {}
        }
    }
    for (metric, value) in summaries {
        println!(
            "{}\t{}\t({} per-class operating-point rows)",
            metric.to_uppercase(),
            value,
            operating_points.get(metric).copied().unwrap_or(0)
        );
    }
    Ok(())
}
