//! `sedpipe filter`: joint rank filtering of an external score table.

use std::collections::BTreeMap;
use std::path::PathBuf;

use sedpipe_core::filtering::{self, FilterConfig};

use crate::config::{pick, require, PipelineConfig};

#[derive(clap::Args)]
pub struct Args {
    /// Score table CSV: sample_id,class,clap_score,cls_logit
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Rank-fusion weight on the similarity score [default: 0.5]
    #[arg(long)]
    w: Option<f64>,
    /// Percentage of each class to keep [default: 50]
    #[arg(long)]
    p: Option<f64>,
    /// Directory for kept.csv and discarded.csv
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// TOML run configuration; flags given here win over it
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let config = PipelineConfig::load(args.config.as_deref())?;
    let scores = require(args.scores, config.paths.scores, "scores")?;
    let out_dir = require(args.out_dir, config.paths.out_dir, "out-dir")?;
    let weight = pick(args.w, config.filter.weight, 0.5);
    let top_percent = pick(args.p, config.filter.top_percent, 50.0);

    let samples = filtering::load_score_table(&scores)?;
    let filter_config = FilterConfig::new(weight, top_percent)?;
    let result = filtering::fuse_and_select(&samples, &filter_config)?;
    filtering::write_filter_result(&result, &out_dir)?;

    let mut kept_per_class: BTreeMap<&str, usize> = BTreeMap::new();
    for row in &result.kept {
        *kept_per_class.entry(&row.class_name).or_default() += 1;
    }
    for (class, kept) in &kept_per_class {
        let total = samples.iter().filter(|s| &s.class_name == class).count();
        println!("{class},{kept},{total}");
    }
    println!(
        "filter: kept {} of {} samples (w={weight}, top {top_percent}%) -> {}",
        result.kept.len(),
        samples.len(),
        out_dir.display()
    );
    Ok(())
}
