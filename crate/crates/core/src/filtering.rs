//! Dual-score joint rank filtering of generated samples.
//!
//! Each sample carries an audio-text similarity score (`clap_score`) and an
//! audio-classifier logit (`cls_logit`) produced by external models. Within
//! each class the samples are ranked independently by each score, the two
//! ranks are fused as `w * clap_rank + (1 - w) * cls_rank`, and the best
//! `ceil(p%)` samples per class are kept. Because only orderings enter the
//! fused score, the result is invariant to any strictly increasing transform
//! of either score column.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: header must be sample_id,class,clap_score,cls_logit (missing {missing:?})")]
    MissingColumn { path: PathBuf, missing: String },
    #[error("{path} row {row}: non-numeric {column} value {value:?}")]
    NonNumeric {
        path: PathBuf,
        row: u64,
        column: &'static str,
        value: String,
    },
    #[error("{path} row {row}: {column} is not finite")]
    NonFinite {
        path: PathBuf,
        row: u64,
        column: &'static str,
    },
    #[error("{path} row {row}: duplicate sample_id {id:?} (first seen on row {first_row})")]
    DuplicateId {
        path: PathBuf,
        row: u64,
        id: String,
        first_row: u64,
    },
    #[error("{path} row {row}: empty {column}")]
    EmptyField {
        path: PathBuf,
        row: u64,
        column: &'static str,
    },
    #[error("duplicate sample_id {0:?} in input")]
    DuplicateInput(String),
    #[error("no samples to filter")]
    EmptyInput,
    #[error("weight {0} outside [0, 1]")]
    InvalidWeight(f64),
    #[error("top percentage {0} outside (0, 100]")]
    InvalidPercent(f64),
}

/// One externally scored sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub sample_id: String,
    #[serde(rename = "class")]
    pub class_name: String,
    pub clap_score: f64,
    pub cls_logit: f64,
}

/// Fusion weight and retention percentage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    weight: f64,
    top_percent: f64,
}

impl FilterConfig {
    /// `weight` blends the two rank lists (1.0 = similarity score only,
    /// 0.0 = classifier only); `top_percent` of each class is retained,
    /// rounded up.
    pub fn new(weight: f64, top_percent: f64) -> Result<Self, FilterError> {
        if !(0.0..=1.0).contains(&weight) || !weight.is_finite() {
            return Err(FilterError::InvalidWeight(weight));
        }
        if !(top_percent > 0.0 && top_percent <= 100.0) {
            return Err(FilterError::InvalidPercent(top_percent));
        }
        Ok(Self {
            weight,
            top_percent,
        })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn top_percent(&self) -> f64 {
        self.top_percent
    }
}

/// A sample with its per-class ranks and fused score attached.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedSample {
    pub sample_id: String,
    #[serde(rename = "class")]
    pub class_name: String,
    pub clap_score: f64,
    pub cls_logit: f64,
    pub clap_rank: usize,
    pub cls_rank: usize,
    pub fused_score: f64,
}

/// Kept/discarded partition of a score table.
///
/// Rows are ordered by class name, then by selection order (ascending fused
/// score with ties broken by clap rank, then sample id), so identical inputs
/// produce identical output bytes regardless of input row order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterResult {
    pub kept: Vec<RankedSample>,
    pub discarded: Vec<RankedSample>,
}

/// Load a score table CSV with header `sample_id,class,clap_score,cls_logit`.
///
/// Row numbers in errors are 1-based file lines (the header is line 1).
pub fn load_score_table(path: &Path) -> Result<Vec<ScoredSample>, FilterError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_open_error(path, e))?;

    let headers = reader
        .headers()
        .map_err(|source| FilterError::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let col = |name: &str| -> Result<usize, FilterError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| FilterError::MissingColumn {
                path: path.to_path_buf(),
                missing: name.to_string(),
            })
    };
    let id_col = col("sample_id")?;
    let class_col = col("class")?;
    let clap_col = col("clap_score")?;
    let logit_col = col("cls_logit")?;

    let mut samples = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|source| FilterError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let field = |idx: usize| record.get(idx).unwrap_or("");

        let sample_id = field(id_col).to_string();
        if sample_id.is_empty() {
            return Err(FilterError::EmptyField {
                path: path.to_path_buf(),
                row,
                column: "sample_id",
            });
        }
        let class_name = field(class_col).to_string();
        if class_name.is_empty() {
            return Err(FilterError::EmptyField {
                path: path.to_path_buf(),
                row,
                column: "class",
            });
        }
        let parse = |column: &'static str, idx: usize| -> Result<f64, FilterError> {
            let raw = field(idx);
            let v: f64 = raw.parse().map_err(|_| FilterError::NonNumeric {
                path: path.to_path_buf(),
                row,
                column,
                value: raw.to_string(),
            })?;
            if !v.is_finite() {
                return Err(FilterError::NonFinite {
                    path: path.to_path_buf(),
                    row,
                    column,
                });
            }
            Ok(v)
        };
        let clap_score = parse("clap_score", clap_col)?;
        let cls_logit = parse("cls_logit", logit_col)?;

        if let Some(&first_row) = seen.get(&sample_id) {
            return Err(FilterError::DuplicateId {
                path: path.to_path_buf(),
                row,
                id: sample_id,
                first_row,
            });
        }
        seen.insert(sample_id.clone(), row);
        samples.push(ScoredSample {
            sample_id,
            class_name,
            clap_score,
            cls_logit,
        });
    }
    Ok(samples)
}

fn csv_open_error(path: &Path, e: csv::Error) -> FilterError {
    if let csv::ErrorKind::Io(io) = e.into_kind() {
        FilterError::Io {
            path: path.to_path_buf(),
            source: io,
        }
    } else {
        FilterError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other("csv open failed"),
        }
    }
}

/// Dense descending ranks: rank 1 is the largest value; ties are broken by
/// ascending id so every rank is unique.
pub fn rank_descending<'a>(values: &[(&'a str, f64)]) -> HashMap<&'a str, usize> {
    let mut order: Vec<&(&str, f64)> = values.iter().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    order
        .into_iter()
        .enumerate()
        .map(|(i, &(id, _))| (id, i + 1))
        .collect()
}

/// Per-class retention quota: `ceil(p% of n)`.
///
/// Integer percentages are computed in exact integer arithmetic so grid
/// values like 50% of 2 never suffer floating-point boundary drift.
fn quota(top_percent: f64, n: usize) -> usize {
    if top_percent.fract() == 0.0 {
        let p = top_percent as usize;
        (p * n).div_ceil(100)
    } else {
        (top_percent / 100.0 * n as f64).ceil() as usize
    }
}

/// Rank-fuse the two score columns per class and keep the top `p%`.
pub fn fuse_and_select(
    samples: &[ScoredSample],
    config: &FilterConfig,
) -> Result<FilterResult, FilterError> {
    if samples.is_empty() {
        return Err(FilterError::EmptyInput);
    }
    let mut by_class: BTreeMap<&str, Vec<&ScoredSample>> = BTreeMap::new();
    let mut seen: HashMap<&str, ()> = HashMap::with_capacity(samples.len());
    for s in samples {
        if seen.insert(&s.sample_id, ()).is_some() {
            return Err(FilterError::DuplicateInput(s.sample_id.clone()));
        }
        by_class.entry(&s.class_name).or_default().push(s);
    }

    let w = config.weight;
    let mut result = FilterResult::default();
    for (_, class_samples) in by_class {
        let clap_ranks = rank_descending(
            &class_samples
                .iter()
                .map(|s| (s.sample_id.as_str(), s.clap_score))
                .collect::<Vec<_>>(),
        );
        let cls_ranks = rank_descending(
            &class_samples
                .iter()
                .map(|s| (s.sample_id.as_str(), s.cls_logit))
                .collect::<Vec<_>>(),
        );

        let mut ranked: Vec<RankedSample> = class_samples
            .iter()
            .map(|s| {
                let clap_rank = clap_ranks[s.sample_id.as_str()];
                let cls_rank = cls_ranks[s.sample_id.as_str()];
                RankedSample {
                    sample_id: s.sample_id.clone(),
                    class_name: s.class_name.clone(),
                    clap_score: s.clap_score,
                    cls_logit: s.cls_logit,
                    clap_rank,
                    cls_rank,
                    fused_score: w * clap_rank as f64 + (1.0 - w) * cls_rank as f64,
                }
            })
            .collect();
        ranked.sort_by(|a, b| {
            a.fused_score
                .total_cmp(&b.fused_score)
                .then_with(|| a.clap_rank.cmp(&b.clap_rank))
                .then_with(|| a.sample_id.cmp(&b.sample_id))
        });

        let keep = quota(config.top_percent, ranked.len());
        let rest = ranked.split_off(keep);
        result.kept.extend(ranked);
        result.discarded.extend(rest);
    }
    Ok(result)
}

/// Write `kept.csv` and `discarded.csv` under `out_dir`.
pub fn write_filter_result(result: &FilterResult, out_dir: &Path) -> Result<(), FilterError> {
    std::fs::create_dir_all(out_dir).map_err(|source| FilterError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    for (name, rows) in [
        ("kept.csv", &result.kept),
        ("discarded.csv", &result.discarded),
    ] {
        let path = out_dir.join(name);
        let mut writer = csv::Writer::from_path(&path).map_err(|e| csv_open_error(&path, e))?;
        for row in rows.iter() {
            writer.serialize(row).map_err(|source| FilterError::Csv {
                path: path.clone(),
                source,
            })?;
        }
        if rows.is_empty() {
            // serialize() derives the header from the first row; write it
            // explicitly for empty partitions
            writer
                .write_record([
                    "sample_id",
                    "class",
                    "clap_score",
                    "cls_logit",
                    "clap_rank",
                    "cls_rank",
                    "fused_score",
                ])
                .map_err(|source| FilterError::Csv {
                    path: path.clone(),
                    source,
                })?;
        }
        writer
            .flush()
            .map_err(|source| FilterError::Io { path, source })?;
    }
    Ok(())
}

/// Classes in a sample list, deduplicated and sorted.
pub fn class_names(samples: &[ScoredSample]) -> Vec<String> {
    let mut map: BTreeMap<&str, ()> = BTreeMap::new();
    for s in samples {
        if let Entry::Vacant(e) = map.entry(&s.class_name) {
            e.insert(());
        }
    }
    map.into_keys().map(str::to_string).collect()
}
