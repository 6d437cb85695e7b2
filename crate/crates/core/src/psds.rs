//! Polyphonic sound detection scores: intersection-based matching of
//! detections against strong labels, the per-class PSD-ROC staircase, and its
//! normalized area up to a false-positive-rate cap.
//!
//! Matching follows the intersection criteria of the PSDS framework:
//!
//! * DTC - a detection is valid when the merged overlap with same-clip,
//!   same-class ground truth covers at least `rho_dtc` of the detection.
//! * GTC - a ground-truth event is a true positive when the merged overlap
//!   with DTC-valid detections covers at least `rho_gtc` of the event.
//! * CTTC - a DTC-failing detection cross-triggers another class when its
//!   overlap with one of that class's events covers at least `rho_cttc` of
//!   the detection; pairs are counted per (detection, event).
//!
//! Only DTC-failing detections count as false positives; DTC-valid
//! detections whose ground truth fails the GTC contribute to neither count.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::label::EventAnnotation;
use crate::postprocess::DetectionSet;

#[derive(Debug, Error)]
pub enum PsdsError {
    #[error("parameter {name} = {value} outside {bounds}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        bounds: &'static str,
    },
    #[error("total dataset duration must be positive")]
    ZeroDuration,
    #[error("{origin} event {clip_id:?} [{onset}, {offset}) violates onset < offset")]
    BadEvent {
        origin: &'static str,
        clip_id: String,
        onset: f64,
        offset: f64,
    },
    #[error("ground truth has no events")]
    EmptyGroundTruth,
    #[error("no operating points")]
    NoOperatingPoints,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Matching tolerances and curve parameters for one PSDS variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdsParams {
    /// Detection tolerance criterion ratio.
    pub rho_dtc: f64,
    /// Ground truth intersection criterion ratio.
    pub rho_gtc: f64,
    /// Cross-trigger tolerance criterion ratio.
    pub rho_cttc: f64,
    /// Weight of cross-trigger rates inside the effective FPR.
    pub alpha_ct: f64,
    /// Penalty on across-class TPR spread inside the effective TPR.
    pub alpha_st: f64,
    /// Effective FPR integration limit, events per hour.
    pub e_max: f64,
}

impl PsdsParams {
    pub fn validate(&self) -> Result<(), PsdsError> {
        let unit = |name: &'static str, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(PsdsError::InvalidParam {
                    name,
                    value,
                    bounds: "[0, 1]",
                })
            }
        };
        unit("rho_dtc", self.rho_dtc)?;
        unit("rho_gtc", self.rho_gtc)?;
        unit("rho_cttc", self.rho_cttc)?;
        for (name, value) in [("alpha_ct", self.alpha_ct), ("alpha_st", self.alpha_st)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(PsdsError::InvalidParam {
                    name,
                    value,
                    bounds: "[0, inf)",
                });
            }
        }
        if !(self.e_max > 0.0 && self.e_max.is_finite()) {
            return Err(PsdsError::InvalidParam {
                name: "e_max",
                value: self.e_max,
                bounds: "(0, inf)",
            });
        }
        Ok(())
    }
}

/// Strict-timing variant: tight intersection ratios, no cross-trigger
/// penalty. Emphasizes temporal localization.
pub fn psds1_params() -> PsdsParams {
    PsdsParams {
        rho_dtc: 0.7,
        rho_gtc: 0.7,
        rho_cttc: 0.3,
        alpha_ct: 0.0,
        alpha_st: 1.0,
        e_max: 100.0,
    }
}

/// Loose-timing variant with cross-trigger penalties. Emphasizes event class
/// discrimination.
pub fn psds2_params() -> PsdsParams {
    PsdsParams {
        rho_dtc: 0.1,
        rho_gtc: 0.1,
        rho_cttc: 0.3,
        alpha_ct: 0.5,
        alpha_st: 1.0,
        e_max: 100.0,
    }
}

/// Counts and rates for one class at one operating point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassRates {
    pub tp: u64,
    pub gt: u64,
    pub fp: u64,
    /// Cross-trigger counts onto each other class.
    pub cross_triggers: BTreeMap<String, u64>,
    pub tpr: f64,
    pub efpr: f64,
}

/// Per-class rates for one operating point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PerClassRates {
    pub classes: BTreeMap<String, ClassRates>,
}

/// Merged length of a set of intervals.
fn union_length(mut intervals: Vec<(f64, f64)>) -> f64 {
    if intervals.is_empty() {
        return 0.0;
    }
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let (mut start, mut end) = intervals[0];
    for &(s, e) in &intervals[1..] {
        if s > end {
            total += end - start;
            start = s;
            end = e;
        } else if e > end {
            end = e;
        }
    }
    total + (end - start)
}

fn overlap(a: &EventAnnotation, b: &EventAnnotation) -> f64 {
    (a.offset.min(b.offset) - a.onset.max(b.onset)).max(0.0)
}

fn validate_events(events: &[EventAnnotation], origin: &'static str) -> Result<(), PsdsError> {
    for e in events {
        let well_formed = e.onset >= 0.0 && e.onset < e.offset;
        if !well_formed {
            return Err(PsdsError::BadEvent {
                origin,
                clip_id: e.clip_id.clone(),
                onset: e.onset,
                offset: e.offset,
            });
        }
    }
    Ok(())
}

/// Match one detection set against ground truth and derive per-class TPR and
/// effective FPR.
///
/// `total_duration` is the summed duration of all evaluated clips in seconds;
/// false-positive rates are reported per hour of it.
pub fn match_operating_point(
    detections: &DetectionSet,
    ground_truth: &[EventAnnotation],
    params: &PsdsParams,
    total_duration: f64,
) -> Result<PerClassRates, PsdsError> {
    params.validate()?;
    let duration_ok = total_duration > 0.0;
    if !duration_ok {
        return Err(PsdsError::ZeroDuration);
    }
    if ground_truth.is_empty() {
        return Err(PsdsError::EmptyGroundTruth);
    }
    validate_events(&detections.events, "detection")?;
    validate_events(ground_truth, "ground truth")?;

    // ground truth indexed by clip, then by class
    let mut gt_index: HashMap<&str, BTreeMap<&str, Vec<&EventAnnotation>>> = HashMap::new();
    let mut gt_count: BTreeMap<&str, u64> = BTreeMap::new();
    let mut gt_duration: BTreeMap<&str, f64> = BTreeMap::new();
    for g in ground_truth {
        gt_index
            .entry(&g.clip_id)
            .or_default()
            .entry(&g.class_name)
            .or_default()
            .push(g);
        *gt_count.entry(&g.class_name).or_default() += 1;
        *gt_duration.entry(&g.class_name).or_default() += g.duration();
    }

    let mut class_set: BTreeSet<&str> = gt_count.keys().copied().collect();
    class_set.extend(detections.events.iter().map(|d| d.class_name.as_str()));

    let mut fp: BTreeMap<&str, u64> = BTreeMap::new();
    let mut ct: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
    let mut valid_detections: HashMap<&str, BTreeMap<&str, Vec<&EventAnnotation>>> = HashMap::new();

    for d in &detections.events {
        let clip_gt = gt_index.get(d.clip_id.as_str());
        let same_class: &[&EventAnnotation] = clip_gt
            .and_then(|m| m.get(d.class_name.as_str()))
            .map_or(&[], Vec::as_slice);
        let overlaps: Vec<(f64, f64)> = same_class
            .iter()
            .filter(|g| overlap(d, g) > 0.0)
            .map(|g| (d.onset.max(g.onset), d.offset.min(g.offset)))
            .collect();
        let ratio = union_length(overlaps) / d.duration();
        if ratio >= params.rho_dtc {
            valid_detections
                .entry(&d.clip_id)
                .or_default()
                .entry(&d.class_name)
                .or_default()
                .push(d);
        } else {
            *fp.entry(&d.class_name).or_default() += 1;
            // cross-triggers: per ground-truth event of every other class
            if let Some(clip_gt) = clip_gt {
                for (&other, events) in clip_gt {
                    if other == d.class_name {
                        continue;
                    }
                    for g in events {
                        if overlap(d, g) / d.duration() >= params.rho_cttc {
                            *ct.entry(&d.class_name)
                                .or_default()
                                .entry(other)
                                .or_default() += 1;
                        }
                    }
                }
            }
        }
    }

    let mut tp: BTreeMap<&str, u64> = BTreeMap::new();
    for g in ground_truth {
        let candidates: &[&EventAnnotation] = valid_detections
            .get(g.clip_id.as_str())
            .and_then(|m| m.get(g.class_name.as_str()))
            .map_or(&[], Vec::as_slice);
        let overlaps: Vec<(f64, f64)> = candidates
            .iter()
            .filter(|d| overlap(g, d) > 0.0)
            .map(|d| (g.onset.max(d.onset), g.offset.min(d.offset)))
            .collect();
        if union_length(overlaps) / g.duration() >= params.rho_gtc {
            *tp.entry(&g.class_name).or_default() += 1;
        }
    }

    let seconds_per_hour = 3600.0;
    let gt_classes: Vec<&str> = gt_count.keys().copied().collect();
    let mut rates = PerClassRates::default();
    for class in class_set {
        let tp_c = tp.get(class).copied().unwrap_or(0);
        let gt_c = gt_count.get(class).copied().unwrap_or(0);
        let fp_c = fp.get(class).copied().unwrap_or(0);
        let tpr = if gt_c == 0 {
            log::warn!("class {class:?} has no ground truth; defining its TPR as 0");
            0.0
        } else {
            tp_c as f64 / gt_c as f64
        };
        let ct_row = ct.get(class);
        let mut efpr = fp_c as f64 * seconds_per_hour / total_duration;
        if params.alpha_ct > 0.0 {
            // mean cross-trigger rate over the other ground-truth classes,
            // each normalized by that class's annotated duration
            let others: Vec<&str> = gt_classes.iter().copied().filter(|&c| c != class).collect();
            if !others.is_empty() {
                let mut sum = 0.0;
                for other in &others {
                    let count = ct_row.and_then(|row| row.get(*other)).copied().unwrap_or(0);
                    sum += count as f64 * seconds_per_hour / gt_duration[*other];
                }
                efpr += params.alpha_ct * sum / others.len() as f64;
            }
        }
        rates.classes.insert(
            class.to_string(),
            ClassRates {
                tp: tp_c,
                gt: gt_c,
                fp: fp_c,
                cross_triggers: ct_row
                    .map(|row| row.iter().map(|(&k, &v)| (k.to_string(), v)).collect())
                    .unwrap_or_default(),
                tpr,
                efpr,
            },
        );
    }
    Ok(rates)
}

/// The aggregated PSD-ROC: effective TPR as a right-continuous step function
/// of effective FPR, evaluated on the union grid of per-class breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdRocCurve {
    /// Sorted grid of effective FPR breakpoints, starting at 0.
    pub breakpoints: Vec<f64>,
    /// Effective TPR on `[breakpoints[i], breakpoints[i+1])`.
    pub etpr: Vec<f64>,
    /// Per-class staircase TPR values on the same grid.
    pub per_class: BTreeMap<String, Vec<f64>>,
}

/// Build the PSD-ROC from per-operating-point rates.
///
/// Each class contributes the upper staircase envelope (running maximum of
/// TPR over increasing eFPR, with an implicit point at the origin); classes
/// are aggregated as `max(0, mean - alpha_st * population std)` on the union
/// grid of breakpoints extended by `e_max`.
pub fn build_psd_roc(
    rates: &[PerClassRates],
    params: &PsdsParams,
) -> Result<PsdRocCurve, PsdsError> {
    params.validate()?;
    if rates.is_empty() {
        return Err(PsdsError::NoOperatingPoints);
    }
    let mut classes: BTreeSet<&str> = BTreeSet::new();
    for op in rates {
        classes.extend(op.classes.keys().map(String::as_str));
    }

    let mut breakpoints: Vec<f64> = Vec::new();
    breakpoints.push(0.0);
    breakpoints.push(params.e_max);
    for op in rates {
        breakpoints.extend(op.classes.values().map(|c| c.efpr));
    }
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    let mut per_class: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for &class in &classes {
        // operating points of this class, plus the implicit origin
        let mut points: Vec<(f64, f64)> = vec![(0.0, 0.0)];
        for op in rates {
            if let Some(c) = op.classes.get(class) {
                points.push((c.efpr, c.tpr));
            }
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

        let mut curve = Vec::with_capacity(breakpoints.len());
        let mut idx = 0;
        let mut running_max = 0.0f64;
        for &e in &breakpoints {
            while idx < points.len() && points[idx].0 <= e {
                running_max = running_max.max(points[idx].1);
                idx += 1;
            }
            curve.push(running_max);
        }
        per_class.insert(class.to_string(), curve);
    }

    let n_classes = classes.len() as f64;
    let mut etpr = Vec::with_capacity(breakpoints.len());
    for i in 0..breakpoints.len() {
        let mean = per_class.values().map(|c| c[i]).sum::<f64>() / n_classes;
        let var = per_class
            .values()
            .map(|c| (c[i] - mean) * (c[i] - mean))
            .sum::<f64>()
            / n_classes;
        etpr.push((mean - params.alpha_st * var.sqrt()).max(0.0));
    }
    Ok(PsdRocCurve {
        breakpoints,
        etpr,
        per_class,
    })
}

/// Normalized area under an effective-TPR step curve, integrated exactly up
/// to `e_max`.
pub fn compute_psds(curve: &PsdRocCurve, params: &PsdsParams) -> f64 {
    let e_max = params.e_max;
    let mut area = 0.0;
    for i in 0..curve.breakpoints.len() {
        let start = curve.breakpoints[i];
        if start >= e_max {
            break;
        }
        let end = curve
            .breakpoints
            .get(i + 1)
            .copied()
            .unwrap_or(e_max)
            .min(e_max);
        area += (end - start) * curve.etpr[i];
    }
    area / e_max
}

/// A scored evaluation: the PSDS value plus everything needed to report it.
#[derive(Debug, Clone)]
pub struct PsdsEvaluation {
    pub psds: f64,
    pub per_op: Vec<(f64, PerClassRates)>,
    pub curve: PsdRocCurve,
}

/// Evaluate a family of detection sets against ground truth.
///
/// An empty family scores as a single empty operating point, so "no
/// detections at all" evaluates to PSDS 0 rather than an error.
pub fn evaluate_detection_sets(
    sets: &[DetectionSet],
    ground_truth: &[EventAnnotation],
    params: &PsdsParams,
    total_duration: f64,
) -> Result<PsdsEvaluation, PsdsError> {
    let empty;
    let sets = if sets.is_empty() {
        empty = [DetectionSet {
            operating_point: 0.5,
            events: Vec::new(),
        }];
        &empty[..]
    } else {
        sets
    };
    let mut per_op = Vec::with_capacity(sets.len());
    for set in sets {
        let rates = match_operating_point(set, ground_truth, params, total_duration)?;
        per_op.push((set.operating_point, rates));
    }
    let rates: Vec<PerClassRates> = per_op.iter().map(|(_, r)| r.clone()).collect();
    let curve = build_psd_roc(&rates, params)?;
    let psds = compute_psds(&curve, params);
    Ok(PsdsEvaluation {
        psds,
        per_op,
        curve,
    })
}

/// Write one or more named evaluations as a single report CSV.
///
/// Row kinds:
/// * `operating_point` - per-class TPR/eFPR at each threshold,
/// * `breakpoint` - the aggregated PSD-ROC staircase,
/// * `summary` - the final PSDS value per metric.
pub fn write_report(evaluations: &[(&str, &PsdsEvaluation)], path: &Path) -> Result<(), PsdsError> {
    let mut out = String::from("record,metric,threshold,class,tpr,efpr,etpr,psds\n");
    for (name, eval) in evaluations {
        for (threshold, rates) in &eval.per_op {
            for (class, c) in &rates.classes {
                writeln!(
                    out,
                    "operating_point,{name},{threshold},{class},{},{},,",
                    c.tpr, c.efpr
                )
                .expect("string write");
            }
        }
        for (i, &e) in eval.curve.breakpoints.iter().enumerate() {
            writeln!(out, "breakpoint,{name},,,,{e},{},", eval.curve.etpr[i])
                .expect("string write");
        }
        writeln!(out, "summary,{name},,,,,,{}", eval.psds).expect("string write");
    }
    fs::write(path, out).map_err(|source| PsdsError::Io {
        path: path.to_path_buf(),
        source,
    })
}
