//! From frame-level posteriors to event lists: thresholding, median
//! smoothing, and run decoding, swept over a grid of operating points.
//!
//! Smoothing is applied to the binarized activity, per class column, with a
//! centered median window and symmetric (edge-including) reflect padding.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::label::EventAnnotation;

/// Median window fixed by the reference decoding pipeline.
pub const DEFAULT_MEDIAN_WINDOW: usize = 7;

#[derive(Debug, Error)]
pub enum PostprocessError {
    #[error("posterior matrix needs at least one frame and one class")]
    EmptyMatrix,
    #[error("posterior value {value} at frame {frame}, class {class} outside [0, 1]")]
    ValueOutOfRange {
        frame: usize,
        class: usize,
        value: f64,
    },
    #[error("hop_seconds must be positive, got {0}")]
    InvalidHop(f64),
    #[error("value count {values} does not fill {frames} frames x {classes} classes")]
    ShapeMismatch {
        values: usize,
        frames: usize,
        classes: usize,
    },
    #[error("threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("thresholds must be strictly increasing")]
    UnsortedThresholds,
    #[error("median window must be odd, got {0}")]
    EvenWindow(usize),
    #[error("median window must be at least 1")]
    ZeroWindow,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed posterior file {path}: {detail}")]
    Malformed { path: PathBuf, detail: String },
}

/// Frame-by-class matrix of posterior probabilities for one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    clip_id: String,
    hop_seconds: f64,
    class_names: Vec<String>,
    /// Row-major, `n_frames * n_classes` values in `[0, 1]`.
    values: Vec<f64>,
    n_frames: usize,
}

impl PosteriorMatrix {
    pub fn new(
        clip_id: String,
        hop_seconds: f64,
        class_names: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self, PostprocessError> {
        if !(hop_seconds.is_finite() && hop_seconds > 0.0) {
            return Err(PostprocessError::InvalidHop(hop_seconds));
        }
        let n_classes = class_names.len();
        if n_classes == 0 || values.is_empty() {
            return Err(PostprocessError::EmptyMatrix);
        }
        if !values.len().is_multiple_of(n_classes) {
            return Err(PostprocessError::ShapeMismatch {
                values: values.len(),
                frames: values.len() / n_classes,
                classes: n_classes,
            });
        }
        let n_frames = values.len() / n_classes;
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(PostprocessError::ValueOutOfRange {
                    frame: i / n_classes,
                    class: i % n_classes,
                    value: v,
                });
            }
        }
        Ok(Self {
            clip_id,
            hop_seconds,
            class_names,
            values,
            n_frames,
        })
    }

    pub fn clip_id(&self) -> &str {
        &self.clip_id
    }

    pub fn hop_seconds(&self) -> f64 {
        self.hop_seconds
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn value(&self, frame: usize, class: usize) -> f64 {
        self.values[frame * self.n_classes() + class]
    }
}

/// Binary activity matrix with the same geometry as its source posteriors.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityMatrix {
    clip_id: String,
    hop_seconds: f64,
    class_names: Vec<String>,
    values: Vec<bool>,
    n_frames: usize,
}

impl ActivityMatrix {
    pub fn clip_id(&self) -> &str {
        &self.clip_id
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn active(&self, frame: usize, class: usize) -> bool {
        self.values[frame * self.n_classes() + class]
    }

    pub fn count_active(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    fn column(&self, class: usize) -> Vec<bool> {
        (0..self.n_frames).map(|f| self.active(f, class)).collect()
    }

    fn set_column(&mut self, class: usize, column: &[bool]) {
        let n_classes = self.n_classes();
        for (f, &v) in column.iter().enumerate() {
            self.values[f * n_classes + class] = v;
        }
    }
}

/// Threshold posteriors into binary activity: active iff `posterior >=
/// threshold`.
pub fn binarize(
    posteriors: &PosteriorMatrix,
    threshold: f64,
) -> Result<ActivityMatrix, PostprocessError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(PostprocessError::InvalidThreshold(threshold));
    }
    Ok(ActivityMatrix {
        clip_id: posteriors.clip_id.clone(),
        hop_seconds: posteriors.hop_seconds,
        class_names: posteriors.class_names.clone(),
        values: posteriors.values.iter().map(|&v| v >= threshold).collect(),
        n_frames: posteriors.n_frames,
    })
}

/// Symmetric padding lookup: virtual index `pos` (which may be negative or
/// past the end) folded back into `[0, n)` by mirroring across the edges with
/// the boundary sample included.
fn reflect_index(pos: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let m = pos.rem_euclid(period);
    if m < n as i64 {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

fn check_window(window: usize) -> Result<(), PostprocessError> {
    if window == 0 {
        return Err(PostprocessError::ZeroWindow);
    }
    if window.is_multiple_of(2) {
        return Err(PostprocessError::EvenWindow(window));
    }
    Ok(())
}

/// Centered sliding median of a real-valued sequence.
pub fn median_filter(x: &[f64], window: usize) -> Result<Vec<f64>, PostprocessError> {
    check_window(window)?;
    if window == 1 || x.is_empty() {
        return Ok(x.to_vec());
    }
    let pad = (window - 1) / 2;
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    let mut buf = vec![0.0f64; window];
    for i in 0..n {
        for (k, slot) in buf.iter_mut().enumerate() {
            *slot = x[reflect_index(i as i64 + k as i64 - pad as i64, n)];
        }
        let (_, median, _) = buf.select_nth_unstable_by(pad, f64::total_cmp);
        out.push(*median);
    }
    Ok(out)
}

/// Centered sliding median of a binary sequence (majority vote per window).
pub fn median_filter_binary(x: &[bool], window: usize) -> Result<Vec<bool>, PostprocessError> {
    check_window(window)?;
    if window == 1 || x.is_empty() {
        return Ok(x.to_vec());
    }
    let pad = (window - 1) / 2;
    let n = x.len();
    let majority = pad + 1;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let ones = (0..window)
            .filter(|&k| x[reflect_index(i as i64 + k as i64 - pad as i64, n)])
            .count();
        out.push(ones >= majority);
    }
    Ok(out)
}

/// Median-smooth every class column of an activity matrix.
pub fn median_filter_activity(
    activity: &ActivityMatrix,
    window: usize,
) -> Result<ActivityMatrix, PostprocessError> {
    let mut out = activity.clone();
    for class in 0..activity.n_classes() {
        let filtered = median_filter_binary(&activity.column(class), window)?;
        out.set_column(class, &filtered);
    }
    Ok(out)
}

/// Turn maximal runs of active frames into events.
///
/// A run over frames `[i, j]` becomes an event spanning
/// `[i * hop, (j + 1) * hop)` seconds.
pub fn decode_events(activity: &ActivityMatrix) -> Vec<EventAnnotation> {
    let mut events = Vec::new();
    for (class, name) in activity.class_names.iter().enumerate() {
        let mut run_start: Option<usize> = None;
        for frame in 0..=activity.n_frames {
            let on = frame < activity.n_frames && activity.active(frame, class);
            match (run_start, on) {
                (None, true) => run_start = Some(frame),
                (Some(start), false) => {
                    events.push(EventAnnotation {
                        clip_id: activity.clip_id.clone(),
                        onset: start as f64 * activity.hop_seconds,
                        offset: frame as f64 * activity.hop_seconds,
                        class_name: name.clone(),
                    });
                    run_start = None;
                }
                _ => {}
            }
        }
    }
    events
}

/// One operating point: the threshold it was decoded at and the resulting
/// events across all clips.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSet {
    pub operating_point: f64,
    pub events: Vec<EventAnnotation>,
}

/// The default operating-point grid: 50 thresholds 0.01, 0.03, ..., 0.99.
pub fn default_thresholds() -> Vec<f64> {
    (0..50).map(|i| (2 * i + 1) as f64 / 100.0).collect()
}

/// Decode every clip at every threshold: binarize, median-filter each class
/// column, and collect the decoded events per operating point.
pub fn sweep_operating_points(
    posteriors: &[PosteriorMatrix],
    thresholds: &[f64],
    median_window: usize,
) -> Result<Vec<DetectionSet>, PostprocessError> {
    for &t in thresholds {
        if !(t > 0.0 && t < 1.0) {
            return Err(PostprocessError::InvalidThreshold(t));
        }
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PostprocessError::UnsortedThresholds);
    }
    check_window(median_window)?;

    thresholds
        .par_iter()
        .map(|&threshold| {
            let mut events = Vec::new();
            for p in posteriors {
                let activity = binarize(p, threshold)?;
                let smoothed = median_filter_activity(&activity, median_window)?;
                events.extend(decode_events(&smoothed));
            }
            crate::label::sort_events(&mut events);
            Ok(DetectionSet {
                operating_point: threshold,
                events,
            })
        })
        .collect()
}

/// File name used for one operating point's detections.
pub fn detection_file_name(threshold: f64) -> String {
    format!("detections_t{threshold}.tsv")
}

/// Write one strong-label TSV per operating point into `dir`.
pub fn write_detection_sets(sets: &[DetectionSet], dir: &Path) -> Result<(), PostprocessError> {
    fs::create_dir_all(dir).map_err(|source| PostprocessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for set in sets {
        let path = dir.join(detection_file_name(set.operating_point));
        crate::label::write_strong_labels(&set.events, &path).map_err(|e| match e {
            crate::label::LabelError::Io { path, source } => PostprocessError::Io { path, source },
            other => PostprocessError::Malformed {
                path: path.clone(),
                detail: other.to_string(),
            },
        })?;
    }
    Ok(())
}

/// Write a posterior matrix in the on-disk layout: a `hop_seconds=<v>` line,
/// a class-name header row, then one CSV row of posteriors per frame.
pub fn write_posteriors(matrix: &PosteriorMatrix, path: &Path) -> Result<(), PostprocessError> {
    let mut out = format!("hop_seconds={}\n", matrix.hop_seconds);
    out.push_str(&matrix.class_names.join(","));
    out.push('\n');
    for frame in 0..matrix.n_frames {
        for class in 0..matrix.n_classes() {
            if class > 0 {
                out.push(',');
            }
            write!(out, "{}", matrix.value(frame, class)).expect("string write");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| PostprocessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Read a posterior matrix written by [`write_posteriors`]. The clip id is
/// the file stem.
pub fn read_posteriors(path: &Path) -> Result<PosteriorMatrix, PostprocessError> {
    let malformed = |detail: &str| PostprocessError::Malformed {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    };
    let text = fs::read_to_string(path).map_err(|source| PostprocessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| malformed("empty file"))?;
    let hop_seconds: f64 = header
        .strip_prefix("hop_seconds=")
        .ok_or_else(|| malformed("first line must be hop_seconds=<v>"))?
        .parse()
        .map_err(|_| malformed("bad hop_seconds value"))?;
    let class_line = lines
        .next()
        .ok_or_else(|| malformed("missing class-name row"))?;
    let class_names: Vec<String> = class_line.split(',').map(str::to_string).collect();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: Vec<&str> = line.split(',').collect();
        if row.len() != class_names.len() {
            return Err(malformed(&format!(
                "row {} has {} values, expected {}",
                i + 3,
                row.len(),
                class_names.len()
            )));
        }
        for v in row {
            values.push(
                v.parse::<f64>()
                    .map_err(|_| malformed(&format!("bad value {v:?} on row {}", i + 3)))?,
            );
        }
    }
    let clip_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    PosteriorMatrix::new(clip_id, hop_seconds, class_names, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(values: Vec<f64>, n_classes: usize) -> PosteriorMatrix {
        let class_names = (0..n_classes).map(|i| format!("c{i}")).collect();
        PosteriorMatrix::new("clip".to_string(), 0.08, class_names, values).unwrap()
    }

    #[test]
    fn binarize_applies_inclusive_threshold() {
        let m = matrix(vec![0.9, 0.9, 0.9, 0.9], 2);
        let a = binarize(&m, 0.5).unwrap();
        assert_eq!(a.count_active(), 4);

        let m = matrix(vec![0.5, 0.49], 1);
        let a = binarize(&m, 0.5).unwrap();
        assert!(a.active(0, 0));
        assert!(!a.active(1, 0));

        let m = matrix(vec![0.0, 0.0], 1);
        assert_eq!(binarize(&m, 0.5).unwrap().count_active(), 0);
    }

    #[test]
    fn binarize_rejects_degenerate_thresholds() {
        let m = matrix(vec![0.5], 1);
        assert!(binarize(&m, 0.0).is_err());
        assert!(binarize(&m, 1.0).is_err());
    }

    #[test]
    fn posterior_values_outside_unit_interval_are_rejected() {
        let err =
            PosteriorMatrix::new("c".into(), 0.08, vec!["a".into()], vec![0.5, 1.2]).unwrap_err();
        assert!(matches!(err, PostprocessError::ValueOutOfRange { .. }));
    }

    #[test]
    fn constant_column_is_unchanged_by_median() {
        let x = vec![0.7; 20];
        assert_eq!(median_filter(&x, 7).unwrap(), x);
        let b = vec![true; 20];
        assert_eq!(median_filter_binary(&b, 7).unwrap(), b);
    }

    #[test]
    fn window_one_is_identity() {
        let x = vec![0.1, 0.9, 0.2];
        assert_eq!(median_filter(&x, 1).unwrap(), x);
    }

    #[test]
    fn even_window_is_rejected() {
        assert!(matches!(
            median_filter(&[0.0], 4),
            Err(PostprocessError::EvenWindow(4))
        ));
    }

    #[test]
    fn known_binary_sequence_filters_as_expected() {
        let x: Vec<bool> = [0, 1, 0, 0, 1, 1, 1, 0, 0]
            .iter()
            .map(|&v| v == 1)
            .collect();
        let want: Vec<bool> = [0, 0, 0, 1, 1, 0, 0, 0, 0]
            .iter()
            .map(|&v| v == 1)
            .collect();
        assert_eq!(median_filter_binary(&x, 7).unwrap(), want);
        // the real-valued path agrees
        let xf: Vec<f64> = x.iter().map(|&v| v as u8 as f64).collect();
        let got = median_filter(&xf, 7).unwrap();
        let got_b: Vec<bool> = got.iter().map(|&v| v > 0.5).collect();
        assert_eq!(got_b, want);
    }

    #[test]
    fn reflect_handles_sequences_shorter_than_window() {
        // [a, b] padded symmetrically: b a | a b | b a
        assert_eq!(median_filter(&[1.0, 2.0], 5).unwrap().len(), 2);
        assert_eq!(median_filter(&[3.0], 7).unwrap(), vec![3.0]);
        assert_eq!(reflect_index(-1, 2), 0);
        assert_eq!(reflect_index(-2, 2), 1);
        assert_eq!(reflect_index(2, 2), 1);
        assert_eq!(reflect_index(3, 2), 0);
    }

    fn activity(bits: &[u8], hop: f64) -> ActivityMatrix {
        ActivityMatrix {
            clip_id: "clip".to_string(),
            hop_seconds: hop,
            class_names: vec!["dog".to_string()],
            values: bits.iter().map(|&b| b == 1).collect(),
            n_frames: bits.len(),
        }
    }

    #[test]
    fn decode_produces_no_events_for_silence() {
        assert!(decode_events(&activity(&[0, 0, 0], 0.08)).is_empty());
    }

    #[test]
    fn decode_converts_run_to_seconds() {
        let events = decode_events(&activity(&[0, 1, 1, 1, 0], 0.08));
        assert_eq!(events.len(), 1);
        assert!((events[0].onset - 0.08).abs() < 1e-12);
        assert!((events[0].offset - 0.32).abs() < 1e-12);
    }

    #[test]
    fn decode_splits_runs_separated_by_one_frame() {
        let events = decode_events(&activity(&[1, 1, 0, 1], 0.1));
        assert_eq!(events.len(), 2);
    }

    #[test]
    fn decode_handles_run_to_the_last_frame() {
        let events = decode_events(&activity(&[0, 1, 1], 0.1));
        assert_eq!(events.len(), 1);
        assert!((events[0].offset - 0.3).abs() < 1e-12);
    }

    #[test]
    fn default_grid_is_fifty_points() {
        let grid = default_thresholds();
        assert_eq!(grid.len(), 50);
        assert_eq!(grid[0], 0.01);
        assert_eq!(grid[1], 0.03);
        assert_eq!(grid[49], 0.99);
    }

    #[test]
    fn sweep_validates_thresholds() {
        let m = matrix(vec![0.5, 0.5], 1);
        assert!(sweep_operating_points(std::slice::from_ref(&m), &[0.5, 0.5], 7).is_err());
        assert!(sweep_operating_points(std::slice::from_ref(&m), &[0.9, 0.5], 7).is_err());
        assert!(sweep_operating_points(&[m], &[0.5], 7).unwrap().len() == 1);
    }

    #[test]
    fn raising_threshold_never_adds_active_frames() {
        let values: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 / 100.0).collect();
        let m = matrix(values, 2);
        let low = binarize(&m, 0.3).unwrap();
        let high = binarize(&m, 0.7).unwrap();
        for f in 0..m.n_frames() {
            for c in 0..2 {
                assert!(!high.active(f, c) || low.active(f, c));
            }
        }
    }

    #[test]
    fn sweep_on_smooth_random_posteriors_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        // isolated raised-cosine bumps: the shape sed posteriors take for
        // well-separated events
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5EED);
        let mut posteriors = Vec::new();
        for clip in 0..3 {
            let n_frames = 250usize;
            let n_classes = 3usize;
            let mut values = vec![0.0f64; n_frames * n_classes];
            for class in 0..n_classes {
                let mut occupied: Vec<(usize, usize)> = Vec::new();
                for _ in 0..3 {
                    let width = rng.gen_range(12..30usize);
                    let height: f64 = rng.gen_range(0.3..1.0);
                    for _attempt in 0..50 {
                        let start = rng.gen_range(0..n_frames - width);
                        if occupied
                            .iter()
                            .all(|&(a, b)| start + width + 4 <= a || b + 4 <= start)
                        {
                            occupied.push((start, start + width));
                            for k in 0..width {
                                let phase = (k as f64 + 0.5) / width as f64;
                                let bump = height * (std::f64::consts::PI * phase).sin().powi(2);
                                values[(start + k) * n_classes + class] = bump;
                            }
                            break;
                        }
                    }
                }
            }
            posteriors.push(
                PosteriorMatrix::new(
                    format!("clip{clip}"),
                    0.08,
                    (0..n_classes).map(|c| format!("c{c}")).collect(),
                    values,
                )
                .unwrap(),
            );
        }

        let grid = default_thresholds();
        let sets = sweep_operating_points(&posteriors, &grid, 7).unwrap();
        assert_eq!(sets.len(), 50);

        // brute-force recomputation of the whole pipeline per threshold
        for set in &sets {
            let mut expected = Vec::new();
            for p in &posteriors {
                for class in 0..p.n_classes() {
                    let column: Vec<f64> = (0..p.n_frames()).map(|f| p.value(f, class)).collect();
                    let bits: Vec<f64> = column
                        .iter()
                        .map(|&v| if v >= set.operating_point { 1.0 } else { 0.0 })
                        .collect();
                    let smoothed = oracle_median(&bits, 7);
                    let mut run_start: Option<usize> = None;
                    for frame in 0..=smoothed.len() {
                        let on = frame < smoothed.len() && smoothed[frame] > 0.5;
                        match (run_start, on) {
                            (None, true) => run_start = Some(frame),
                            (Some(start), false) => {
                                expected.push(EventAnnotation {
                                    clip_id: p.clip_id().to_string(),
                                    onset: start as f64 * 0.08,
                                    offset: frame as f64 * 0.08,
                                    class_name: p.class_names()[class].clone(),
                                });
                                run_start = None;
                            }
                            _ => {}
                        }
                    }
                }
            }
            crate::label::sort_events(&mut expected);
            assert_eq!(set.events, expected, "threshold {}", set.operating_point);
        }

        // empirically, counts decay as the threshold rises on this instance
        for pair in sets.windows(2) {
            assert!(
                pair[1].events.len() <= pair[0].events.len(),
                "count rose from {} to {} between thresholds {} and {}",
                pair[0].events.len(),
                pair[1].events.len(),
                pair[0].operating_point,
                pair[1].operating_point
            );
        }
    }

    #[test]
    fn posterior_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = matrix(vec![0.0, 0.25, 0.5, 0.75, 1.0, 0.125], 2);
        let path = dir.path().join("clip_x.csv");
        write_posteriors(&m, &path).unwrap();
        let back = read_posteriors(&path).unwrap();
        assert_eq!(back.clip_id(), "clip_x");
        assert_eq!(back.hop_seconds(), 0.08);
        assert_eq!(back.class_names(), m.class_names());
        for f in 0..m.n_frames() {
            for c in 0..2 {
                assert_eq!(back.value(f, c), m.value(f, c));
            }
        }
    }

    #[test]
    fn detection_file_names_embed_threshold() {
        assert_eq!(detection_file_name(0.01), "detections_t0.01.tsv");
        assert_eq!(detection_file_name(0.5), "detections_t0.5.tsv");
    }

    /// Brute-force oracle: explicit symmetric padding, full sort, middle
    /// element.
    fn oracle_median(x: &[f64], window: usize) -> Vec<f64> {
        let pad = (window - 1) / 2;
        let n = x.len();
        let mut padded = Vec::with_capacity(n + 2 * pad);
        for i in (0..pad).rev() {
            padded.push(x[reflect_index(-(i as i64) - 1, n)]);
        }
        // left pad built above mirrors x[pad-1..0]; rebuild explicitly to stay
        // independent of reflect_index
        padded.clear();
        let mut left: Vec<f64> = Vec::new();
        let mut idx = 0usize;
        let mut dir_down = false;
        for _ in 0..pad {
            left.push(x[idx]);
            if dir_down {
                if idx == 0 {
                    dir_down = false;
                    // stay, next mirrors back up
                } else {
                    idx -= 1;
                }
            } else if idx + 1 == n {
                dir_down = true;
            } else {
                idx += 1;
            }
        }
        left.reverse();
        padded.extend(left);
        padded.extend_from_slice(x);
        let mut idx = n - 1;
        let mut dir_up = false;
        for _ in 0..pad {
            padded.push(x[idx]);
            if dir_up {
                if idx + 1 == n {
                    dir_up = false;
                } else {
                    idx += 1;
                }
            } else if idx == 0 {
                dir_up = true;
            } else {
                idx -= 1;
            }
        }
        (0..n)
            .map(|i| {
                let mut w: Vec<f64> = padded[i..i + window].to_vec();
                w.sort_by(f64::total_cmp);
                w[pad]
            })
            .collect()
    }

    proptest! {
        #[test]
        fn median_matches_brute_force_oracle(
            x in proptest::collection::vec(0.0f64..1.0, 1..60),
            window in prop::sample::select(vec![1usize, 3, 5, 7, 9]),
        ) {
            let got = median_filter(&x, window).unwrap();
            let want = oracle_median(&x, window);
            prop_assert_eq!(got, want);
        }

        #[test]
        fn median_output_values_come_from_the_window(
            x in proptest::collection::vec(0.0f64..1.0, 1..50),
        ) {
            let got = median_filter(&x, 7).unwrap();
            for &v in &got {
                prop_assert!(x.contains(&v));
            }
        }

        #[test]
        fn binary_median_has_complement_symmetry(
            x in proptest::collection::vec(any::<bool>(), 1..80),
            window in prop::sample::select(vec![1usize, 3, 5, 7]),
        ) {
            let direct = median_filter_binary(&x, window).unwrap();
            let flipped: Vec<bool> = x.iter().map(|&v| !v).collect();
            let complement: Vec<bool> = median_filter_binary(&flipped, window)
                .unwrap()
                .iter()
                .map(|&v| !v)
                .collect();
            prop_assert_eq!(direct, complement);
        }

        #[test]
        fn decode_then_rasterize_is_identity(
            bits in proptest::collection::vec(0u8..2, 1..60),
        ) {
            let a = activity(&bits, 0.08);
            let events = decode_events(&a);
            // rasterize back
            let mut frames = vec![false; bits.len()];
            for e in &events {
                let start = (e.onset / 0.08).round() as usize;
                let end = (e.offset / 0.08).round() as usize;
                for f in frames.iter_mut().take(end).skip(start) {
                    *f = true;
                }
            }
            let want: Vec<bool> = bits.iter().map(|&b| b == 1).collect();
            prop_assert_eq!(frames, want);
        }
    }
}
