//! Strong-label event annotations and the tab-separated formats that carry
//! them: `filename<TAB>onset<TAB>offset<TAB>event_label` for events and
//! `filename<TAB>duration` for clip durations.
//!
//! Filenames in the files carry a `.wav` extension; in-memory `clip_id`s are
//! the bare stems.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} line {line}: expected {expected} tab-separated fields, got {got}")]
    FieldCount {
        path: PathBuf,
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("{path} line {line}: bad number {value:?}")]
    BadNumber {
        path: PathBuf,
        line: usize,
        value: String,
    },
    #[error("{path} line {line}: onset {onset} not before offset {offset}")]
    BadInterval {
        path: PathBuf,
        line: usize,
        onset: f64,
        offset: f64,
    },
}

/// One labeled event: a class active over `[onset, offset)` seconds of a clip.
#[derive(Debug, Clone, PartialEq)]
pub struct EventAnnotation {
    pub clip_id: String,
    pub onset: f64,
    pub offset: f64,
    pub class_name: String,
}

impl EventAnnotation {
    pub fn duration(&self) -> f64 {
        self.offset - self.onset
    }
}

/// Strip a trailing `.wav` so file columns and clip ids compare equal.
pub fn clip_id_from_filename(name: &str) -> String {
    name.strip_suffix(".wav").unwrap_or(name).to_string()
}

const EVENT_HEADER: &str = "filename\tonset\toffset\tevent_label";
const DURATION_HEADER: &str = "filename\tduration";

/// Write events as a strong-label TSV with a header row. Onsets and offsets
/// are printed with three fractional digits.
pub fn write_strong_labels(events: &[EventAnnotation], path: &Path) -> Result<(), LabelError> {
    let mut out = String::from(EVENT_HEADER);
    out.push('\n');
    for e in events {
        writeln!(
            out,
            "{}.wav\t{:.3}\t{:.3}\t{}",
            e.clip_id, e.onset, e.offset, e.class_name
        )
        .expect("string write");
    }
    fs::write(path, out).map_err(|source| LabelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Read a strong-label TSV. A header row is skipped when present; events come
/// back sorted by (clip, class, onset).
pub fn read_strong_labels(path: &Path) -> Result<Vec<EventAnnotation>, LabelError> {
    let text = fs::read_to_string(path).map_err(|source| LabelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.is_empty() || (line_no == 1 && line == EVENT_HEADER) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(LabelError::FieldCount {
                path: path.to_path_buf(),
                line: line_no,
                expected: 4,
                got: fields.len(),
            });
        }
        let num = |v: &str| -> Result<f64, LabelError> {
            v.parse().map_err(|_| LabelError::BadNumber {
                path: path.to_path_buf(),
                line: line_no,
                value: v.to_string(),
            })
        };
        let onset = num(fields[1])?;
        let offset = num(fields[2])?;
        let well_formed = onset >= 0.0 && onset < offset;
        if !well_formed {
            return Err(LabelError::BadInterval {
                path: path.to_path_buf(),
                line: line_no,
                onset,
                offset,
            });
        }
        events.push(EventAnnotation {
            clip_id: clip_id_from_filename(fields[0]),
            onset,
            offset,
            class_name: fields[3].to_string(),
        });
    }
    sort_events(&mut events);
    Ok(events)
}

/// Canonical event order used by every emitter in this crate.
pub fn sort_events(events: &mut [EventAnnotation]) {
    events.sort_by(|a, b| {
        a.clip_id
            .cmp(&b.clip_id)
            .then_with(|| a.class_name.cmp(&b.class_name))
            .then_with(|| a.onset.total_cmp(&b.onset))
            .then_with(|| a.offset.total_cmp(&b.offset))
    });
}

/// Write a clip-duration TSV (`filename<TAB>duration`).
pub fn write_durations(durations: &BTreeMap<String, f64>, path: &Path) -> Result<(), LabelError> {
    let mut out = String::from(DURATION_HEADER);
    out.push('\n');
    for (clip_id, dur) in durations {
        writeln!(out, "{clip_id}.wav\t{dur:.3}").expect("string write");
    }
    fs::write(path, out).map_err(|source| LabelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Read a clip-duration TSV into clip_id -> seconds.
pub fn read_durations(path: &Path) -> Result<BTreeMap<String, f64>, LabelError> {
    let text = fs::read_to_string(path).map_err(|source| LabelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.is_empty() || (line_no == 1 && line == DURATION_HEADER) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(LabelError::FieldCount {
                path: path.to_path_buf(),
                line: line_no,
                expected: 2,
                got: fields.len(),
            });
        }
        let dur: f64 = fields[1].parse().map_err(|_| LabelError::BadNumber {
            path: path.to_path_buf(),
            line: line_no,
            value: fields[1].to_string(),
        })?;
        out.insert(clip_id_from_filename(fields[0]), dur);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn event(clip: &str, onset: f64, offset: f64, class: &str) -> EventAnnotation {
        EventAnnotation {
            clip_id: clip.to_string(),
            onset,
            offset,
            class_name: class.to_string(),
        }
    }

    #[test]
    fn strong_label_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.tsv");
        let events = vec![
            event("clip_b", 1.5, 2.25, "dog"),
            event("clip_a", 0.0, 10.0, "blender"),
        ];
        write_strong_labels(&events, &path).unwrap();
        let back = read_strong_labels(&path).unwrap();
        assert_eq!(back.len(), 2);
        // sorted by clip id on read
        assert_eq!(back[0].clip_id, "clip_a");
        assert_eq!(back[1], event("clip_b", 1.5, 2.25, "dog"));
    }

    #[test]
    fn labels_are_written_with_three_decimals_and_wav_suffix() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.tsv");
        write_strong_labels(&[event("c1", 0.5, 1.0 / 3.0 + 1.0, "dog")], &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "filename\tonset\toffset\tevent_label\nc1.wav\t0.500\t1.333\tdog\n"
        );
    }

    #[test]
    fn header_only_file_reads_as_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.tsv");
        write_strong_labels(&[], &path).unwrap();
        assert!(read_strong_labels(&path).unwrap().is_empty());
    }

    #[test]
    fn inverted_interval_is_rejected_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tsv");
        fs::write(&path, "c.wav\t2.0\t1.0\tdog\n").unwrap();
        match read_strong_labels(&path).unwrap_err() {
            LabelError::BadInterval { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn durations_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("durations.tsv");
        let mut durations = BTreeMap::new();
        durations.insert("clip_a".to_string(), 10.0);
        durations.insert("clip_b".to_string(), 7.5);
        write_durations(&durations, &path).unwrap();
        let back = read_durations(&path).unwrap();
        assert_eq!(back, durations);
    }
}
