//! Soundscape mixture synthesis: place trimmed foreground events over real
//! backgrounds at sampled SNRs and emit the exact strong labels alongside.
//!
//! Rendering is deterministic: each clip's randomness comes from a splittable
//! hash of (seed, clip index), so datasets are byte-identical across runs and
//! thread counts, and any clip can be re-rendered in isolation.

mod render;

pub use render::{gain_for_snr, render, sample_spec, synthesize_set, RenderedClip};

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio_io::{self, AudioClip, AudioError};
use crate::envelope::{self, EnvelopeError, EnvelopeParams};
use crate::label::EventAnnotation;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("foreground class directory {class:?} contains no wav files")]
    EmptyClass { class: String },
    #[error("no foreground class directories under {0}")]
    NoClasses(PathBuf),
    #[error("no background wav files under {0}")]
    NoBackground(PathBuf),
    #[error("foreground {0} is silent after trimming; it cannot be placed at a target snr")]
    SilentForeground(PathBuf),
    #[error("background {0} is silent; it cannot anchor a target snr")]
    SilentBackground(PathBuf),
    #[error("background span [{start}, {end}) of {path} is silent")]
    SilentBackgroundSpan {
        path: PathBuf,
        start: usize,
        end: usize,
    },
    #[error("file {0} is not part of the loaded sound bank")]
    UnknownFile(PathBuf),
    #[error("sound bank has no {0}")]
    EmptyBank(&'static str),
    #[error("invalid synthesis parameters: {0}")]
    InvalidParams(String),
    #[error("manifest error on {path}: {detail}")]
    Manifest { path: PathBuf, detail: String },
}

/// Audio files available for mixing: one foreground list per class plus a
/// flat background pool. Entries are lexicographically sorted so discovery is
/// deterministic.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    pub foreground: BTreeMap<String, Vec<PathBuf>>,
    pub background: Vec<PathBuf>,
}

fn wav_files(dir: &Path) -> Result<Vec<PathBuf>, SynthError> {
    let io_err = |source| SynthError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        let is_wav = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
        if path.is_file() && is_wav {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

impl Catalog {
    /// Merge the class subdirectories of `dir` into the foreground map.
    pub fn add_foreground_dir(&mut self, dir: &Path) -> Result<(), SynthError> {
        let io_err = |source| SynthError::Io {
            path: dir.to_path_buf(),
            source,
        };
        let mut found_class = false;
        for entry in fs::read_dir(dir).map_err(io_err)? {
            let path = entry.map_err(io_err)?.path();
            if !path.is_dir() {
                continue;
            }
            found_class = true;
            let class = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let files = wav_files(&path)?;
            if files.is_empty() {
                return Err(SynthError::EmptyClass { class });
            }
            let slot = self.foreground.entry(class).or_default();
            slot.extend(files);
            slot.sort();
            slot.dedup();
        }
        if !found_class {
            return Err(SynthError::NoClasses(dir.to_path_buf()));
        }
        Ok(())
    }

    /// Merge the wav files of `dir` into the background pool.
    pub fn add_background_dir(&mut self, dir: &Path) -> Result<(), SynthError> {
        let files = wav_files(dir)?;
        if files.is_empty() {
            return Err(SynthError::NoBackground(dir.to_path_buf()));
        }
        self.background.extend(files);
        self.background.sort();
        self.background.dedup();
        Ok(())
    }

    pub fn classes(&self) -> Vec<&str> {
        self.foreground.keys().map(String::as_str).collect()
    }
}

/// Discover a catalog from a foreground directory (one subdirectory per
/// class) and a flat background directory.
pub fn load_catalog(fg_dir: &Path, bg_dir: &Path) -> Result<Catalog, SynthError> {
    let mut catalog = Catalog::default();
    catalog.add_foreground_dir(fg_dir)?;
    catalog.add_background_dir(bg_dir)?;
    Ok(catalog)
}

/// Everything that controls one synthesis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    /// Mixture length in seconds.
    pub duration: f64,
    pub events_min: u32,
    pub events_max: u32,
    /// Event-over-background level range in dB.
    pub snr_min: f64,
    pub snr_max: f64,
    /// Mixtures are scaled down to this peak when they exceed it.
    pub peak_limit: f64,
    /// Relative envelope threshold used to trim foreground silence.
    pub trim_threshold: f64,
    pub sample_rate: u32,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            duration: 10.0,
            events_min: 1,
            events_max: 5,
            snr_min: 6.0,
            snr_max: 30.0,
            peak_limit: 0.95,
            trim_threshold: 0.05,
            sample_rate: 16_000,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: String| Err(SynthError::InvalidParams(msg));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return fail(format!("duration {} must be positive", self.duration));
        }
        if self.events_max < self.events_min {
            return fail(format!(
                "events_max {} < events_min {}",
                self.events_max, self.events_min
            ));
        }
        let snr_ordered = self.snr_min <= self.snr_max;
        if !snr_ordered {
            return fail(format!(
                "snr_min {} > snr_max {}",
                self.snr_min, self.snr_max
            ));
        }
        if !(self.peak_limit > 0.0 && self.peak_limit <= 1.0) {
            return fail(format!("peak_limit {} outside (0, 1]", self.peak_limit));
        }
        if !(self.trim_threshold > 0.0 && self.trim_threshold < 1.0) {
            return fail(format!(
                "trim_threshold {} outside (0, 1)",
                self.trim_threshold
            ));
        }
        if self.sample_rate == 0 {
            return fail("sample_rate must be positive".to_string());
        }
        Ok(())
    }

    pub fn duration_samples(&self) -> usize {
        (self.duration * self.sample_rate as f64).round() as usize
    }
}

/// One audio file prepared for mixing: foregrounds arrive trimmed to their
/// active region and resampled; backgrounds arrive resampled.
#[derive(Debug, Clone)]
pub struct PreparedSource {
    pub path: PathBuf,
    pub clip: AudioClip,
    /// RMS over the full prepared clip.
    pub rms: f64,
}

/// A catalog loaded into memory and normalized to the target sample rate.
#[derive(Debug, Clone)]
pub struct SoundBank {
    foreground: BTreeMap<String, Vec<PreparedSource>>,
    background: Vec<PreparedSource>,
    by_path: HashMap<PathBuf, (Option<String>, usize)>,
    sample_rate: u32,
}

impl SoundBank {
    /// Read, trim, and resample every catalog entry.
    ///
    /// Foregrounds that are silent after trimming are rejected here so a
    /// render can never hit an unusable sample.
    pub fn load(catalog: &Catalog, params: &SynthParams) -> Result<Self, SynthError> {
        params.validate()?;
        let mut bank = SoundBank {
            foreground: BTreeMap::new(),
            background: Vec::new(),
            by_path: HashMap::new(),
            sample_rate: params.sample_rate,
        };
        for (class, files) in &catalog.foreground {
            let mut prepared = Vec::with_capacity(files.len());
            for (i, path) in files.iter().enumerate() {
                let raw = audio_io::read_wav(path)?;
                let trim_params = EnvelopeParams::from_latent_rate(
                    raw.sample_rate(),
                    envelope::DEFAULT_LATENT_RATE,
                )?;
                let trimmed = envelope::trim_silence(&raw, &trim_params, params.trim_threshold)?;
                let clip = audio_io::resample(&trimmed, params.sample_rate)?;
                if clip.is_empty() {
                    return Err(SynthError::SilentForeground(path.clone()));
                }
                let rms = audio_io::rms(&clip, 0, clip.len())?;
                if rms <= 0.0 {
                    return Err(SynthError::SilentForeground(path.clone()));
                }
                bank.by_path.insert(path.clone(), (Some(class.clone()), i));
                prepared.push(PreparedSource {
                    path: path.clone(),
                    clip,
                    rms,
                });
            }
            bank.foreground.insert(class.clone(), prepared);
        }
        for (i, path) in catalog.background.iter().enumerate() {
            let raw = audio_io::read_wav(path)?;
            let clip = audio_io::resample(&raw, params.sample_rate)?;
            if clip.is_empty() {
                return Err(SynthError::SilentBackground(path.clone()));
            }
            let rms = audio_io::rms(&clip, 0, clip.len())?;
            if rms <= 0.0 {
                return Err(SynthError::SilentBackground(path.clone()));
            }
            bank.by_path.insert(path.clone(), (None, i));
            bank.background.push(PreparedSource {
                path: path.clone(),
                clip,
                rms,
            });
        }
        if bank.background.is_empty() {
            return Err(SynthError::EmptyBank("backgrounds"));
        }
        Ok(bank)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn classes(&self) -> Vec<&str> {
        self.foreground.keys().map(String::as_str).collect()
    }

    pub fn foreground(&self, class: &str) -> Option<&[PreparedSource]> {
        self.foreground.get(class).map(Vec::as_slice)
    }

    pub fn backgrounds(&self) -> &[PreparedSource] {
        &self.background
    }

    pub fn lookup(&self, path: &Path) -> Result<&PreparedSource, SynthError> {
        match self.by_path.get(path) {
            Some((Some(class), i)) => Ok(&self.foreground[class][*i]),
            Some((None, i)) => Ok(&self.background[*i]),
            None => Err(SynthError::UnknownFile(path.to_path_buf())),
        }
    }
}

/// One planned event inside a mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub class_name: String,
    pub fg_file: String,
    /// Placement in seconds, quantized to the output sample grid.
    pub onset: f64,
    pub snr_db: f64,
}

/// Declarative recipe for one mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoundscapeSpec {
    pub clip_id: String,
    pub duration: f64,
    pub background_file: String,
    /// Start offset into the background, in samples at the output rate.
    pub background_offset_samples: u64,
    pub events: Vec<EventSpec>,
}

/// Per-clip record in the manifest: the sampled recipe plus the realized gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecipe {
    pub clip_id: String,
    pub background_file: String,
    pub background_offset_samples: u64,
    /// Gain applied to the whole mixture by peak limiting.
    pub norm_gain: f64,
    pub events: Vec<EventRecipe>,
}

/// Per-event record in the manifest; onset/offset reproduce the emitted
/// annotations exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecipe {
    pub class_name: String,
    pub fg_file: String,
    pub onset: f64,
    pub offset: f64,
    pub snr_db: f64,
    /// Gain applied to the foreground before summation.
    pub gain: f64,
}

/// Full record of a synthesis run: parameters, conventions, and one recipe
/// per rendered clip. The mixtures are exactly reconstructable from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub params: SynthParams,
    pub n_clips: u64,
    /// Event gains target `snr_db` of foreground RMS over the background RMS
    /// measured on the event's own span.
    pub snr_convention: String,
    pub encoding: String,
    pub clips: Vec<ClipRecipe>,
}

impl Manifest {
    pub fn save(&self, path: &Path) -> Result<(), SynthError> {
        let text = toml::to_string_pretty(self).map_err(|e| SynthError::Manifest {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        fs::write(path, text).map_err(|source| SynthError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, SynthError> {
        let text = fs::read_to_string(path).map_err(|source| SynthError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| SynthError::Manifest {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })
    }

    /// The annotation set of the whole run, reproduced from the recipes with
    /// zero tolerance.
    pub fn annotations(&self) -> Vec<EventAnnotation> {
        let mut events: Vec<EventAnnotation> = self
            .clips
            .iter()
            .flat_map(|clip| {
                clip.events.iter().map(|e| EventAnnotation {
                    clip_id: clip.clip_id.clone(),
                    onset: e.onset,
                    offset: e.offset,
                    class_name: e.class_name.clone(),
                })
            })
            .collect();
        crate::label::sort_events(&mut events);
        events
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio_io::WavEncoding;

    fn write_tone(path: &Path, freq: f64, len: usize, rate: u32, amp: f64) {
        let samples: Vec<f64> = (0..len)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin())
            .collect();
        let clip = AudioClip::new(samples, rate).unwrap();
        audio_io::write_wav(&clip, path, WavEncoding::Float32).unwrap();
    }

    fn tiny_catalog(root: &Path) -> (PathBuf, PathBuf) {
        let fg = root.join("fg");
        let bg = root.join("bg");
        for (class, n) in [("dog", 3usize), ("blender", 2)] {
            let dir = fg.join(class);
            fs::create_dir_all(&dir).unwrap();
            for i in 0..n {
                write_tone(
                    &dir.join(format!("{class}_{i}.wav")),
                    300.0 + 100.0 * i as f64,
                    8000,
                    16_000,
                    0.5,
                );
            }
        }
        fs::create_dir_all(&bg).unwrap();
        for i in 0..2 {
            write_tone(
                &bg.join(format!("noise_{i}.wav")),
                90.0,
                32_000,
                16_000,
                0.1,
            );
        }
        (fg, bg)
    }

    #[test]
    fn catalog_discovers_classes_and_sizes() {
        let dir = tempfile::tempdir().unwrap();
        let (fg, bg) = tiny_catalog(dir.path());
        let catalog = load_catalog(&fg, &bg).unwrap();
        assert_eq!(catalog.classes(), ["blender", "dog"]);
        assert_eq!(catalog.foreground["dog"].len(), 3);
        assert_eq!(catalog.foreground["blender"].len(), 2);
        assert_eq!(catalog.background.len(), 2);
    }

    #[test]
    fn empty_class_directory_is_an_error_naming_the_class() {
        let dir = tempfile::tempdir().unwrap();
        let (fg, bg) = tiny_catalog(dir.path());
        fs::create_dir_all(fg.join("vacant")).unwrap();
        match load_catalog(&fg, &bg).unwrap_err() {
            SynthError::EmptyClass { class } => assert_eq!(class, "vacant"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_background_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let (fg, _) = tiny_catalog(dir.path());
        let empty_bg = dir.path().join("empty_bg");
        fs::create_dir_all(&empty_bg).unwrap();
        assert!(matches!(
            load_catalog(&fg, &empty_bg),
            Err(SynthError::NoBackground(_))
        ));
    }

    #[test]
    fn bank_rejects_silent_foreground() {
        let dir = tempfile::tempdir().unwrap();
        let (fg, bg) = tiny_catalog(dir.path());
        let silent_dir = fg.join("mute");
        fs::create_dir_all(&silent_dir).unwrap();
        let silent = AudioClip::new(vec![0.0; 4000], 16_000).unwrap();
        audio_io::write_wav(&silent, &silent_dir.join("quiet.wav"), WavEncoding::Float32).unwrap();
        let catalog = load_catalog(&fg, &bg).unwrap();
        assert!(matches!(
            SoundBank::load(&catalog, &SynthParams::default()),
            Err(SynthError::SilentForeground(_))
        ));
    }

    #[test]
    fn bank_trims_and_resamples_foregrounds() {
        let dir = tempfile::tempdir().unwrap();
        let (fg, bg) = tiny_catalog(dir.path());
        // a 24 kHz tone with half a second of silence either side
        let padded_dir = fg.join("padded");
        fs::create_dir_all(&padded_dir).unwrap();
        let mut samples = vec![0.0; 12_000];
        samples.extend(
            (0..24_000)
                .map(|i| 0.6 * (2.0 * std::f64::consts::PI * 500.0 * i as f64 / 24_000.0).sin()),
        );
        samples.extend(vec![0.0; 12_000]);
        let clip = AudioClip::new(samples, 24_000).unwrap();
        audio_io::write_wav(&clip, &padded_dir.join("tone.wav"), WavEncoding::Float32).unwrap();

        let catalog = load_catalog(&fg, &bg).unwrap();
        let bank = SoundBank::load(&catalog, &SynthParams::default()).unwrap();
        let prepared = &bank.foreground("padded").unwrap()[0];
        assert_eq!(prepared.clip.sample_rate(), 16_000);
        // ~1 s of tone survives, the padding does not
        let len = prepared.clip.len();
        assert!((15_000..=17_000).contains(&len), "prepared len {len}");
        assert!(prepared.rms > 0.3);
    }

    #[test]
    fn params_validation_catches_inverted_ranges() {
        let params = SynthParams {
            events_min: 3,
            events_max: 1,
            ..SynthParams::default()
        };
        assert!(matches!(
            params.validate(),
            Err(SynthError::InvalidParams(_))
        ));
        let params = SynthParams {
            snr_min: 10.0,
            snr_max: 5.0,
            ..SynthParams::default()
        };
        assert!(params.validate().is_err());
    }

    #[test]
    fn manifest_round_trips_and_reproduces_annotations() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = Manifest {
            params: SynthParams::default(),
            n_clips: 1,
            snr_convention: "rms_local_active".to_string(),
            encoding: "pcm16".to_string(),
            clips: vec![ClipRecipe {
                clip_id: "clip_00000".to_string(),
                background_file: "bg/noise_0.wav".to_string(),
                background_offset_samples: 12_345,
                norm_gain: 0.987654321,
                events: vec![EventRecipe {
                    class_name: "dog".to_string(),
                    fg_file: "fg/dog/dog_0.wav".to_string(),
                    onset: 2.0 + 1.0 / 3.0,
                    offset: 3.75,
                    snr_db: 12.5,
                    gain: 0.0123456789,
                }],
            }],
        };
        let path = dir.path().join("manifest.toml");
        manifest.save(&path).unwrap();
        let back = Manifest::load(&path).unwrap();
        assert_eq!(back, manifest);
        let ann = back.annotations();
        assert_eq!(ann.len(), 1);
        assert_eq!(ann[0].onset, 2.0 + 1.0 / 3.0);
        assert_eq!(ann[0].offset, 3.75);
    }
}
