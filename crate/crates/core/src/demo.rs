//! Deterministic demo fixtures: a small tone soundbank and posterior
//! matrices derived from ground truth. Used by the test suites and by the
//! quickstart walkthrough so the pipeline can run end to end without any
//! external data.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio_io::{self, AudioClip, WavEncoding};
use crate::label::EventAnnotation;
use crate::postprocess::{PosteriorMatrix, PostprocessError};
use crate::synth::SynthError;

/// Locations of a generated demo soundbank.
#[derive(Debug, Clone)]
pub struct DemoBank {
    pub fg_dir: PathBuf,
    pub bg_dir: PathBuf,
    pub classes: Vec<String>,
}

/// Write a tone soundbank under `root`: three classes of five tone bursts
/// each plus three noise backgrounds, all 16 kHz mono WAV.
///
/// Bursts carry 0.2 s of silence on both sides and 5 ms raised-cosine edges,
/// so envelope trimming has real work to do and labels stay tight.
pub fn write_demo_bank(root: &Path, seed: u64) -> Result<DemoBank, SynthError> {
    const RATE: u32 = 16_000;
    let fg_dir = root.join("fg");
    let bg_dir = root.join("bg");
    let classes = [
        ("tone_low", 220.0f64),
        ("tone_mid", 440.0),
        ("tone_high", 880.0),
    ];

    let io_err = |path: &Path, source| SynthError::Io {
        path: path.to_path_buf(),
        source,
    };
    for (i, (class, base_freq)) in classes.iter().enumerate() {
        let dir = fg_dir.join(class);
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        for k in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0xD1F0 + (i as u64) * 101 + k));
            let freq = base_freq * rng.gen_range(0.9..1.1);
            let burst_len = (RATE as f64 * rng.gen_range(0.8..2.0)) as usize;
            let pad = (RATE as f64 * 0.2) as usize;
            let fade = (RATE as f64 * 0.005) as usize;
            let amp = rng.gen_range(0.4..0.7);

            let mut samples = vec![0.0f64; pad];
            for t in 0..burst_len {
                let ramp_in = ((t + 1) as f64 / fade as f64).min(1.0);
                let ramp_out = ((burst_len - t) as f64 / fade as f64).min(1.0);
                let phase = 2.0 * std::f64::consts::PI * freq * t as f64 / RATE as f64;
                samples.push(amp * ramp_in * ramp_out * phase.sin());
            }
            samples.extend(vec![0.0f64; pad]);
            let clip = AudioClip::new(samples, RATE).expect("static rate");
            let path = dir.join(format!("{class}_{k}.wav"));
            audio_io::write_wav(&clip, &path, WavEncoding::Pcm16)?;
        }
    }

    fs::create_dir_all(&bg_dir).map_err(|e| io_err(&bg_dir, e))?;
    for k in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0xB6 + k));
        let len = 12 * RATE as usize;
        let samples: Vec<f64> = (0..len).map(|_| 0.05 * rng.gen_range(-1.0..1.0)).collect();
        let clip = AudioClip::new(samples, RATE).expect("static rate");
        audio_io::write_wav(
            &clip,
            &bg_dir.join(format!("noise_{k}.wav")),
            WavEncoding::Pcm16,
        )?;
    }

    Ok(DemoBank {
        fg_dir,
        bg_dir,
        classes: classes.iter().map(|(c, _)| c.to_string()).collect(),
    })
}

/// Rasterize ground truth into one posterior matrix per clip: frames covered
/// by an event get posterior 1.0 for its class, everything else 0.0.
///
/// A frame counts as covered when its center falls inside the event.
pub fn posteriors_from_ground_truth(
    ground_truth: &[EventAnnotation],
    durations: &BTreeMap<String, f64>,
    class_names: &[String],
    hop_seconds: f64,
) -> Result<Vec<PosteriorMatrix>, PostprocessError> {
    let class_index: BTreeMap<&str, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut matrices = Vec::with_capacity(durations.len());
    for (clip_id, &duration) in durations {
        let n_frames = ((duration / hop_seconds).ceil() as usize).max(1);
        let mut values = vec![0.0f64; n_frames * class_names.len()];
        for e in ground_truth.iter().filter(|e| &e.clip_id == clip_id) {
            let Some(&class) = class_index.get(e.class_name.as_str()) else {
                continue;
            };
            for frame in 0..n_frames {
                let center = (frame as f64 + 0.5) * hop_seconds;
                if center >= e.onset && center < e.offset {
                    values[frame * class_names.len() + class] = 1.0;
                }
            }
        }
        matrices.push(PosteriorMatrix::new(
            clip_id.clone(),
            hop_seconds,
            class_names.to_vec(),
            values,
        )?);
    }
    Ok(matrices)
}
