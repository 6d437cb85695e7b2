//! Spec sampling and mixture rendering.
//!
//! A mixture is `background + sum(gain_i * foreground_i)` at sample level,
//! then peak-limited as a whole so the labels stay valid. Event gains target
//! the requested SNR as foreground RMS over the background RMS measured on
//! the event's own span.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::audio_io::{self, AudioClip, WavEncoding};
use crate::label::{self, EventAnnotation};

use super::{
    ClipRecipe, EventRecipe, EventSpec, Manifest, SoundBank, SoundscapeSpec, SynthError,
    SynthParams,
};

/// Event gain for a target SNR: `(bg_rms / fg_rms) * 10^(snr_db / 20)`.
pub fn gain_for_snr(fg_rms: f64, bg_rms: f64, snr_db: f64) -> Result<f64, SynthError> {
    let fg_ok = fg_rms > 0.0;
    if !fg_ok {
        return Err(SynthError::InvalidParams(
            "foreground rms must be positive to set an snr".to_string(),
        ));
    }
    let bg_ok = bg_rms > 0.0;
    if !bg_ok {
        return Err(SynthError::InvalidParams(
            "background rms must be positive to set an snr".to_string(),
        ));
    }
    Ok(bg_rms / fg_rms * 10f64.powf(snr_db / 20.0))
}

/// The splitmix64 sequence member for `clip_index`, used to seed each clip's
/// own generator. Clips are fully independent of each other and of the total
/// clip count.
fn clip_rng(seed: u64, clip_index: u64) -> ChaCha8Rng {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(clip_index + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// Draw the recipe for clip `clip_index`: background, background offset,
/// event count, and per event its class, file, SNR, and onset.
///
/// Event counts, classes, files, and SNRs are uniform; onsets are uniform
/// over the sample positions where the trimmed event still fits.
pub fn sample_spec(
    bank: &SoundBank,
    params: &SynthParams,
    clip_index: u64,
) -> Result<SoundscapeSpec, SynthError> {
    params.validate()?;
    let mut rng = clip_rng(params.seed, clip_index);
    let duration_samples = params.duration_samples();
    let sr = params.sample_rate as f64;

    let backgrounds = bank.backgrounds();
    if backgrounds.is_empty() {
        return Err(SynthError::EmptyBank("backgrounds"));
    }
    let bg = &backgrounds[rng.gen_range(0..backgrounds.len())];
    let background_offset_samples = if bg.clip.len() > duration_samples {
        rng.gen_range(0..=(bg.clip.len() - duration_samples) as u64)
    } else {
        0
    };

    let n_events = rng.gen_range(params.events_min..=params.events_max);
    let classes = bank.classes();
    if n_events > 0 && classes.is_empty() {
        return Err(SynthError::EmptyBank("foreground classes"));
    }
    let mut events = Vec::with_capacity(n_events as usize);
    for _ in 0..n_events {
        let class = classes[rng.gen_range(0..classes.len())];
        let files = bank.foreground(class).expect("class comes from the bank");
        let fg = &files[rng.gen_range(0..files.len())];
        let snr_db = rng.gen_range(params.snr_min..=params.snr_max);
        let event_len = fg.clip.len().min(duration_samples);
        let max_onset = (duration_samples - event_len) as u64;
        let onset_samples = rng.gen_range(0..=max_onset);
        events.push(EventSpec {
            class_name: class.to_string(),
            fg_file: fg.path.to_string_lossy().into_owned(),
            onset: onset_samples as f64 / sr,
            snr_db,
        });
    }

    Ok(SoundscapeSpec {
        clip_id: format!("clip_{clip_index:05}"),
        duration: params.duration,
        background_file: bg.path.to_string_lossy().into_owned(),
        background_offset_samples,
        events,
    })
}

/// A rendered mixture with its labels and realized gains. `annotations` and
/// `event_gains` are aligned with the recipe's event order.
#[derive(Debug, Clone)]
pub struct RenderedClip {
    pub audio: AudioClip,
    pub annotations: Vec<EventAnnotation>,
    pub norm_gain: f64,
    pub event_gains: Vec<f64>,
}

/// Render one spec into audio and annotations.
pub fn render(
    spec: &SoundscapeSpec,
    bank: &SoundBank,
    params: &SynthParams,
) -> Result<RenderedClip, SynthError> {
    params.validate()?;
    let duration_samples = params.duration_samples();
    let sr = params.sample_rate as f64;

    // background bed: sliced when long enough, tiled when shorter
    let bg = bank.lookup(Path::new(&spec.background_file))?;
    let bg_samples = bg.clip.samples();
    let offset = spec.background_offset_samples as usize;
    let mut bed = Vec::with_capacity(duration_samples);
    if bg_samples.len() >= duration_samples {
        let start = offset.min(bg_samples.len() - duration_samples);
        bed.extend_from_slice(&bg_samples[start..start + duration_samples]);
    } else {
        for i in 0..duration_samples {
            bed.push(bg_samples[i % bg_samples.len()]);
        }
    }

    let mut mix = bed.clone();
    let mut annotations = Vec::with_capacity(spec.events.len());
    let mut event_gains = Vec::with_capacity(spec.events.len());
    for event in &spec.events {
        let fg = bank.lookup(Path::new(&event.fg_file))?;
        let event_len = fg.clip.len().min(duration_samples);
        let onset_samples = ((event.onset * sr).round() as usize).min(duration_samples - event_len);

        let fg_rms = if event_len == fg.clip.len() {
            fg.rms
        } else {
            audio_io::rms(&fg.clip, 0, event_len)?
        };
        if fg_rms <= 0.0 {
            return Err(SynthError::SilentForeground(fg.path.clone()));
        }
        let span = &bed[onset_samples..onset_samples + event_len];
        let bg_rms =
            (span.iter().map(|&s| s * s).sum::<f64>() / event_len as f64).sqrt();
        if bg_rms <= 0.0 {
            return Err(SynthError::SilentBackgroundSpan {
                path: bg.path.clone(),
                start: onset_samples,
                end: onset_samples + event_len,
            });
        }
        let gain = gain_for_snr(fg_rms, bg_rms, event.snr_db)?;
        for (i, &s) in fg.clip.samples()[..event_len].iter().enumerate() {
            mix[onset_samples + i] += gain * s;
        }

        let onset = onset_samples as f64 / sr;
        let offset_sec = ((onset_samples + event_len) as f64 / sr).min(params.duration);
        annotations.push(EventAnnotation {
            clip_id: spec.clip_id.clone(),
            onset,
            offset: offset_sec,
            class_name: event.class_name.clone(),
        });
        event_gains.push(gain);
    }

    let mixture = AudioClip::new(mix, params.sample_rate)?;
    let (audio, norm_gain) = audio_io::peak_normalize(&mixture, params.peak_limit)?;
    Ok(RenderedClip {
        audio,
        annotations,
        norm_gain,
        event_gains,
    })
}

/// Render `n_clips` mixtures into `out_dir`.
///
/// Writes `audio/<clip_id>.wav` (PCM16), `labels.tsv`, `durations.tsv`, and
/// `manifest.toml`. Outputs are byte-identical for identical inputs
/// regardless of the rayon thread count: specs are drawn per clip index and
/// results are written in index order.
pub fn synthesize_set(
    bank: &SoundBank,
    n_clips: u64,
    params: &SynthParams,
    out_dir: &Path,
) -> Result<Manifest, SynthError> {
    params.validate()?;
    let audio_dir = out_dir.join("audio");
    fs::create_dir_all(&audio_dir).map_err(|source| SynthError::Io {
        path: audio_dir.clone(),
        source,
    })?;

    let specs: Vec<SoundscapeSpec> = (0..n_clips)
        .map(|i| sample_spec(bank, params, i))
        .collect::<Result<_, _>>()?;
    let rendered: Vec<RenderedClip> = specs
        .par_iter()
        .map(|spec| render(spec, bank, params))
        .collect::<Result<_, _>>()?;

    let mut all_events = Vec::new();
    let mut durations = BTreeMap::new();
    let mut recipes = Vec::with_capacity(specs.len());
    for (spec, clip) in specs.iter().zip(&rendered) {
        let wav_path = audio_dir.join(format!("{}.wav", spec.clip_id));
        audio_io::write_wav(&clip.audio, &wav_path, WavEncoding::Pcm16)?;
        durations.insert(spec.clip_id.clone(), clip.audio.duration_seconds());
        all_events.extend(clip.annotations.iter().cloned());
        recipes.push(ClipRecipe {
            clip_id: spec.clip_id.clone(),
            background_file: spec.background_file.clone(),
            background_offset_samples: spec.background_offset_samples,
            norm_gain: clip.norm_gain,
            events: spec
                .events
                .iter()
                .zip(&clip.annotations)
                .zip(&clip.event_gains)
                .map(|((e, a), &gain)| EventRecipe {
                    class_name: e.class_name.clone(),
                    fg_file: e.fg_file.clone(),
                    onset: a.onset,
                    offset: a.offset,
                    snr_db: e.snr_db,
                    gain,
                })
                .collect(),
        });
    }

    label::sort_events(&mut all_events);
    let to_synth_err = |e: label::LabelError| match e {
        label::LabelError::Io { path, source } => SynthError::Io { path, source },
        other => SynthError::InvalidParams(other.to_string()),
    };
    label::write_strong_labels(&all_events, &out_dir.join("labels.tsv")).map_err(to_synth_err)?;
    label::write_durations(&durations, &out_dir.join("durations.tsv")).map_err(to_synth_err)?;

    let manifest = Manifest {
        params: params.clone(),
        n_clips,
        snr_convention: "rms_local_active".to_string(),
        encoding: "pcm16".to_string(),
        clips: recipes,
    };
    manifest.save(&out_dir.join("manifest.toml"))?;
    Ok(manifest)
}
