//! Mono audio clips and the deterministic I/O and level arithmetic built on them.
//!
//! Everything here is a pure function of its inputs: no shared state, no
//! hidden configuration, safe to call from any number of threads.

mod resample;
mod wav;

pub use resample::resample;
pub use wav::{read_wav, write_wav, WavEncoding, WriteReport};

use std::path::PathBuf;

use thiserror::Error;

/// Errors from audio I/O and level operations.
#[derive(Debug, Error)]
pub enum AudioError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("corrupt wav header in {path}: {detail}")]
    CorruptHeader { path: PathBuf, detail: String },
    #[error("truncated wav file {path}: {detail}")]
    Truncated { path: PathBuf, detail: String },
    #[error("unsupported wav codec in {path}: {detail}")]
    UnsupportedCodec { path: PathBuf, detail: String },
    #[error("sample rate must be positive")]
    InvalidSampleRate,
    #[error("empty sample range [{start}, {end})")]
    EmptyRange { start: usize, end: usize },
    #[error("range [{start}, {end}) out of bounds for clip of {len} samples")]
    RangeOutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("operation requires a non-empty clip")]
    EmptyClip,
    #[error("target peak {0} outside (0, 1]")]
    InvalidTargetPeak(f64),
}

/// A single-channel waveform at a known sample rate.
///
/// Samples are nominally in `[-1, 1]`; intermediate mixtures may exceed that
/// range and are only clamped when quantizing to PCM.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    /// Wrap raw samples. Fails when `sample_rate` is zero.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidSampleRate);
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Largest absolute sample value; 0.0 for an empty clip.
    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, &s| m.max(s.abs()))
    }
}

/// Root-mean-square level over the half-open sample range `[start, end)`.
pub fn rms(clip: &AudioClip, start: usize, end: usize) -> Result<f64, AudioError> {
    if start >= end {
        return Err(AudioError::EmptyRange { start, end });
    }
    if end > clip.len() {
        return Err(AudioError::RangeOutOfBounds {
            start,
            end,
            len: clip.len(),
        });
    }
    let sum_sq: f64 = clip.samples[start..end].iter().map(|&s| s * s).sum();
    Ok((sum_sq / (end - start) as f64).sqrt())
}

/// Scale a clip down so its peak does not exceed `target_peak`.
///
/// Returns the (possibly unchanged) clip and the gain that was applied.
/// Clips already at or below the target, including all-zero clips, pass
/// through with gain 1.0.
pub fn peak_normalize(clip: &AudioClip, target_peak: f64) -> Result<(AudioClip, f64), AudioError> {
    if clip.is_empty() {
        return Err(AudioError::EmptyClip);
    }
    if !(target_peak > 0.0 && target_peak <= 1.0) {
        return Err(AudioError::InvalidTargetPeak(target_peak));
    }
    let peak = clip.peak();
    if peak <= target_peak {
        return Ok((clip.clone(), 1.0));
    }
    let gain = target_peak / peak;
    let samples = clip
        .samples
        .iter()
        // clamp catches the last-ulp rounding of s * gain
        .map(|&s| (s * gain).clamp(-target_peak, target_peak))
        .collect();
    Ok((
        AudioClip {
            samples,
            sample_rate: clip.sample_rate,
        },
        gain,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clip(samples: Vec<f64>) -> AudioClip {
        AudioClip::new(samples, 16_000).unwrap()
    }

    #[test]
    fn rms_of_zeros_is_zero() {
        let c = clip(vec![0.0; 100]);
        assert_eq!(rms(&c, 0, 100).unwrap(), 0.0);
    }

    #[test]
    fn rms_of_constant_is_magnitude() {
        let c = clip(vec![-0.25; 64]);
        assert!((rms(&c, 0, 64).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    #[allow(clippy::approx_constant)] // 0.70711 is the stated tolerance target
    fn rms_of_full_scale_sine_is_inv_sqrt2() {
        // 1 kHz at 16 kHz over exactly 16 periods
        let n = 256;
        let samples: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / 16_000.0).sin())
            .collect();
        let c = clip(samples);
        let v = rms(&c, 0, n).unwrap();
        assert!((v - 0.70711).abs() < 1e-4, "rms = {v}");
    }

    #[test]
    fn rms_rejects_empty_and_out_of_bounds_ranges() {
        let c = clip(vec![0.1; 10]);
        assert!(matches!(rms(&c, 5, 5), Err(AudioError::EmptyRange { .. })));
        assert!(matches!(
            rms(&c, 0, 11),
            Err(AudioError::RangeOutOfBounds { .. })
        ));
    }

    #[test]
    fn peak_normalize_leaves_quiet_clip_unchanged() {
        let c = clip(vec![0.5, -0.3, 0.2]);
        let (out, gain) = peak_normalize(&c, 0.95).unwrap();
        assert_eq!(gain, 1.0);
        assert_eq!(out.samples(), c.samples());
    }

    #[test]
    fn peak_normalize_scales_loud_clip() {
        let c = clip(vec![2.0, -1.0, 0.5]);
        let (out, gain) = peak_normalize(&c, 1.0).unwrap();
        assert_eq!(gain, 0.5);
        assert_eq!(out.samples(), &[1.0, -0.5, 0.25]);
    }

    #[test]
    fn peak_normalize_passes_silence_through() {
        let c = clip(vec![0.0; 8]);
        let (out, gain) = peak_normalize(&c, 0.5).unwrap();
        assert_eq!(gain, 1.0);
        assert_eq!(out.samples(), c.samples());
    }

    #[test]
    fn peak_normalize_rejects_bad_target() {
        let c = clip(vec![0.1]);
        assert!(matches!(
            peak_normalize(&c, 0.0),
            Err(AudioError::InvalidTargetPeak(_))
        ));
        assert!(matches!(
            peak_normalize(&c, 1.5),
            Err(AudioError::InvalidTargetPeak(_))
        ));
    }

    proptest! {
        #[test]
        fn rms_scales_with_gain(
            samples in proptest::collection::vec(-1.0f64..1.0, 1..200),
            gain in -8.0f64..8.0,
        ) {
            let c = clip(samples.clone());
            let scaled = clip(samples.iter().map(|s| s * gain).collect());
            let n = samples.len();
            let a = rms(&scaled, 0, n).unwrap();
            let b = gain.abs() * rms(&c, 0, n).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
        }

        #[test]
        fn peak_normalize_never_exceeds_target(
            samples in proptest::collection::vec(-4.0f64..4.0, 1..200),
            target in 0.05f64..1.0,
        ) {
            let c = clip(samples);
            let (out, _) = peak_normalize(&c, target).unwrap();
            prop_assert!(out.peak() <= target);
        }
    }
}
