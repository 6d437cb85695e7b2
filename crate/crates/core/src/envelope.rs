//! Energy-envelope extraction: the per-frame RMS trajectory used as the
//! temporal control signal for foreground generation, plus the active-region
//! detection and silence trimming built on it.
//!
//! Frame timing is aligned to a configurable latent frame rate: the hop is
//! `round(sample_rate / latent_rate)` and the default window is twice the hop.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::audio_io::AudioClip;

/// Default latent frame rate in frames per second (hop 320 at 16 kHz,
/// 480 at 24 kHz).
pub const DEFAULT_LATENT_RATE: f64 = 50.0;

#[derive(Debug, Error)]
pub enum EnvelopeError {
    #[error("latent rate must be positive and finite, got {0}")]
    InvalidLatentRate(f64),
    #[error("sample rate must be positive")]
    InvalidSampleRate,
    #[error("{0} must be at least 1")]
    ZeroSpan(&'static str),
    #[error("clip sample rate {clip} does not match envelope params rate {params}")]
    SampleRateMismatch { clip: u32, params: u32 },
    #[error("operation requires a non-empty clip")]
    EmptyClip,
    #[error("relative threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed control-signal file {path}: {detail}")]
    Malformed { path: PathBuf, detail: String },
}

/// Frame geometry of an energy envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    sample_rate: u32,
    latent_rate: f64,
    window: usize,
    hop: usize,
}

impl EnvelopeParams {
    /// Derive frame geometry from a latent frame rate: hop =
    /// `round(sample_rate / latent_rate)` (at least 1), window = 2 * hop.
    pub fn from_latent_rate(sample_rate: u32, latent_rate: f64) -> Result<Self, EnvelopeError> {
        if sample_rate == 0 {
            return Err(EnvelopeError::InvalidSampleRate);
        }
        if !(latent_rate.is_finite() && latent_rate > 0.0) {
            return Err(EnvelopeError::InvalidLatentRate(latent_rate));
        }
        let hop = ((sample_rate as f64 / latent_rate).round() as usize).max(1);
        Ok(Self {
            sample_rate,
            latent_rate,
            window: 2 * hop,
            hop,
        })
    }

    /// Override the window length.
    pub fn with_window(mut self, window: usize) -> Result<Self, EnvelopeError> {
        if window == 0 {
            return Err(EnvelopeError::ZeroSpan("window"));
        }
        self.window = window;
        Ok(self)
    }

    /// Override the hop length. The latent rate is re-derived to stay
    /// consistent with the new hop.
    pub fn with_hop(mut self, hop: usize) -> Result<Self, EnvelopeError> {
        if hop == 0 {
            return Err(EnvelopeError::ZeroSpan("hop"));
        }
        self.hop = hop;
        self.latent_rate = self.sample_rate as f64 / hop as f64;
        Ok(self)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn latent_rate(&self) -> f64 {
        self.latent_rate
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn hop(&self) -> usize {
        self.hop
    }
}

/// Per-frame RMS values of a clip.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEnvelope {
    values: Vec<f64>,
    params: EnvelopeParams,
}

impl EnergyEnvelope {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn params(&self) -> &EnvelopeParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &v| m.max(v))
    }
}

/// Compute the energy envelope of a clip.
///
/// Frame `i` covers samples `[i*hop, i*hop + window)`, zero-padded past the
/// end of the clip; its value is the RMS over that span. The envelope has
/// `ceil(len / hop)` frames.
pub fn compute_envelope(
    clip: &AudioClip,
    params: &EnvelopeParams,
) -> Result<EnergyEnvelope, EnvelopeError> {
    if clip.is_empty() {
        return Err(EnvelopeError::EmptyClip);
    }
    if clip.sample_rate() != params.sample_rate {
        return Err(EnvelopeError::SampleRateMismatch {
            clip: clip.sample_rate(),
            params: params.sample_rate,
        });
    }
    let x = clip.samples();
    let (hop, window) = (params.hop, params.window);
    let n_frames = x.len().div_ceil(hop);
    let mut values = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let start = i * hop;
        let end = (start + window).min(x.len());
        let sum_sq: f64 = x[start..end].iter().map(|&s| s * s).sum();
        values.push((sum_sq / window as f64).sqrt());
    }
    Ok(EnergyEnvelope {
        values,
        params: *params,
    })
}

/// Scale an envelope so its maximum is 1.0. All-zero envelopes pass through
/// unchanged.
pub fn normalize_envelope(env: &EnergyEnvelope) -> EnergyEnvelope {
    let max = env.max();
    if max <= 0.0 {
        return env.clone();
    }
    EnergyEnvelope {
        values: env.values.iter().map(|&v| v / max).collect(),
        params: env.params,
    }
}

/// Locate the half-open frame range where the envelope is at or above
/// `threshold_rel * max`. Returns `None` for an all-zero envelope.
pub fn detect_active_region(
    env: &EnergyEnvelope,
    threshold_rel: f64,
) -> Result<Option<(usize, usize)>, EnvelopeError> {
    if !(threshold_rel > 0.0 && threshold_rel < 1.0) {
        return Err(EnvelopeError::InvalidThreshold(threshold_rel));
    }
    let max = env.max();
    if max <= 0.0 {
        return Ok(None);
    }
    let thr = threshold_rel * max;
    let onset = env.values.iter().position(|&v| v >= thr);
    let offset = env.values.iter().rposition(|&v| v >= thr);
    Ok(match (onset, offset) {
        (Some(a), Some(b)) => Some((a, b + 1)),
        _ => None,
    })
}

/// Cut leading and trailing low-energy frames from a clip.
///
/// Returns the samples `[onset_frame * hop, offset_frame * hop)` of the
/// detected active region; a clip with no active region is returned
/// unchanged.
pub fn trim_silence(
    clip: &AudioClip,
    params: &EnvelopeParams,
    threshold_rel: f64,
) -> Result<AudioClip, EnvelopeError> {
    let env = compute_envelope(clip, params)?;
    match detect_active_region(&env, threshold_rel)? {
        None => Ok(clip.clone()),
        Some((onset, offset)) => {
            let start = onset * params.hop;
            let end = (offset * params.hop).min(clip.len());
            let samples = clip.samples()[start..end].to_vec();
            Ok(AudioClip::new(samples, clip.sample_rate()).expect("rate already validated"))
        }
    }
}

/// On-disk layouts for exported control signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlSignalFormat {
    /// Header line `hop=..,window=..,sample_rate=..`, then one value per line.
    Csv,
    /// Raw little-endian f32 values plus a `.meta` sidecar with the header
    /// fields.
    F32le,
}

impl ControlSignalFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ControlSignalFormat::Csv => "csv",
            ControlSignalFormat::F32le => "f32",
        }
    }
}

fn header_line(params: &EnvelopeParams) -> String {
    format!(
        "hop={},window={},sample_rate={}",
        params.hop, params.window, params.sample_rate
    )
}

/// Write an envelope as a control-signal file for an external generator.
pub fn export_control_signal(
    env: &EnergyEnvelope,
    path: &Path,
    format: ControlSignalFormat,
) -> Result<(), EnvelopeError> {
    let io_err = |source| EnvelopeError::Io {
        path: path.to_path_buf(),
        source,
    };
    match format {
        ControlSignalFormat::Csv => {
            let mut out = header_line(&env.params);
            out.push('\n');
            for v in &env.values {
                out.push_str(&v.to_string());
                out.push('\n');
            }
            fs::write(path, out).map_err(io_err)
        }
        ControlSignalFormat::F32le => {
            let mut bytes = Vec::with_capacity(env.values.len() * 4);
            for &v in &env.values {
                bytes.extend_from_slice(&(v as f32).to_le_bytes());
            }
            fs::write(path, bytes).map_err(io_err)?;
            let meta = sidecar_path(path);
            fs::write(&meta, header_line(&env.params) + "\n")
                .map_err(|source| EnvelopeError::Io { path: meta, source })
        }
    }
}

/// Read a control-signal file back into an envelope.
pub fn import_control_signal(
    path: &Path,
    format: ControlSignalFormat,
) -> Result<EnergyEnvelope, EnvelopeError> {
    match format {
        ControlSignalFormat::Csv => {
            let text = fs::read_to_string(path).map_err(|source| EnvelopeError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let mut lines = text.lines();
            let header = lines.next().ok_or_else(|| malformed(path, "empty file"))?;
            let params = parse_header(header, path)?;
            let mut values = Vec::new();
            for (i, line) in lines.enumerate() {
                if line.is_empty() {
                    continue;
                }
                let v: f64 = line.parse().map_err(|_| {
                    malformed(path, &format!("bad value on line {}: {line:?}", i + 2))
                })?;
                values.push(v);
            }
            Ok(EnergyEnvelope { values, params })
        }
        ControlSignalFormat::F32le => {
            let bytes = fs::read(path).map_err(|source| EnvelopeError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            if bytes.len() % 4 != 0 {
                return Err(malformed(path, "length is not a multiple of 4 bytes"));
            }
            let meta = sidecar_path(path);
            let text = fs::read_to_string(&meta)
                .map_err(|source| EnvelopeError::Io { path: meta, source })?;
            let params = parse_header(text.trim_end(), path)?;
            let values = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            Ok(EnergyEnvelope { values, params })
        }
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".meta");
    PathBuf::from(s)
}

fn malformed(path: &Path, detail: &str) -> EnvelopeError {
    EnvelopeError::Malformed {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    }
}

fn parse_header(header: &str, path: &Path) -> Result<EnvelopeParams, EnvelopeError> {
    let mut hop = None;
    let mut window = None;
    let mut sample_rate = None;
    for field in header.split(',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| malformed(path, &format!("bad header field {field:?}")))?;
        let parsed: u64 = value
            .parse()
            .map_err(|_| malformed(path, &format!("bad header value {value:?}")))?;
        match key {
            "hop" => hop = Some(parsed as usize),
            "window" => window = Some(parsed as usize),
            "sample_rate" => sample_rate = Some(parsed as u32),
            _ => return Err(malformed(path, &format!("unknown header key {key:?}"))),
        }
    }
    let (hop, window, sample_rate) = match (hop, window, sample_rate) {
        (Some(h), Some(w), Some(r)) if h > 0 && w > 0 && r > 0 => (h, w, r),
        _ => {
            return Err(malformed(
                path,
                "header must carry hop, window, sample_rate",
            ))
        }
    };
    Ok(EnvelopeParams {
        sample_rate,
        latent_rate: sample_rate as f64 / hop as f64,
        window,
        hop,
    })
}
