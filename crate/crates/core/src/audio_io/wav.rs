//! RIFF/WAVE reading and writing: PCM16, PCM24, and 32-bit float, little-endian.
//!
//! Multi-channel files are downmixed to mono by the arithmetic mean across
//! channels at load time.

use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use super::{AudioClip, AudioError};

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Sample encodings supported by [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

/// Outcome of a successful write.
#[derive(Debug, Clone, Copy, Default)]
pub struct WriteReport {
    /// Samples outside `[-1, 1]` that were hard-clipped during PCM16
    /// quantization. Always 0 for float32.
    pub clipped: u64,
}

/// Read a WAV file into a mono clip.
///
/// Integer samples are scaled to `[-1, 1]` by dividing by `2^(bits-1)`;
/// multi-channel content is averaged across channels.
pub fn read_wav(path: &Path) -> Result<AudioClip, AudioError> {
    let bytes = fs::read(path).map_err(|e| {
        if e.kind() == ErrorKind::NotFound {
            AudioError::FileNotFound(path.to_path_buf())
        } else {
            AudioError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })?;
    parse_wav(&bytes, path)
}

fn corrupt(path: &Path, detail: &str) -> AudioError {
    AudioError::CorruptHeader {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    }
}

fn truncated(path: &Path, detail: &str) -> AudioError {
    AudioError::Truncated {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    }
}

struct Format {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

fn parse_wav(bytes: &[u8], path: &Path) -> Result<AudioClip, AudioError> {
    if bytes.len() < 12 {
        return Err(truncated(path, "file shorter than the RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(corrupt(path, "missing RIFF tag"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(corrupt(path, "missing WAVE tag"));
    }

    let mut format: Option<Format> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12usize;
    while pos < bytes.len() {
        if pos + 8 > bytes.len() {
            return Err(truncated(path, "chunk header cut short"));
        }
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .ok_or_else(|| corrupt(path, "chunk size overflows"))?;
        if body_end > bytes.len() {
            return Err(truncated(
                path,
                &format!(
                    "chunk {:?} claims {} bytes but only {} remain",
                    String::from_utf8_lossy(id),
                    size,
                    bytes.len() - body_start
                ),
            ));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => format = Some(parse_fmt(body, path)?),
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are word-aligned
        pos = body_end + (size & 1);
    }

    let format = format.ok_or_else(|| corrupt(path, "missing fmt chunk"))?;
    let data = data.ok_or_else(|| corrupt(path, "missing data chunk"))?;
    decode_samples(&format, data, path)
}

fn parse_fmt(body: &[u8], path: &Path) -> Result<Format, AudioError> {
    if body.len() < 16 {
        return Err(corrupt(path, "fmt chunk shorter than 16 bytes"));
    }
    let mut tag = u16::from_le_bytes([body[0], body[1]]);
    let channels = u16::from_le_bytes([body[2], body[3]]);
    let sample_rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
    let bits_per_sample = u16::from_le_bytes([body[14], body[15]]);
    if tag == FORMAT_EXTENSIBLE {
        // sub-format GUID starts at offset 24; its first two bytes are the
        // effective format tag
        if body.len() < 26 {
            return Err(corrupt(path, "extensible fmt chunk too short"));
        }
        tag = u16::from_le_bytes([body[24], body[25]]);
    }
    if channels == 0 {
        return Err(corrupt(path, "zero channels"));
    }
    if sample_rate == 0 {
        return Err(corrupt(path, "zero sample rate"));
    }
    Ok(Format {
        tag,
        channels,
        sample_rate,
        bits_per_sample,
    })
}

fn decode_samples(format: &Format, data: &[u8], path: &Path) -> Result<AudioClip, AudioError> {
    let unsupported = |detail: String| AudioError::UnsupportedCodec {
        path: path.to_path_buf(),
        detail,
    };
    let bytes_per_sample = match (format.tag, format.bits_per_sample) {
        (FORMAT_PCM, 16) => 2usize,
        (FORMAT_PCM, 24) => 3,
        (FORMAT_IEEE_FLOAT, 32) => 4,
        (tag, bits) => {
            return Err(unsupported(format!(
                "format tag {tag} with {bits} bits per sample \
                 (supported: PCM 16/24-bit, float 32-bit)"
            )))
        }
    };
    let frame_size = bytes_per_sample * format.channels as usize;
    if !data.len().is_multiple_of(frame_size) {
        return Err(truncated(path, "data chunk ends mid-frame"));
    }
    let n_frames = data.len() / frame_size;
    let channels = format.channels as usize;
    let mut samples = Vec::with_capacity(n_frames);
    for frame in data.chunks_exact(frame_size) {
        let mut acc = 0.0f64;
        for ch in 0..channels {
            let s = &frame[ch * bytes_per_sample..(ch + 1) * bytes_per_sample];
            acc += match (format.tag, format.bits_per_sample) {
                (FORMAT_PCM, 16) => i16::from_le_bytes([s[0], s[1]]) as f64 / 32768.0,
                (FORMAT_PCM, 24) => {
                    let v = i32::from_le_bytes([0, s[0], s[1], s[2]]) >> 8;
                    v as f64 / 8_388_608.0
                }
                (FORMAT_IEEE_FLOAT, 32) => f32::from_le_bytes([s[0], s[1], s[2], s[3]]) as f64,
                _ => unreachable!(),
            };
        }
        samples.push(acc / channels as f64);
    }
    AudioClip::new(samples, format.sample_rate)
}

/// Write a mono clip as a WAV file.
///
/// PCM16 quantizes with rounding; samples outside `[-1, 1]` are hard-clipped
/// and counted in the returned report rather than aborting the write.
pub fn write_wav(
    clip: &AudioClip,
    path: &Path,
    encoding: WavEncoding,
) -> Result<WriteReport, AudioError> {
    let mut report = WriteReport::default();
    let (format_tag, bits, payload): (u16, u16, Vec<u8>) = match encoding {
        WavEncoding::Pcm16 => {
            let mut buf = Vec::with_capacity(clip.len() * 2);
            for &s in clip.samples() {
                if !(-1.0..=1.0).contains(&s) {
                    report.clipped += 1;
                }
                let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                buf.extend_from_slice(&q.to_le_bytes());
            }
            (FORMAT_PCM, 16, buf)
        }
        WavEncoding::Float32 => {
            let mut buf = Vec::with_capacity(clip.len() * 4);
            for &s in clip.samples() {
                buf.extend_from_slice(&(s as f32).to_le_bytes());
            }
            (FORMAT_IEEE_FLOAT, 32, buf)
        }
    };

    let channels: u16 = 1;
    let block_align = channels * bits / 8;
    let byte_rate = clip.sample_rate() * block_align as u32;
    let mut out = Vec::with_capacity(44 + payload.len());
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&0u32.to_le_bytes()); // patched below
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&format_tag.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate().to_le_bytes());
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    if encoding == WavEncoding::Float32 {
        // fact chunk is expected for non-PCM formats
        out.extend_from_slice(b"fact");
        out.extend_from_slice(&4u32.to_le_bytes());
        out.extend_from_slice(&(clip.len() as u32).to_le_bytes());
    }
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&payload);
    let riff_size = (out.len() - 8) as u32;
    out[4..8].copy_from_slice(&riff_size.to_le_bytes());

    if report.clipped > 0 {
        log::warn!(
            "{}: {} sample(s) outside [-1, 1] were clipped during pcm16 write",
            path.display(),
            report.clipped
        );
    }
    fs::write(path, &out).map_err(|e| AudioError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(report)
}
