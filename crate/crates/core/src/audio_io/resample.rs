//! Polyphase windowed-sinc sample-rate conversion.
//!
//! Kaiser window, cutoff at 0.95 of the lower Nyquist frequency, 32 taps of
//! half-width per phase. Each phase filter is normalized to unit DC gain so
//! constant signals pass through unchanged away from the edges.

use super::{AudioClip, AudioError};

/// Taps on each side of the interpolation point.
const HALF_WIDTH: usize = 32;
/// Kaiser shape parameter; ~110 dB stopband at this width.
const KAISER_BETA: f64 = 12.0;
/// Cutoff as a fraction of the lower Nyquist.
const CUTOFF: f64 = 0.95;
/// Above this many phases the filters are computed per sample instead of
/// being tabulated up front.
const MAX_TABULATED_PHASES: u64 = 1 << 14;

/// Resample a clip to `target_rate`.
///
/// Output length is `round(len * target / source)`. Equal input and output
/// rates return the clip unchanged, bit-exact.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip, AudioError> {
    if target_rate == 0 {
        return Err(AudioError::InvalidSampleRate);
    }
    let source_rate = clip.sample_rate();
    if source_rate == target_rate {
        return Ok(clip.clone());
    }

    let g = gcd(source_rate as u64, target_rate as u64);
    let up = target_rate as u64 / g; // output samples per block
    let down = source_rate as u64 / g; // input samples per block

    let len = clip.len() as u64;
    let out_len = ((len as u128 * target_rate as u128 + (source_rate / 2) as u128)
        / source_rate as u128) as usize;
    if out_len == 0 {
        return AudioClip::new(Vec::new(), target_rate);
    }

    let cutoff = CUTOFF * (up as f64 / down as f64).min(1.0);
    let x = clip.samples();
    let mut out = Vec::with_capacity(out_len);

    let table: Option<Vec<Vec<f64>>> = if up <= MAX_TABULATED_PHASES {
        Some(
            (0..up)
                .map(|phase| phase_filter(phase as f64 / up as f64, cutoff))
                .collect(),
        )
    } else {
        None
    };
    for n in 0..out_len as u64 {
        // position of output sample n on the input time axis: n * down / up
        let num = n * down;
        let i0 = (num / up) as i64;
        let phase = num % up;
        let scratch;
        let taps: &[f64] = match &table {
            Some(t) => &t[phase as usize],
            None => {
                scratch = phase_filter(phase as f64 / up as f64, cutoff);
                &scratch
            }
        };
        let mut acc = 0.0f64;
        for (k, &h) in taps.iter().enumerate() {
            let j = i0 - HALF_WIDTH as i64 + 1 + k as i64;
            if j >= 0 && (j as usize) < x.len() {
                acc += x[j as usize] * h;
            }
        }
        out.push(acc);
    }

    AudioClip::new(out, target_rate)
}

/// Filter taps for a fractional offset `frac` in [0, 1), normalized to unit
/// sum.
fn phase_filter(frac: f64, cutoff: f64) -> Vec<f64> {
    let mut taps = Vec::with_capacity(2 * HALF_WIDTH);
    for k in 0..2 * HALF_WIDTH {
        let t = (k as i64 - HALF_WIDTH as i64 + 1) as f64 - frac;
        taps.push(kernel(t, cutoff));
    }
    let sum: f64 = taps.iter().sum();
    for h in &mut taps {
        *h /= sum;
    }
    taps
}

fn kernel(t: f64, cutoff: f64) -> f64 {
    let u = t / HALF_WIDTH as f64;
    if u.abs() >= 1.0 {
        return 0.0;
    }
    cutoff * sinc(cutoff * t) * bessel_i0(KAISER_BETA * (1.0 - u * u).sqrt())
        / bessel_i0(KAISER_BETA)
}

fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        let pt = std::f64::consts::PI * t;
        pt.sin() / pt
    }
}

/// Zeroth-order modified Bessel function of the first kind, by power series.
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 1.0f64;
    loop {
        term *= (half / k) * (half / k);
        sum += term;
        if term < sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn sine(freq: f64, rate: u32, n: usize) -> AudioClip {
        let samples = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin())
            .collect();
        AudioClip::new(samples, rate).unwrap()
    }

    #[test]
    fn same_rate_is_identity() {
        let clip = sine(440.0, 16_000, 1000);
        let out = resample(&clip, 16_000).unwrap();
        assert_eq!(out.samples(), clip.samples());
    }

    #[test]
    fn output_length_is_rounded_ratio() {
        let clip = AudioClip::new(vec![0.0; 24_000], 24_000).unwrap();
        let out = resample(&clip, 16_000).unwrap();
        assert_eq!(out.len(), 16_000);
        let clip = AudioClip::new(vec![0.0; 1001], 16_000).unwrap();
        let out = resample(&clip, 24_000).unwrap();
        assert_eq!(out.len(), 1502); // round(1001 * 1.5)
    }

    #[test]
    fn dc_is_preserved_away_from_edges() {
        let clip = AudioClip::new(vec![0.25; 24_000], 24_000).unwrap();
        let out = resample(&clip, 16_000).unwrap();
        let margin = 64;
        for &s in &out.samples()[margin..out.len() - margin] {
            assert!((s - 0.25).abs() < 1e-3, "dc drifted to {s}");
        }
    }

    /// Direct DFT magnitude of the interior of a clip at one frequency,
    /// expressed as a sinusoid amplitude.
    fn tone_amplitude(samples: &[f64], rate: f64, freq: f64) -> f64 {
        let (mut re, mut im) = (0.0f64, 0.0f64);
        let n = samples.len();
        for (i, &s) in samples.iter().enumerate() {
            let phi = 2.0 * std::f64::consts::PI * freq * i as f64 / rate;
            re += s * phi.cos();
            im += s * phi.sin();
        }
        2.0 * (re * re + im * im).sqrt() / n as f64
    }

    #[test]
    fn sine_survives_24k_to_16k_conversion() {
        let clip = sine(1000.0, 24_000, 24_000);
        let out = resample(&clip, 16_000).unwrap();
        assert_eq!(out.len(), 16_000);
        let interior = &out.samples()[800..out.len() - 800];

        // amplitude at the tone frequency within 1%
        let amp = tone_amplitude(interior, 16_000.0, 1000.0);
        assert!((amp - 1.0).abs() < 0.01, "amplitude {amp}");

        // spectral peak within 1 Hz: scan a fine grid around the tone
        let mut best = (0.0f64, 0.0f64);
        let mut f = 900.0;
        while f <= 1100.0 {
            let a = tone_amplitude(interior, 16_000.0, f);
            if a > best.1 {
                best = (f, a);
            }
            f += 0.25;
        }
        assert!((best.0 - 1000.0).abs() <= 1.0, "peak at {} Hz", best.0);
    }

    #[test]
    fn resampling_is_linear() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 2000;
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (ca, cb) = (2.0f64, -0.7f64);
        let mixed: Vec<f64> = a.iter().zip(&b).map(|(&x, &y)| ca * x + cb * y).collect();

        let r = |v: Vec<f64>| {
            resample(&AudioClip::new(v, 24_000).unwrap(), 16_000)
                .unwrap()
                .into_samples()
        };
        let lhs = r(mixed);
        let (ra, rb) = (r(a), r(b));
        for i in 0..lhs.len() {
            let rhs = ca * ra[i] + cb * rb[i];
            assert!((lhs[i] - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_target_rate_is_rejected() {
        let clip = sine(440.0, 16_000, 100);
        assert!(matches!(
            resample(&clip, 0),
            Err(AudioError::InvalidSampleRate)
        ));
    }
}
