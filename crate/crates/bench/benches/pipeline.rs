//! Benchmarks for the hot paths: envelope extraction, resampling, median
//! smoothing, rank fusion, mixture rendering, and PSDS evaluation.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sedpipe_core::audio_io::{self, AudioClip};
use sedpipe_core::envelope::{self, EnvelopeParams};
use sedpipe_core::filtering::{self, FilterConfig, ScoredSample};
use sedpipe_core::label::EventAnnotation;
use sedpipe_core::postprocess::{self, DetectionSet};
use sedpipe_core::psds;
use sedpipe_core::synth::{self, SoundBank, SynthParams};

fn random_clip(seconds: f64, rate: u32, seed: u64) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (seconds * rate as f64) as usize;
    let samples = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    AudioClip::new(samples, rate).unwrap()
}

fn bench_envelope(c: &mut Criterion) {
    let clip = random_clip(10.0, 16_000, 1);
    let params = EnvelopeParams::from_latent_rate(16_000, 50.0).unwrap();
    c.bench_function("envelope/compute_10s_16k", |b| {
        b.iter(|| envelope::compute_envelope(black_box(&clip), &params).unwrap())
    });
}

fn bench_resample(c: &mut Criterion) {
    let clip = random_clip(10.0, 24_000, 2);
    c.bench_function("resample/24k_to_16k_10s", |b| {
        b.iter(|| audio_io::resample(black_box(&clip), 16_000).unwrap())
    });
}

fn bench_median(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let column: Vec<f64> = (0..10_000).map(|_| rng.gen_range(0.0..1.0)).collect();
    c.bench_function("postprocess/median7_10k_frames", |b| {
        b.iter(|| postprocess::median_filter(black_box(&column), 7).unwrap())
    });
    let bits: Vec<bool> = column.iter().map(|&v| v > 0.5).collect();
    c.bench_function("postprocess/median7_binary_10k_frames", |b| {
        b.iter(|| postprocess::median_filter_binary(black_box(&bits), 7).unwrap())
    });
}

fn bench_filtering(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let samples: Vec<ScoredSample> = (0..10_000)
        .map(|i| ScoredSample {
            sample_id: format!("s{i:05}"),
            class_name: format!("class{}", i % 10),
            clap_score: rng.gen_range(-1.0..1.0),
            cls_logit: rng.gen_range(-5.0..5.0),
        })
        .collect();
    let config = FilterConfig::new(0.5, 50.0).unwrap();
    c.bench_function("filtering/fuse_10k_samples_10_classes", |b| {
        b.iter(|| filtering::fuse_and_select(black_box(&samples), &config).unwrap())
    });
}

fn synthetic_eval_inputs() -> (Vec<DetectionSet>, Vec<EventAnnotation>) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let classes = ["dog", "cat", "blender", "dishes"];
    let gt: Vec<EventAnnotation> = (0..400)
        .map(|i| {
            let onset = rng.gen_range(0.0..8.0);
            EventAnnotation {
                clip_id: format!("clip{:03}", i % 100),
                onset,
                offset: onset + rng.gen_range(0.25..2.0),
                class_name: classes[i % classes.len()].to_string(),
            }
        })
        .collect();
    let mut sets = Vec::with_capacity(20);
    for k in 1..=20u32 {
        let mut events = Vec::new();
        for e in &gt {
            if rng.gen_bool(1.0 / k as f64) {
                events.push(EventAnnotation {
                    onset: (e.onset + rng.gen_range(-0.3..0.3)).max(0.0),
                    offset: e.offset + rng.gen_range(0.0..0.3),
                    ..e.clone()
                });
            }
        }
        sets.push(DetectionSet {
            operating_point: k as f64 / 21.0,
            events,
        });
    }
    (sets, gt)
}

fn bench_psds(c: &mut Criterion) {
    let (sets, gt) = synthetic_eval_inputs();
    let params = psds::psds1_params();
    c.bench_function("psds/evaluate_20_ops_400_events", |b| {
        b.iter(|| {
            psds::evaluate_detection_sets(black_box(&sets), black_box(&gt), &params, 1000.0)
                .unwrap()
        })
    });
}

fn bench_render(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let bank_dirs = sedpipe_core::demo::write_demo_bank(dir.path(), 6).unwrap();
    let params = SynthParams::default();
    let catalog = synth::load_catalog(&bank_dirs.fg_dir, &bank_dirs.bg_dir).unwrap();
    let bank = SoundBank::load(&catalog, &params).unwrap();
    c.bench_function("synth/render_one_10s_clip", |b| {
        b.iter_batched(
            || synth::sample_spec(&bank, &params, 0).unwrap(),
            |spec| synth::render(black_box(&spec), &bank, &params).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_envelope,
    bench_resample,
    bench_median,
    bench_filtering,
    bench_psds,
    bench_render
);
criterion_main!(benches);
