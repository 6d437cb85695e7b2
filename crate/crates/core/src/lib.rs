//! Building blocks for strongly labeled sound-event-detection datasets:
//! energy-envelope control signals for external audio generators,
//! dual-score rank filtering of generated samples, soundscape mixture
//! synthesis with exact labels, SED posterior post-processing, and
//! PSDS1/PSDS2 evaluation.
//!
//! Neural generators and scoring models are out of scope; this crate consumes
//! their outputs as WAV files and score tables and produces the datasets and
//! reports around them.

pub mod audio_io;
pub mod demo;
pub mod envelope;
pub mod filtering;
pub mod label;
pub mod postprocess;
pub mod psds;
pub mod synth;

pub use audio_io::{AudioClip, AudioError};
pub use envelope::{EnergyEnvelope, EnvelopeParams};
pub use filtering::{FilterConfig, FilterResult, ScoredSample};
pub use label::EventAnnotation;
pub use postprocess::{DetectionSet, PosteriorMatrix};
pub use psds::{PsdRocCurve, PsdsParams};
pub use synth::{Catalog, SoundBank, SoundscapeSpec, SynthParams};
