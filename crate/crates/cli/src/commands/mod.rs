pub mod decode;
pub mod envelope;
pub mod evaluate;
pub mod filter;
pub mod report;
pub mod synth;
