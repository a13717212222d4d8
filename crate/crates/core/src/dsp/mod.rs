//! Time/frequency conversion.

mod spectrum;
mod stft;

pub use spectrum::{couple_phase, mag_phase, ComplexSpectrogram, MagPhase, WaveBuffer};
pub use stft::{analyze, synthesize, Analyzer, StftConfig, StreamAnalyzer, StreamSynthesizer};
