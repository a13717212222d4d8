//! Streaming, strictly causal speech denoising.
//!
//! The engine is built from three layers:
//!
//! * [`dsp`]: 20 ms / 10 ms STFT analysis and overlap-add synthesis, batch and streaming.
//! * [`model`]: a two-stage network. A coarse magnitude estimator runs first, its
//!   output is recombined with the noisy phase, and a complex refinement network adds
//!   a residual to that coarse complex spectrum.
//! * [`post`]: a parameter-free residual-noise suppressor (SPP-driven noise PSD tracking,
//!   cepstral harmonic pre-suppression, MMSE log-spectral amplitude gain).
//!
//! [`pipeline`] ties them into a frame loop working on WAV files, and [`train`] holds
//! the loss functions together with a small finite-difference training harness.

pub mod dsp;
pub mod error;
pub mod model;
pub mod nn;
pub mod pipeline;
pub mod post;
pub mod real;
pub mod train;

pub use dsp::{ComplexSpectrogram, MagPhase, StftConfig, WaveBuffer};
pub use error::{Error, Result, WavError, WeightFileError};
pub use model::{ModelConfig, TscnModel};
pub use nn::{ParamStore, Tensor};
pub use pipeline::{EngineConfig, LatencyReport};
pub use post::{PpConfig, PpState};
pub use real::Real;

/// Sample rate every component assumes.
pub const SAMPLE_RATE: u32 = 16_000;
