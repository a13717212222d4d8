//! Residual-noise post-processing.
//!
//! The first-pipeline output is treated as a noisy observation. Its ratio to the
//! noisy input serves as a speech presence probability, which steers a recursive
//! noise PSD estimate. The estimate is computed on a harmonically flattened power
//! spectrum and then feeds an MMSE log-spectral amplitude gain.

mod cepstrum;
mod expint;
mod frame;
mod lsa;
mod npsd;
mod spp;

pub use cepstrum::{cepstral_preprocess, Cepstrum};
pub use expint::{expint_e1, EULER_GAMMA};
pub use frame::{pp_frame, PpConfig, PpState};
pub use lsa::{lsa_gain, lsa_gain_unclamped};
pub use npsd::update_npsd;
pub use spp::{derive_spp, SPP_EPS};
