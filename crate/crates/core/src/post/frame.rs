use num_complex::Complex;

use super::cepstrum::Cepstrum;
use super::lsa::lsa_gain;
use super::npsd::{update_npsd, NPSD_FLOOR};
use super::spp::derive_spp;
use crate::error::{Error, Result};
use crate::real::Real;

/// Post-processor constants.
#[derive(Debug, Clone, PartialEq)]
pub struct PpConfig {
    /// Noise PSD smoothing when speech is absent.
    pub alpha_d: f64,
    /// Decision-directed weight on the previous frame.
    pub beta_dd: f64,
    /// Floor on the a-priori SNR.
    pub xi_min: f64,
    /// Floor on the final gain.
    pub gain_min: f64,
    /// Pitch search range in cepstral samples (inclusive).
    pub quefrency_min: usize,
    pub quefrency_max: usize,
    pub notch_halfwidth: usize,
    /// Required ratio of the cepstral peak to the median magnitude of the range.
    pub peak_threshold: f64,
}

impl Default for PpConfig {
    fn default() -> Self {
        PpConfig {
            alpha_d: 0.95,
            beta_dd: 0.98,
            xi_min: 10f64.powf(-2.5),
            gain_min: 0.1,
            quefrency_min: 40,
            quefrency_max: 160,
            notch_halfwidth: 2,
            peak_threshold: 3.0,
        }
    }
}

impl PpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.alpha_d > 0.0 && self.alpha_d < 1.0) {
            return bad("alpha_d must lie in (0, 1)");
        }
        if !(self.beta_dd > 0.0 && self.beta_dd < 1.0) {
            return bad("beta_dd must lie in (0, 1)");
        }
        if !(self.gain_min > 0.0 && self.gain_min <= 1.0) {
            return bad("gain_min must lie in (0, 1]");
        }
        if !(self.xi_min > 0.0) {
            return bad("xi_min must be positive");
        }
        if self.quefrency_min == 0 || self.quefrency_min > self.quefrency_max {
            return bad("quefrency range must satisfy 0 < min <= max");
        }
        if !(self.peak_threshold > 0.0) {
            return bad("peak_threshold must be positive");
        }
        Ok(())
    }
}

/// Recursive state of one stream. Frames must arrive in order.
pub struct PpState {
    pub npsd: Vec<f64>,
    pub prev_gain: Vec<f64>,
    pub prev_gamma: Vec<f64>,
    pub frame_index: u64,
    cepstrum: Cepstrum,
}

impl PpState {
    pub fn new(bins: usize) -> Self {
        PpState {
            npsd: vec![1.0; bins],
            prev_gain: vec![1.0; bins],
            prev_gamma: vec![1.0; bins],
            frame_index: 0,
            cepstrum: Cepstrum::new(bins),
        }
    }

    pub fn bins(&self) -> usize {
        self.npsd.len()
    }
}

/// Suppresses residual noise in one frame of the first-pipeline output.
///
/// `noisy` only enters through the speech presence probability; the noise PSD and
/// the gain act on `enhanced`, whose phase is left untouched.
pub fn pp_frame<T: Real>(
    state: &mut PpState,
    enhanced: &[Complex<T>],
    noisy: &[Complex<T>],
    cfg: &PpConfig,
) -> Vec<Complex<T>> {
    let bins = state.bins();
    debug_assert!(enhanced.len() == bins && noisy.len() == bins);
    let enh_mag: Vec<f64> = enhanced.iter().map(|c| c.re.hypot(c.im).to_f64_lossy()).collect();
    let noisy_mag: Vec<f64> = noisy.iter().map(|c| c.re.hypot(c.im).to_f64_lossy()).collect();
    let power: Vec<f64> = enh_mag.iter().map(|m| m * m).collect();

    let spp = derive_spp(&enh_mag, &noisy_mag);
    let (flattened, _) = state.cepstrum.process(&power, cfg);
    update_npsd(state, &flattened, &spp, cfg);

    let gamma: Vec<f64> = power
        .iter()
        .zip(&state.npsd)
        .map(|(&p, &n)| (p / n.max(NPSD_FLOOR)).max(NPSD_FLOOR))
        .collect();
    let xi: Vec<f64> = (0..bins)
        .map(|k| {
            let g = state.prev_gain[k];
            let dd = cfg.beta_dd * g * g * state.prev_gamma[k] + (1.0 - cfg.beta_dd) * (gamma[k] - 1.0).max(0.0);
            dd.max(cfg.xi_min)
        })
        .collect();
    let gain = lsa_gain(&xi, &gamma, cfg);

    state.prev_gain.copy_from_slice(&gain);
    state.prev_gamma.copy_from_slice(&gamma);
    state.frame_index += 1;

    enhanced
        .iter()
        .zip(&gain)
        .map(|(c, &g)| {
            let g = T::from_f64_lossy(g);
            Complex::new(c.re * g, c.im * g)
        })
        .collect()
}
