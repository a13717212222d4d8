use std::sync::Arc;

use num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use super::frame::PpConfig;

/// Power floor before taking logs.
const POWER_FLOOR: f64 = 1e-12;
/// Peaks below this (in nepers) are numerical noise, whatever the median says.
const MIN_PEAK: f64 = 1e-9;

/// Harmonic flattening in the real-cepstrum domain.
///
/// The log power spectrum, extended symmetrically to the full FFT length, is turned
/// into a real cepstrum. The strongest positive peak inside the pitch quefrency range
/// is located. When it stands out from the median magnitude of that range by
/// `peak_threshold` and is a local maximum, the peak and its rahmonics (integer multiples up to half the
/// length) are notched out, and the spectrum is rebuilt from what remains.
pub struct Cepstrum {
    n: usize,
    inverse: Arc<dyn ComplexToReal<f64>>,
    forward: Arc<dyn RealToComplex<f64>>,
    spec: Vec<Complex<f64>>,
    ceps: Vec<f64>,
}

impl Cepstrum {
    pub fn new(n_bins: usize) -> Self {
        let n = 2 * (n_bins - 1);
        let mut planner = RealFftPlanner::<f64>::new();
        let inverse = planner.plan_fft_inverse(n);
        let forward = planner.plan_fft_forward(n);
        Cepstrum {
            n,
            spec: inverse.make_input_vec(),
            ceps: inverse.make_output_vec(),
            inverse,
            forward,
        }
    }

    /// Returns the flattened power and the detected pitch quefrency, if any.
    pub fn process(&mut self, power: &[f64], cfg: &PpConfig) -> (Vec<f64>, Option<usize>) {
        let half = self.n / 2;
        debug_assert_eq!(power.len(), half + 1);
        for (s, &p) in self.spec.iter_mut().zip(power) {
            *s = Complex::new(p.max(POWER_FLOOR).ln(), 0.0);
        }
        self.inverse
            .process(&mut self.spec, &mut self.ceps)
            .expect("log spectrum is real");
        let scale = 1.0 / self.n as f64;
        self.ceps.iter_mut().for_each(|c| *c *= scale);

        let lo = cfg.quefrency_min.max(1);
        let hi = cfg.quefrency_max.min(half);
        if lo > hi {
            return (power.to_vec(), None);
        }
        let Some(q) = self.detect(lo, hi, cfg.peak_threshold) else {
            return (power.to_vec(), None);
        };

        let hw = cfg.notch_halfwidth;
        let mut m = 1;
        while m * q <= half + hw {
            let centre = m * q;
            for j in centre.saturating_sub(hw).max(1)..=(centre + hw).min(half) {
                self.ceps[j] = 0.0;
                self.ceps[self.n - j] = 0.0;
            }
            m += 1;
        }
        let mut out_spec = self.forward.make_output_vec();
        self.forward
            .process(&mut self.ceps, &mut out_spec)
            .expect("buffer sizes come from the plan");
        (out_spec.iter().map(|c| c.re.exp()).collect(), Some(q))
    }

    fn detect(&self, lo: usize, hi: usize, threshold: f64) -> Option<usize> {
        let c = &self.ceps;
        let argmax = |a: usize, b: usize| (a..=b).fold(a, |best, q| if c[q] > c[best] { q } else { best });
        let mut q = argmax(lo, hi);
        // Prefer the fundamental when half the quefrency holds a comparable peak.
        while q / 2 >= lo {
            let cand = argmax((q / 2).saturating_sub(1).max(lo), (q / 2 + 1).min(hi));
            if c[cand] > 0.5 * c[q] {
                q = cand;
            } else {
                break;
            }
        }
        let mut mags: Vec<f64> = (lo..=hi).map(|j| c[j].abs()).collect();
        mags.sort_by(f64::total_cmp);
        let median = if mags.len() % 2 == 1 {
            mags[mags.len() / 2]
        } else {
            0.5 * (mags[mags.len() / 2 - 1] + mags[mags.len() / 2])
        };
        // A pitch peak tops its neighbourhood, looking past the range edges too; the
        // decaying tail of a spectral tilt does not.
        let half = c.len() / 2;
        let local = (q.saturating_sub(2).max(1)..=(q + 2).min(half)).all(|j| j == q || c[q] > c[j]);
        (local && c[q] > MIN_PEAK && c[q] > threshold * median).then_some(q)
    }
}

/// One-shot form of [`Cepstrum::process`] returning only the flattened power.
pub fn cepstral_preprocess(power: &[f64], cfg: &PpConfig) -> Vec<f64> {
    Cepstrum::new(power.len()).process(power, cfg).0
}
