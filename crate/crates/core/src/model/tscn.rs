use ndarray::Array2;
use num_complex::Complex;

use super::config::{ModelConfig, NetKind};
use super::net::{Net, NetState};
use crate::dsp::{couple_phase, mag_phase, ComplexSpectrogram};
use crate::error::{Error, Result};
use crate::nn::{init_params, ParamStore};
use crate::real::Real;

/// Both stages with their parameters.
#[derive(Debug, Clone)]
pub struct TscnModel<T = f32> {
    cfg: ModelConfig,
    cme: Net<T>,
    csr: Net<T>,
    cme_params: usize,
    csr_params: usize,
}

/// Intermediate and final spectra of a batch forward pass.
#[derive(Debug, Clone)]
pub struct TscnOutput<T> {
    pub est_mag: Array2<T>,
    pub ccs: ComplexSpectrogram<T>,
    pub residual: ComplexSpectrogram<T>,
    pub refined: ComplexSpectrogram<T>,
}

/// Outputs for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutput<T> {
    pub est_mag: Vec<T>,
    pub ccs: Vec<Complex<T>>,
    pub refined: Vec<Complex<T>>,
}

impl<T: Real> TscnModel<T> {
    pub fn from_params(cfg: &ModelConfig, store: &ParamStore<T>) -> Result<Self> {
        let count = |kind| cfg.param_specs(kind).iter().map(|s| s.numel()).sum();
        Ok(TscnModel {
            cme: Net::from_store(cfg, NetKind::Cme, store)?,
            csr: Net::from_store(cfg, NetKind::Csr, store)?,
            cme_params: count(NetKind::Cme),
            csr_params: count(NetKind::Csr),
            cfg: cfg.clone(),
        })
    }

    /// Randomly initialized model; the parameters are returned alongside.
    pub fn seeded(cfg: &ModelConfig, seed: u64) -> Result<(Self, ParamStore<T>)> {
        let store = init_params(&cfg.all_param_specs(), seed)?.cast::<T>();
        Ok((Self::from_params(cfg, &store)?, store))
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn cme(&self) -> &Net<T> {
        &self.cme
    }

    pub fn csr(&self) -> &Net<T> {
        &self.csr
    }

    pub fn cme_param_count(&self) -> usize {
        self.cme_params
    }

    pub fn param_count(&self) -> usize {
        self.cme_params + self.csr_params
    }

    fn check_bins(&self, bins: usize) -> Result<()> {
        if bins != self.cfg.n_bins {
            return Err(Error::BinCount {
                expected: self.cfg.n_bins,
                found: bins,
            });
        }
        Ok(())
    }

    /// Stage 1: `|S̃cm| = F_cm(|X|)`.
    pub fn cme_forward(&self, noisy_mag: &Array2<T>) -> Result<Array2<T>> {
        self.check_bins(noisy_mag.ncols())?;
        let (frames, bins) = noisy_mag.dim();
        let mut state = self.cme.state();
        let mut out = Array2::zeros((frames, bins));
        let mut frame_out = vec![T::zero(); bins];
        for t in 0..frames {
            let row: Vec<T> = noisy_mag.row(t).to_vec();
            self.cme.step(&mut state, &row, &mut frame_out);
            out.row_mut(t).assign(&ndarray::ArrayView1::from(&frame_out));
        }
        Ok(out)
    }

    /// Stage 2 residual `F_cs(S̃cm_r, S̃cm_i, X_r, X_i)`.
    pub fn csr_forward(&self, ccs: &ComplexSpectrogram<T>, noisy: &ComplexSpectrogram<T>) -> Result<ComplexSpectrogram<T>> {
        if ccs.dim() != noisy.dim() {
            return Err(Error::shape(format!(
                "coarse spectrum is {:?}, noisy spectrum is {:?}",
                ccs.dim(),
                noisy.dim()
            )));
        }
        self.check_bins(ccs.bins())?;
        let (frames, bins) = ccs.dim();
        let mut state = self.csr.state();
        let mut input = vec![T::zero(); bins * 4];
        let mut out = vec![T::zero(); bins * 2];
        let mut res = ComplexSpectrogram::zeros(frames, bins);
        for t in 0..frames {
            for k in 0..bins {
                input[4 * k] = ccs.real[[t, k]];
                input[4 * k + 1] = ccs.imag[[t, k]];
                input[4 * k + 2] = noisy.real[[t, k]];
                input[4 * k + 3] = noisy.imag[[t, k]];
            }
            self.csr.step(&mut state, &input, &mut out);
            for k in 0..bins {
                res.real[[t, k]] = out[2 * k];
                res.imag[[t, k]] = out[2 * k + 1];
            }
        }
        Ok(res)
    }

    /// Full two-stage pass over an utterance.
    pub fn forward(&self, noisy: &ComplexSpectrogram<T>) -> Result<TscnOutput<T>> {
        self.check_bins(noisy.bins())?;
        let mp = mag_phase(noisy);
        let est_mag = self.cme_forward(&mp.mag)?;
        let ccs = couple_phase(&est_mag, &mp.phase)?;
        let residual = self.csr_forward(&ccs, noisy)?;
        let refined = ComplexSpectrogram::from_parts(&ccs.real + &residual.real, &ccs.imag + &residual.imag)?;
        Ok(TscnOutput {
            est_mag,
            ccs,
            residual,
            refined,
        })
    }

    /// Refined spectrum only.
    pub fn tscn_forward(&self, noisy: &ComplexSpectrogram<T>) -> Result<ComplexSpectrogram<T>> {
        Ok(self.forward(noisy)?.refined)
    }

    pub fn stream(&self) -> TscnStream<'_, T> {
        let bins = self.cfg.n_bins;
        TscnStream {
            model: self,
            cme: self.cme.state(),
            csr: self.csr.state(),
            mag: vec![T::zero(); bins],
            est: vec![T::zero(); bins],
            csr_in: vec![T::zero(); bins * 4],
            csr_out: vec![T::zero(); bins * 2],
        }
    }
}

/// Frame-by-frame inference with per-stream convolution histories.
pub struct TscnStream<'a, T: Real> {
    model: &'a TscnModel<T>,
    cme: NetState<T>,
    csr: NetState<T>,
    mag: Vec<T>,
    est: Vec<T>,
    csr_in: Vec<T>,
    csr_out: Vec<T>,
}

impl<T: Real> TscnStream<'_, T> {
    /// Processes one noisy frame. With `refine == false` only the first stage runs and
    /// `refined` equals the coarse complex spectrum.
    pub fn step(&mut self, noisy: &[Complex<T>], refine: bool) -> Result<FrameOutput<T>> {
        let bins = self.model.cfg.n_bins;
        self.model.check_bins(noisy.len())?;
        for (m, x) in self.mag.iter_mut().zip(noisy) {
            *m = x.re.hypot(x.im);
        }
        self.model.cme.step(&mut self.cme, &self.mag, &mut self.est);
        let ccs: Vec<Complex<T>> = self
            .est
            .iter()
            .zip(noisy)
            .map(|(&m, x)| {
                let phase = if x.re == T::zero() && x.im == T::zero() {
                    T::zero()
                } else {
                    x.im.atan2(x.re)
                };
                Complex::new(m * phase.cos(), m * phase.sin())
            })
            .collect();
        let refined = if refine {
            for k in 0..bins {
                self.csr_in[4 * k] = ccs[k].re;
                self.csr_in[4 * k + 1] = ccs[k].im;
                self.csr_in[4 * k + 2] = noisy[k].re;
                self.csr_in[4 * k + 3] = noisy[k].im;
            }
            self.model.csr.step(&mut self.csr, &self.csr_in, &mut self.csr_out);
            (0..bins)
                .map(|k| Complex::new(ccs[k].re + self.csr_out[2 * k], ccs[k].im + self.csr_out[2 * k + 1]))
                .collect()
        } else {
            ccs.clone()
        };
        Ok(FrameOutput {
            est_mag: self.est.clone(),
            ccs,
            refined,
        })
    }
}
