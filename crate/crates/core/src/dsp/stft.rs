use std::sync::Arc;

use num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use super::spectrum::{ComplexSpectrogram, WaveBuffer};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::SAMPLE_RATE;

/// Framing parameters. The forward FFT is unnormalized and the inverse carries the
/// `1/N` factor, so per-frame Parseval reads `Σ|X_k|² (one-sided, doubled) = N Σ|x_n w_n|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    pub win_len: usize,
    pub hop: usize,
    pub fft_size: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            win_len: 320,
            hop: 160,
            fft_size: 320,
        }
    }
}

impl StftConfig {
    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Periodic Hann window, `0.5 - 0.5 cos(2πn/N)`.
    pub fn window<T: Real>(&self) -> Vec<T> {
        let n = self.win_len as f64;
        (0..self.win_len)
            .map(|i| T::from_f64_lossy(0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n).cos()))
            .collect()
    }

    /// Window length plus hop, in samples.
    pub fn algorithmic_delay_samples(&self) -> usize {
        self.win_len + self.hop
    }

    pub fn algorithmic_delay_ms(&self) -> f64 {
        self.algorithmic_delay_samples() as f64 * 1000.0 / SAMPLE_RATE as f64
    }

    /// Frame count for a signal of `len` samples (no padding).
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.win_len {
            0
        } else {
            (len - self.win_len) / self.hop + 1
        }
    }

    /// Centre frequency of bin `k` in Hz.
    pub fn bin_frequency(&self, k: usize) -> f64 {
        k as f64 * SAMPLE_RATE as f64 / self.fft_size as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.hop * 2 != self.win_len || self.fft_size != self.win_len || self.hop == 0 {
            return Err(Error::InvalidArgument(format!(
                "unsupported framing {self:?}: need hop = win_len / 2 = fft_size / 2"
            )));
        }
        Ok(())
    }
}

/// Windowed forward transform of single frames.
pub struct Analyzer<T: Real> {
    fft: Arc<dyn RealToComplex<T>>,
    window: Vec<T>,
    input: Vec<T>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> Analyzer<T> {
    pub fn new(cfg: &StftConfig) -> Self {
        let fft = RealFftPlanner::<T>::new().plan_fft_forward(cfg.fft_size);
        Analyzer {
            input: fft.make_input_vec(),
            scratch: fft.make_scratch_vec(),
            window: cfg.window(),
            fft,
        }
    }

    /// Transforms one `win_len` frame into `n_bins` complex values.
    pub fn frame(&mut self, samples: &[T]) -> Vec<Complex<T>> {
        debug_assert_eq!(samples.len(), self.window.len());
        for ((dst, &x), &w) in self.input.iter_mut().zip(samples).zip(&self.window) {
            *dst = x * w;
        }
        let mut out = self.fft.make_output_vec();
        self.fft
            .process_with_scratch(&mut self.input, &mut out, &mut self.scratch)
            .expect("buffer sizes come from the plan");
        out
    }
}

/// Batch STFT. Frame `t` covers samples `[t·hop, t·hop + win_len)`; there is no padding.
pub fn analyze<T: Real>(wave: &WaveBuffer<T>, cfg: &StftConfig) -> Result<ComplexSpectrogram<T>> {
    cfg.validate()?;
    if wave.sample_rate != SAMPLE_RATE {
        return Err(Error::SampleRate(wave.sample_rate));
    }
    if wave.len() < cfg.win_len {
        return Err(Error::TooShort {
            len: wave.len(),
            needed: cfg.win_len,
        });
    }
    let mut analyzer = Analyzer::new(cfg);
    let frames = cfg.frame_count(wave.len());
    let mut spec = ComplexSpectrogram::zeros(frames, cfg.n_bins());
    for t in 0..frames {
        let start = t * cfg.hop;
        let frame = analyzer.frame(&wave.samples[start..start + cfg.win_len]);
        spec.set_frame(t, &frame)?;
    }
    Ok(spec)
}

/// Streaming STFT front end. Emits a frame as soon as a full window is buffered.
pub struct StreamAnalyzer<T: Real> {
    cfg: StftConfig,
    analyzer: Analyzer<T>,
    pending: Vec<T>,
}

impl<T: Real> StreamAnalyzer<T> {
    pub fn new(cfg: &StftConfig) -> Self {
        StreamAnalyzer {
            cfg: *cfg,
            analyzer: Analyzer::new(cfg),
            pending: Vec::with_capacity(2 * cfg.win_len),
        }
    }

    pub fn push(&mut self, samples: &[T]) -> Vec<Vec<Complex<T>>> {
        self.pending.extend_from_slice(samples);
        let mut frames = Vec::new();
        while self.pending.len() >= self.cfg.win_len {
            frames.push(self.analyzer.frame(&self.pending[..self.cfg.win_len]));
            self.pending.drain(..self.cfg.hop);
        }
        frames
    }

    /// Samples buffered but not yet part of an emitted frame's leading hop.
    pub fn buffered(&self) -> usize {
        self.pending.len()
    }
}

/// Streaming weighted overlap-add. Each pushed frame finalizes `hop` output samples;
/// every output sample is divided by the squared-window mass that reached it.
pub struct StreamSynthesizer<T: Real> {
    cfg: StftConfig,
    ifft: Arc<dyn ComplexToReal<T>>,
    window: Vec<T>,
    spectrum: Vec<Complex<T>>,
    time: Vec<T>,
    scratch: Vec<Complex<T>>,
    acc: Vec<T>,
    weight: Vec<T>,
    started: bool,
}

impl<T: Real> StreamSynthesizer<T> {
    pub fn new(cfg: &StftConfig) -> Self {
        let ifft = RealFftPlanner::<T>::new().plan_fft_inverse(cfg.fft_size);
        StreamSynthesizer {
            cfg: *cfg,
            spectrum: ifft.make_input_vec(),
            time: ifft.make_output_vec(),
            scratch: ifft.make_scratch_vec(),
            window: cfg.window(),
            acc: vec![T::zero(); cfg.win_len],
            weight: vec![T::zero(); cfg.win_len],
            started: false,
            ifft,
        }
    }

    pub fn push(&mut self, frame: &[Complex<T>]) -> Result<Vec<T>> {
        let bins = self.cfg.n_bins();
        if frame.len() != bins {
            return Err(Error::BinCount {
                expected: bins,
                found: frame.len(),
            });
        }
        self.spectrum.copy_from_slice(frame);
        // A real signal has purely real DC and Nyquist bins.
        self.spectrum[0].im = T::zero();
        self.spectrum[bins - 1].im = T::zero();
        self.ifft
            .process_with_scratch(&mut self.spectrum, &mut self.time, &mut self.scratch)
            .expect("buffer sizes come from the plan");
        let scale = T::one() / T::from_usize(self.cfg.fft_size).unwrap();
        for i in 0..self.cfg.win_len {
            let w = self.window[i];
            self.acc[i] = self.acc[i] + self.time[i] * scale * w;
            self.weight[i] = self.weight[i] + w * w;
        }
        self.started = true;
        let out = self.normalized(self.cfg.hop);
        self.acc.copy_within(self.cfg.hop.., 0);
        self.weight.copy_within(self.cfg.hop.., 0);
        let tail = self.cfg.win_len - self.cfg.hop;
        self.acc[tail..].fill(T::zero());
        self.weight[tail..].fill(T::zero());
        Ok(out)
    }

    /// Flushes the samples covered only by the last frame.
    pub fn finish(&mut self) -> Vec<T> {
        if !self.started {
            return Vec::new();
        }
        self.started = false;
        let out = self.normalized(self.cfg.win_len - self.cfg.hop);
        self.acc.fill(T::zero());
        self.weight.fill(T::zero());
        out
    }

    fn normalized(&self, n: usize) -> Vec<T> {
        let floor = T::from_f64_lossy(1e-10);
        (0..n)
            .map(|i| {
                if self.weight[i] > floor {
                    self.acc[i] / self.weight[i]
                } else {
                    T::zero()
                }
            })
            .collect()
    }
}

/// Batch overlap-add synthesis. Produces `(T - 1)·hop + win_len` samples.
pub fn synthesize<T: Real>(spec: &ComplexSpectrogram<T>, cfg: &StftConfig) -> Result<WaveBuffer<T>> {
    cfg.validate()?;
    if spec.bins() != cfg.n_bins() {
        return Err(Error::BinCount {
            expected: cfg.n_bins(),
            found: spec.bins(),
        });
    }
    let mut synth = StreamSynthesizer::new(cfg);
    let mut samples = Vec::with_capacity(spec.frames() * cfg.hop + cfg.win_len);
    for t in 0..spec.frames() {
        samples.extend(synth.push(&spec.frame(t))?);
    }
    samples.extend(synth.finish());
    Ok(WaveBuffer::new(samples))
}
