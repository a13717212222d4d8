use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::SAMPLE_RATE;

/// Mono waveform at 16 kHz, nominally in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveBuffer<T = f32> {
    pub samples: Vec<T>,
    pub sample_rate: u32,
}

impl<T: Real> WaveBuffer<T> {
    pub fn new(samples: Vec<T>) -> Self {
        WaveBuffer {
            samples,
            sample_rate: SAMPLE_RATE,
        }
    }

    pub fn with_rate(samples: Vec<T>, sample_rate: u32) -> Self {
        WaveBuffer {
            samples,
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_rate != SAMPLE_RATE {
            return Err(Error::SampleRate(self.sample_rate));
        }
        if let Some(i) = self.samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample at index {i}")));
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> WaveBuffer<U> {
        WaveBuffer {
            samples: self.samples.iter().map(|&s| U::from_f64_lossy(s.to_f64_lossy())).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Complex spectrogram stored as separate real and imaginary `frames × bins` planes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram<T = f32> {
    pub real: Array2<T>,
    pub imag: Array2<T>,
}

impl<T: Real> ComplexSpectrogram<T> {
    pub fn zeros(frames: usize, bins: usize) -> Self {
        ComplexSpectrogram {
            real: Array2::zeros((frames, bins)),
            imag: Array2::zeros((frames, bins)),
        }
    }

    pub fn from_parts(real: Array2<T>, imag: Array2<T>) -> Result<Self> {
        if real.dim() != imag.dim() {
            return Err(Error::shape(format!(
                "real plane is {:?}, imaginary plane is {:?}",
                real.dim(),
                imag.dim()
            )));
        }
        Ok(ComplexSpectrogram { real, imag })
    }

    pub fn from_frames(frames: &[Vec<Complex<T>>], bins: usize) -> Result<Self> {
        let mut spec = Self::zeros(frames.len(), bins);
        for (t, frame) in frames.iter().enumerate() {
            spec.set_frame(t, frame)?;
        }
        Ok(spec)
    }

    pub fn frames(&self) -> usize {
        self.real.nrows()
    }

    pub fn bins(&self) -> usize {
        self.real.ncols()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.real.dim()
    }

    pub fn get(&self, t: usize, k: usize) -> Complex<T> {
        Complex::new(self.real[[t, k]], self.imag[[t, k]])
    }

    pub fn frame(&self, t: usize) -> Vec<Complex<T>> {
        (0..self.bins()).map(|k| self.get(t, k)).collect()
    }

    pub fn set_frame(&mut self, t: usize, frame: &[Complex<T>]) -> Result<()> {
        if frame.len() != self.bins() {
            return Err(Error::BinCount {
                expected: self.bins(),
                found: frame.len(),
            });
        }
        for (k, c) in frame.iter().enumerate() {
            self.real[[t, k]] = c.re;
            self.imag[[t, k]] = c.im;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.real.iter().chain(self.imag.iter()).all(|v| v.is_finite())
    }

    /// Elementwise `|X|`.
    pub fn magnitude(&self) -> Array2<T> {
        ndarray::Zip::from(&self.real)
            .and(&self.imag)
            .map_collect(|&r, &i| r.hypot(i))
    }

    pub fn cast<U: Real>(&self) -> ComplexSpectrogram<U> {
        let c = |v: &T| U::from_f64_lossy(v.to_f64_lossy());
        ComplexSpectrogram {
            real: self.real.map(c),
            imag: self.imag.map(c),
        }
    }
}

/// Polar view of a spectrogram.
#[derive(Debug, Clone, PartialEq)]
pub struct MagPhase<T = f32> {
    pub mag: Array2<T>,
    pub phase: Array2<T>,
}

/// Splits a spectrogram into magnitude and phase. Zero bins get phase 0.
pub fn mag_phase<T: Real>(spec: &ComplexSpectrogram<T>) -> MagPhase<T> {
    let phase = ndarray::Zip::from(&spec.real)
        .and(&spec.imag)
        .map_collect(|&r, &i| {
            if r == T::zero() && i == T::zero() {
                T::zero()
            } else {
                i.atan2(r)
            }
        });
    MagPhase {
        mag: spec.magnitude(),
        phase,
    }
}

/// Recombines an estimated magnitude with a phase (`|S| e^{jθ}`).
pub fn couple_phase<T: Real>(mag: &Array2<T>, phase: &Array2<T>) -> Result<ComplexSpectrogram<T>> {
    if mag.dim() != phase.dim() {
        return Err(Error::shape(format!(
            "magnitude is {:?}, phase is {:?}",
            mag.dim(),
            phase.dim()
        )));
    }
    let real = ndarray::Zip::from(mag).and(phase).map_collect(|&m, &p| m * p.cos());
    let imag = ndarray::Zip::from(mag).and(phase).map_collect(|&m, &p| m * p.sin());
    Ok(ComplexSpectrogram { real, imag })
}
