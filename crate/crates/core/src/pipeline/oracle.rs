use ndarray::Array2;
use num_complex::Complex;

use crate::dsp::ComplexSpectrogram;
use crate::error::{Error, Result};
use crate::real::Real;

/// Denominator guard of the ideal gain.
pub const ORACLE_EPS: f64 = 1e-12;

/// Ideal amplitude gain `min(1, |S| / (|X| + ε))` for one frame.
pub fn oracle_gain_frame<T: Real>(clean: &[Complex<T>], noisy: &[Complex<T>]) -> Vec<f64> {
    clean
        .iter()
        .zip(noisy)
        .map(|(s, x)| {
            let s = s.re.to_f64_lossy().hypot(s.im.to_f64_lossy());
            let x = x.re.to_f64_lossy().hypot(x.im.to_f64_lossy());
            (s / (x + ORACLE_EPS)).min(1.0)
        })
        .collect()
}

/// Ideal gains for aligned spectrograms, frames by bins.
pub fn oracle_gain_mode<T: Real>(clean: &ComplexSpectrogram<T>, noisy: &ComplexSpectrogram<T>) -> Result<Array2<f64>> {
    if clean.dim() != noisy.dim() {
        return Err(Error::shape(format!(
            "clean reference is {:?}, noisy input is {:?}",
            clean.dim(),
            noisy.dim()
        )));
    }
    let (frames, bins) = noisy.dim();
    let mut out = Array2::zeros((frames, bins));
    for t in 0..frames {
        let g = oracle_gain_frame(&clean.frame(t), &noisy.frame(t));
        out.row_mut(t).iter_mut().zip(g).for_each(|(o, g)| *o = g);
    }
    Ok(out)
}
