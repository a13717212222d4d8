use crate::dsp::WaveBuffer;
use crate::error::{Error, Result};
use crate::real::Real;

fn power<T: Real>(x: &[T]) -> f64 {
    x.iter().map(|v| v.to_f64_lossy().powi(2)).sum::<f64>() / x.len().max(1) as f64
}

/// Adds `noise`, truncated to the length of `clean` and scaled so the mixture has
/// the requested SNR.
pub fn mix_at_snr<T: Real>(clean: &WaveBuffer<T>, noise: &WaveBuffer<T>, snr_db: f64) -> Result<WaveBuffer<T>> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!("snr_db must be finite, got {snr_db}")));
    }
    if clean.sample_rate != noise.sample_rate {
        return Err(Error::InvalidArgument("clean and noise sample rates differ".into()));
    }
    let n = clean.len();
    if noise.len() < n {
        return Err(Error::InvalidArgument(format!(
            "noise has {} samples, clean has {n}",
            noise.len()
        )));
    }
    let noise = &noise.samples[..n];
    let (pc, pn) = (power(&clean.samples), power(noise));
    if !(pc > 0.0) || !(pn > 0.0) {
        return Err(Error::InvalidArgument("clean and noise must have non-zero power".into()));
    }
    let gain = (pc / (pn * 10f64.powf(snr_db / 10.0))).sqrt();
    let samples = clean
        .samples
        .iter()
        .zip(noise)
        .map(|(&c, &v)| T::from_f64_lossy(c.to_f64_lossy() + gain * v.to_f64_lossy()))
        .collect();
    Ok(WaveBuffer::with_rate(samples, clean.sample_rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measured_snr_matches_request() {
        let clean: Vec<f64> = (0..4000).map(|i| (i as f64 * 0.05).sin()).collect();
        let noise: Vec<f64> = (0..5000).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let (c, n) = (WaveBuffer::new(clean.clone()), WaveBuffer::new(noise));
        for &snr in &[-5.0, 0.0, 5.0, 10.0, 15.0, 60.0] {
            let mix = mix_at_snr(&c, &n, snr).unwrap();
            let resid: Vec<f64> = mix.samples.iter().zip(&clean).map(|(m, c)| m - c).collect();
            let got = 10.0 * (power(&clean) / power(&resid)).log10();
            assert!((got - snr).abs() < 1e-6, "{snr}: {got}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = WaveBuffer::new(vec![1.0f32; 10]);
        assert!(mix_at_snr(&c, &WaveBuffer::new(vec![1.0; 5]), 0.0).is_err());
        assert!(mix_at_snr(&c, &WaveBuffer::new(vec![0.0; 10]), 0.0).is_err());
        assert!(mix_at_snr(&WaveBuffer::new(vec![0.0; 10]), &c, 0.0).is_err());
    }
}
