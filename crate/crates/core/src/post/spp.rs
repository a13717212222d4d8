/// Denominator guard of [`derive_spp`].
pub const SPP_EPS: f64 = 1e-12;

/// Speech presence probability from a spectral gain: `clamp(|Ŝ| / (|X| + ε), 0, 1)`.
pub fn derive_spp(enhanced_mag: &[f64], noisy_mag: &[f64]) -> Vec<f64> {
    debug_assert_eq!(enhanced_mag.len(), noisy_mag.len());
    enhanced_mag
        .iter()
        .zip(noisy_mag)
        .map(|(&e, &n)| (e / (n + SPP_EPS)).clamp(0.0, 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unity_zero_and_proportional() {
        let noisy: Vec<f64> = (0..161).map(|k| 0.01 + k as f64).collect();
        for (p, n) in derive_spp(&noisy, &noisy).iter().zip(&noisy) {
            assert_eq!(*p, n / (n + SPP_EPS));
            assert!((p - 1.0).abs() < 1e-9);
        }
        assert!(derive_spp(&vec![0.0; 161], &noisy).iter().all(|&p| p == 0.0));
        let scaled: Vec<f64> = noisy.iter().map(|v| 0.3 * v).collect();
        assert!(derive_spp(&scaled, &noisy).iter().all(|&p| (p - 0.3).abs() < 1e-9));
    }

    #[test]
    fn clamps_gain_above_one_and_silent_bins() {
        assert_eq!(derive_spp(&[2.0, 0.0], &[1.0, 0.0]), [1.0, 0.0]);
    }
}
