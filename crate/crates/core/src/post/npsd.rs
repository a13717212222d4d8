use super::frame::{PpConfig, PpState};

/// Floor that keeps the noise estimate strictly positive.
pub(crate) const NPSD_FLOOR: f64 = 1e-12;

/// SPP-weighted first-order recursion:
/// `α̃ = α_d + (1 - α_d)·spp`, `λ ← α̃ λ + (1 - α̃) P`.
///
/// The first call seeds the estimate with `power`.
pub fn update_npsd(state: &mut PpState, power: &[f64], spp: &[f64], cfg: &PpConfig) {
    debug_assert_eq!(power.len(), state.npsd.len());
    if state.frame_index == 0 {
        for (n, &p) in state.npsd.iter_mut().zip(power) {
            *n = p.max(NPSD_FLOOR);
        }
        return;
    }
    let a = cfg.alpha_d;
    for ((n, &p), &s) in state.npsd.iter_mut().zip(power).zip(spp) {
        let alpha = a + (1.0 - a) * s;
        *n = (alpha * *n + (1.0 - alpha) * p).max(NPSD_FLOOR);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn started(bins: usize, init: f64) -> PpState {
        let mut s = PpState::new(bins);
        update_npsd(&mut s, &vec![init; bins], &vec![0.0; bins], &PpConfig::default());
        s.frame_index = 1;
        s
    }

    #[test]
    fn full_presence_freezes_estimate() {
        let cfg = PpConfig::default();
        let mut s = started(4, 0.3);
        s.npsd = vec![0.1, 0.2, 0.3, 0.123_456_789];
        let before = s.npsd.clone();
        update_npsd(&mut s, &[5.0, 6.0, 7.0, 8.0], &[1.0; 4], &cfg);
        assert_eq!(s.npsd, before);
    }

    #[test]
    fn absent_speech_converges_geometrically() {
        let cfg = PpConfig::default();
        let (p, n0) = (2.0, 0.5);
        let mut s = started(3, n0);
        for n in 1..=30 {
            update_npsd(&mut s, &[p; 3], &[0.0; 3], &cfg);
            let want = p - (p - n0) * cfg.alpha_d.powi(n);
            for &v in &s.npsd {
                assert!((v - want).abs() < 1e-12 * p, "frame {n}: {v} vs {want}");
            }
        }
    }
}
