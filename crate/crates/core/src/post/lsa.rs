use super::expint::expint_e1;
use super::frame::PpConfig;

/// `G = ξ/(1+ξ) · exp(E1(v)/2)` with `v = ξγ/(1+ξ)`, before flooring.
pub fn lsa_gain_unclamped(xi: f64, gamma: f64) -> f64 {
    let w = xi / (1.0 + xi);
    let v = (w * gamma).max(f64::MIN_POSITIVE);
    let e1 = expint_e1(v).expect("v is positive");
    w * (0.5 * e1).exp()
}

/// MMSE log-spectral amplitude gain per bin, clamped to `[gain_min, 1]`.
pub fn lsa_gain(xi: &[f64], gamma: &[f64], cfg: &PpConfig) -> Vec<f64> {
    xi.iter()
        .zip(gamma)
        .map(|(&x, &g)| lsa_gain_unclamped(x, g).clamp(cfg.gain_min, 1.0))
        .collect()
}
