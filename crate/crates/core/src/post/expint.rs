use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E1(v) = ∫_v^∞ e^{-t}/t dt` for `v > 0`.
///
/// Power series below 1, modified-Lentz continued fraction above.
pub fn expint_e1(v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidArgument(format!("E1 needs a positive finite argument, got {v}")));
    }
    Ok(if v <= 1.0 { series(v) } else { continued_fraction(v) })
}

fn series(v: f64) -> f64 {
    // E1(v) = -γ - ln v - Σ_{k≥1} (-v)^k / (k·k!)
    let mut sum = 0.0;
    let mut term = 1.0; // (-v)^k / k!
    for k in 1..60 {
        term *= -v / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - v.ln() - sum
}

fn continued_fraction(v: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = v + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-v).exp()
}
