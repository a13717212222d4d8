use ndarray::{Array2, Zip};

use crate::dsp::ComplexSpectrogram;
use crate::error::{Error, Result};
use crate::real::Real;

/// How the squared differences are reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Squared Frobenius norm.
    #[default]
    Sum,
    /// Sum divided by the number of time-frequency points.
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    /// Weight of the magnitude loss in the joint objective.
    pub lambda_cm: f64,
    /// Smoothing inside the magnitude square root, gradient only.
    pub mag_epsilon: f64,
    pub reduction: Reduction,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            lambda_cm: 0.1,
            mag_epsilon: 1e-8,
            reduction: Reduction::Sum,
        }
    }
}

impl LossConfig {
    pub fn mean() -> Self {
        LossConfig {
            reduction: Reduction::Mean,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_cm >= 0.0) {
            return Err(Error::Config("lambda_cm must be non-negative".into()));
        }
        if !(self.mag_epsilon >= 0.0) {
            return Err(Error::Config("mag_epsilon must be non-negative".into()));
        }
        Ok(())
    }

    fn scale(&self, points: usize) -> f64 {
        match self.reduction {
            Reduction::Sum => 1.0,
            Reduction::Mean => 1.0 / points.max(1) as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub l_cm: f64,
    pub l_ri: f64,
    pub l_mag: f64,
    pub l_total: f64,
    pub reduction: Reduction,
}

impl LossReport {
    pub fn compose(l_cm: f64, l_ri: f64, l_mag: f64, cfg: &LossConfig) -> Self {
        LossReport {
            l_cm,
            l_ri,
            l_mag,
            l_total: l_ri + l_mag + cfg.lambda_cm * l_cm,
            reduction: cfg.reduction,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.l_cm, self.l_ri, self.l_mag, self.l_total].iter().all(|v| v.is_finite())
    }
}

/// Gradients of the complex-spectrum losses with respect to the estimate.
#[derive(Debug, Clone)]
pub struct LossGradients<T> {
    pub ri: ComplexSpectrogram<T>,
    pub mag: ComplexSpectrogram<T>,
    /// `ri + mag`, the gradient of the complex part of the joint loss.
    pub cs: ComplexSpectrogram<T>,
}

fn same_dim(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::shape(format!("estimate is {a:?}, reference is {b:?}")));
    }
    Ok(())
}

fn sq_diff<T: Real>(a: &Array2<T>, b: &Array2<T>) -> f64 {
    Zip::from(a).and(b).fold(0.0, |acc, &x, &y| {
        let d = x.to_f64_lossy() - y.to_f64_lossy();
        acc + d * d
    })
}

fn mag64<T: Real>(re: T, im: T) -> f64 {
    re.to_f64_lossy().hypot(im.to_f64_lossy())
}

/// Stage-one magnitude loss.
pub fn loss_cm<T: Real>(est_mag: &Array2<T>, clean_mag: &Array2<T>, cfg: &LossConfig) -> Result<f64> {
    same_dim(est_mag.dim(), clean_mag.dim())?;
    Ok(cfg.scale(est_mag.len()) * sq_diff(est_mag, clean_mag))
}

pub fn loss_ri<T: Real>(est: &ComplexSpectrogram<T>, clean: &ComplexSpectrogram<T>, cfg: &LossConfig) -> Result<f64> {
    same_dim(est.dim(), clean.dim())?;
    let s = sq_diff(&est.real, &clean.real) + sq_diff(&est.imag, &clean.imag);
    Ok(cfg.scale(est.real.len()) * s)
}

pub fn loss_mag<T: Real>(est: &ComplexSpectrogram<T>, clean: &ComplexSpectrogram<T>, cfg: &LossConfig) -> Result<f64> {
    same_dim(est.dim(), clean.dim())?;
    let s = Zip::from(&est.real)
        .and(&est.imag)
        .and(&clean.real)
        .and(&clean.imag)
        .fold(0.0, |acc, &er, &ei, &cr, &ci| {
            let d = mag64(er, ei) - mag64(cr, ci);
            acc + d * d
        });
    Ok(cfg.scale(est.real.len()) * s)
}

/// All components of the joint objective.
pub fn loss_joint<T: Real>(
    est: &ComplexSpectrogram<T>,
    clean: &ComplexSpectrogram<T>,
    est_mag_stage1: &Array2<T>,
    clean_mag: &Array2<T>,
    cfg: &LossConfig,
) -> Result<LossReport> {
    cfg.validate()?;
    let l_ri = loss_ri(est, clean, cfg)?;
    let l_mag = loss_mag(est, clean, cfg)?;
    let l_cm = loss_cm(est_mag_stage1, clean_mag, cfg)?;
    Ok(LossReport::compose(l_cm, l_ri, l_mag, cfg))
}

pub fn loss_cm_gradient<T: Real>(est_mag: &Array2<T>, clean_mag: &Array2<T>, cfg: &LossConfig) -> Result<Array2<T>> {
    same_dim(est_mag.dim(), clean_mag.dim())?;
    let two = T::from_f64_lossy(2.0 * cfg.scale(est_mag.len()));
    Ok(Zip::from(est_mag).and(clean_mag).map_collect(|&e, &c| two * (e - c)))
}

/// Analytic gradients of `loss_ri` and `loss_mag`.
///
/// The magnitude of the estimate is taken as `sqrt(r² + i² + ε)` so the gradient
/// stays finite at zero bins.
pub fn loss_gradients<T: Real>(
    est: &ComplexSpectrogram<T>,
    clean: &ComplexSpectrogram<T>,
    cfg: &LossConfig,
) -> Result<LossGradients<T>> {
    same_dim(est.dim(), clean.dim())?;
    let (frames, bins) = est.dim();
    let scale = cfg.scale(frames * bins);
    let two = T::from_f64_lossy(2.0 * scale);
    let ri = ComplexSpectrogram::from_parts(
        Zip::from(&est.real).and(&clean.real).map_collect(|&e, &c| two * (e - c)),
        Zip::from(&est.imag).and(&clean.imag).map_collect(|&e, &c| two * (e - c)),
    )?;
    let mut mag = ComplexSpectrogram::zeros(frames, bins);
    let eps = cfg.mag_epsilon;
    for t in 0..frames {
        for k in 0..bins {
            let (r, i) = (est.real[[t, k]].to_f64_lossy(), est.imag[[t, k]].to_f64_lossy());
            let m = (r * r + i * i + eps).sqrt();
            let target = mag64(clean.real[[t, k]], clean.imag[[t, k]]);
            let f = if m > 0.0 { 2.0 * scale * (m - target) / m } else { 0.0 };
            mag.real[[t, k]] = T::from_f64_lossy(f * r);
            mag.imag[[t, k]] = T::from_f64_lossy(f * i);
        }
    }
    let cs = ComplexSpectrogram::from_parts(&ri.real + &mag.real, &ri.imag + &mag.imag)?;
    Ok(LossGradients { ri, mag, cs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn spec(re: Array2<f64>, im: Array2<f64>) -> ComplexSpectrogram<f64> {
        ComplexSpectrogram::from_parts(re, im).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let cfg = LossConfig::default();
        let est = array![[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(loss_cm(&est, &Array2::zeros((2, 2)), &cfg).unwrap(), 30.0);
        assert_eq!(loss_cm(&est, &est, &cfg).unwrap(), 0.0);

        let one = spec(array![[1.0]], array![[1.0]]);
        let zero = ComplexSpectrogram::<f64>::zeros(1, 1);
        assert_eq!(loss_ri(&one, &zero, &cfg).unwrap(), 2.0);
        let e = spec(array![[3.0]], array![[4.0]]);
        assert_eq!(loss_mag(&e, &zero, &cfg).unwrap(), 25.0);
    }

    #[test]
    fn composition_uses_lambda() {
        let r = LossReport::compose(10.0, 1.0, 2.0, &LossConfig::default());
        assert!((r.l_total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn mean_divides_by_points() {
        let est = array![[1.0, 2.0], [3.0, 4.0]];
        let l = loss_cm(&est, &Array2::zeros((2, 2)), &LossConfig::mean()).unwrap();
        assert_eq!(l, 7.5);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let cfg = LossConfig::default();
        let a = ComplexSpectrogram::<f64>::zeros(2, 3);
        let b = ComplexSpectrogram::<f64>::zeros(3, 2);
        assert!(loss_ri(&a, &b, &cfg).is_err());
        assert!(loss_mag(&a, &b, &cfg).is_err());
        assert!(loss_gradients(&a, &b, &cfg).is_err());
        assert!(loss_cm(&a.real, &b.real, &cfg).is_err());
    }

    #[test]
    fn ri_gradient_is_exact() {
        let est = spec(array![[1.5, -2.0]], array![[0.25, 3.0]]);
        let clean = spec(array![[0.5, 1.0]], array![[-1.0, 2.0]]);
        let g = loss_gradients(&est, &clean, &LossConfig::default()).unwrap();
        assert_eq!(g.ri.real, array![[2.0, -6.0]]);
        assert_eq!(g.ri.imag, array![[2.5, 2.0]]);
    }

    #[test]
    fn mag_gradient_finite_at_zero() {
        let est = ComplexSpectrogram::<f64>::zeros(1, 1);
        let clean = spec(array![[1.0]], array![[0.0]]);
        let g = loss_gradients(&est, &clean, &LossConfig::default()).unwrap();
        assert!(g.mag.is_finite());
    }
}
