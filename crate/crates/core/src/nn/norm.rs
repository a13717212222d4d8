use super::params::ParamStore;
use crate::error::Result;
use crate::real::Real;

/// Layer normalization over one whole frame (all frequency and channel values of a
/// single time step) with a per-channel affine. Statistics never cross time, so the
/// layer is causal.
#[derive(Debug, Clone)]
pub struct FrameNorm<T> {
    gamma: Vec<T>,
    beta: Vec<T>,
    eps: T,
}

impl<T: Real> FrameNorm<T> {
    pub const EPS: f64 = 1e-5;

    pub fn new(gamma: Vec<T>, beta: Vec<T>) -> Self {
        assert_eq!(gamma.len(), beta.len());
        FrameNorm {
            gamma,
            beta,
            eps: T::from_f64_lossy(Self::EPS),
        }
    }

    pub fn from_store(store: &ParamStore<T>, prefix: &str, channels: usize) -> Result<Self> {
        Ok(Self::new(
            store.expect(&format!("{prefix}.gamma"), &[channels])?.data().to_vec(),
            store.expect(&format!("{prefix}.beta"), &[channels])?.data().to_vec(),
        ))
    }

    /// Normalizes a `[freq][channel]` frame in place.
    pub fn apply(&self, frame: &mut [T]) {
        let c = self.gamma.len();
        debug_assert_eq!(frame.len() % c, 0);
        let n = T::from_usize(frame.len()).unwrap();
        let mean = frame.iter().copied().sum::<T>() / n;
        let var = frame.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
        let inv = T::one() / (var + self.eps).sqrt();
        for row in frame.chunks_exact_mut(c) {
            for ((v, &g), &b) in row.iter_mut().zip(&self.gamma).zip(&self.beta) {
                *v = (*v - mean) * inv * g + b;
            }
        }
    }
}

/// Per-channel parametric ReLU.
#[derive(Debug, Clone)]
pub struct Prelu<T> {
    slope: Vec<T>,
}

impl<T: Real> Prelu<T> {
    pub const INIT_SLOPE: f64 = 0.25;

    pub fn new(slope: Vec<T>) -> Self {
        Prelu { slope }
    }

    pub fn from_store(store: &ParamStore<T>, prefix: &str, channels: usize) -> Result<Self> {
        Ok(Self::new(store.expect(&format!("{prefix}.slope"), &[channels])?.data().to_vec()))
    }

    pub fn apply(&self, frame: &mut [T]) {
        for row in frame.chunks_exact_mut(self.slope.len()) {
            for (v, &a) in row.iter_mut().zip(&self.slope) {
                if *v < T::zero() {
                    *v = *v * a;
                }
            }
        }
    }
}
