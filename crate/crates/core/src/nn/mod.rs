//! Minimal layer toolkit for causal convolutional networks.
//!
//! Inside the layers, a time frame is a `[freq][channel]` buffer with channels
//! contiguous. The batch helpers (`conv2d_causal` and friends) take and return
//! channel-first `[C, T, F]` tensors.

mod conv;
mod history;
mod norm;
mod params;
mod tcm;
mod tensor;
mod weights;

pub use conv::{conv2d_causal, deconv2d_causal, gated_conv_block, CausalConv2d, CausalDeconv2d, ConvState, GatedBlock, GatedState};
pub use history::FrameHistory;
pub use norm::{FrameNorm, Prelu};
pub use params::{init_params, Init, ParamSpec, ParamStore};
pub use tcm::{dtcm, tcm_light, Dtcm, TcmGroupSpec, TcmLight, TemporalUnit, UnitState};
pub use tensor::Tensor;
pub use weights::{load_params, read_params, save_params, write_params, WEIGHT_MAGIC};

#[inline]
pub(crate) fn sigmoid<T: crate::Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// `ln(1 + e^x)`, stable for large `|x|`.
#[inline]
pub(crate) fn softplus<T: crate::Real>(x: T) -> T {
    if x > T::from_f64_lossy(20.0) {
        x
    } else {
        x.exp().ln_1p()
    }
}
