use super::history::FrameHistory;
use super::norm::{FrameNorm, Prelu};
use super::params::ParamStore;
use super::sigmoid;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::real::Real;

/// Per-stream state of a convolution: past input frames plus GEMM scratch.
#[derive(Debug, Clone)]
pub struct ConvState<T> {
    hist: FrameHistory<T>,
    patch: Vec<T>,
    scratch: Vec<T>,
}

impl<T: Real> ConvState<T> {
    pub fn reset(&mut self) {
        self.hist.reset();
    }
}

fn kernel_dims<T: Real>(w: &Tensor<T>, b: &Tensor<T>, what: &str) -> Result<[usize; 4]> {
    let s = w.shape();
    if s.len() != 4 {
        return Err(Error::shape(format!("{what} kernel must be rank 4, got {s:?}")));
    }
    if b.shape().len() != 1 {
        return Err(Error::shape(format!("{what} bias must be rank 1, got {:?}", b.shape())));
    }
    Ok([s[0], s[1], s[2], s[3]])
}

/// Convolution that is causal in time and valid (unpadded) in frequency.
///
/// Kernel layout is `[c_out, c_in, k_t, k_f]`; time tap `k_t - 1` multiplies the
/// current frame and tap `j` multiplies the frame `(k_t - 1 - j)·dilation` steps back.
/// Several kernels with the same geometry can be packed so that their outputs come
/// out side by side in one product.
#[derive(Debug, Clone)]
pub struct CausalConv2d<T> {
    c_in: usize,
    c_out: usize,
    k_t: usize,
    k_f: usize,
    stride_f: usize,
    dilation_t: usize,
    f_in: usize,
    f_out: usize,
    /// `[(k_t, k_f, c_in)][c_out]`
    weight: Vec<T>,
    bias: Vec<T>,
}

impl<T: Real> CausalConv2d<T> {
    pub fn new(w: &Tensor<T>, b: &Tensor<T>, f_in: usize, stride_f: usize, dilation_t: usize) -> Result<Self> {
        Self::packed(&[(w, b)], f_in, stride_f, dilation_t)
    }

    pub fn packed(parts: &[(&Tensor<T>, &Tensor<T>)], f_in: usize, stride_f: usize, dilation_t: usize) -> Result<Self> {
        let [_, c_in, k_t, k_f] = kernel_dims(parts[0].0, parts[0].1, "conv")?;
        if stride_f == 0 || dilation_t == 0 || k_t == 0 || k_f == 0 {
            return Err(Error::InvalidArgument("stride, dilation and kernel must be positive".into()));
        }
        if f_in < k_f {
            return Err(Error::shape(format!("{f_in} frequency bins cannot fit a kernel of width {k_f}")));
        }
        let mut c_out = 0;
        for (w, b) in parts {
            let [co, ci, kt, kf] = kernel_dims(w, b, "conv")?;
            if (ci, kt, kf) != (c_in, k_t, k_f) || b.len() != co {
                return Err(Error::shape(format!(
                    "packed kernels disagree: {:?} / bias {:?} vs [_, {c_in}, {k_t}, {k_f}]",
                    w.shape(),
                    b.shape()
                )));
            }
            c_out += co;
        }
        let rows = k_t * k_f * c_in;
        let mut weight = vec![T::zero(); rows * c_out];
        let mut bias = Vec::with_capacity(c_out);
        let mut col0 = 0;
        for (w, b) in parts {
            let co_n = w.shape()[0];
            let wd = w.data();
            for co in 0..co_n {
                for ci in 0..c_in {
                    for kt in 0..k_t {
                        for kf in 0..k_f {
                            let row = (kt * k_f + kf) * c_in + ci;
                            weight[row * c_out + col0 + co] = wd[((co * c_in + ci) * k_t + kt) * k_f + kf];
                        }
                    }
                }
            }
            bias.extend_from_slice(b.data());
            col0 += co_n;
        }
        Ok(CausalConv2d {
            c_in,
            c_out,
            k_t,
            k_f,
            stride_f,
            dilation_t,
            f_in,
            f_out: (f_in - k_f) / stride_f + 1,
            weight,
            bias,
        })
    }

    pub fn c_in(&self) -> usize {
        self.c_in
    }

    pub fn c_out(&self) -> usize {
        self.c_out
    }

    pub fn f_in(&self) -> usize {
        self.f_in
    }

    pub fn f_out(&self) -> usize {
        self.f_out
    }

    /// Past frames (beyond the current one) that influence an output frame.
    pub fn left_context(&self) -> usize {
        (self.k_t - 1) * self.dilation_t
    }

    pub fn state(&self) -> ConvState<T> {
        ConvState {
            hist: FrameHistory::new(self.left_context() + 1, self.f_in * self.c_in),
            patch: vec![T::zero(); self.f_out * self.k_t * self.k_f * self.c_in],
            scratch: Vec::new(),
        }
    }

    /// Consumes one `[f_in][c_in]` frame and writes one `[f_out][c_out]` frame.
    pub fn step(&self, state: &mut ConvState<T>, frame: &[T], out: &mut [T]) {
        debug_assert_eq!(frame.len(), self.f_in * self.c_in);
        debug_assert_eq!(out.len(), self.f_out * self.c_out);
        state.hist.push(frame);
        let ci = self.c_in;
        let k = self.k_t * self.k_f * ci;
        for fo in 0..self.f_out {
            let row = &mut state.patch[fo * k..(fo + 1) * k];
            for kt in 0..self.k_t {
                let src = state.hist.get((self.k_t - 1 - kt) * self.dilation_t);
                for kf in 0..self.k_f {
                    let fi = fo * self.stride_f + kf;
                    let dst = (kt * self.k_f + kf) * ci;
                    row[dst..dst + ci].copy_from_slice(&src[fi * ci..(fi + 1) * ci]);
                }
            }
        }
        for o in out.chunks_exact_mut(self.c_out) {
            o.copy_from_slice(&self.bias);
        }
        T::gemm(self.f_out, k, self.c_out, &state.patch, &self.weight, T::one(), out);
    }
}

/// Transposed convolution along frequency, causal along time (no dilation).
///
/// Kernel layout is `[c_in, c_out, k_t, k_f]`. Output width is
/// `(f_in - 1)·stride + k_f + output_padding`; padded columns receive only the bias.
#[derive(Debug, Clone)]
pub struct CausalDeconv2d<T> {
    c_in: usize,
    c_out: usize,
    k_t: usize,
    k_f: usize,
    stride_f: usize,
    f_in: usize,
    f_out: usize,
    /// `[(k_t, c_in)][(k_f, c_out)]`
    weight: Vec<T>,
    bias: Vec<T>,
}

impl<T: Real> CausalDeconv2d<T> {
    pub fn new(w: &Tensor<T>, b: &Tensor<T>, f_in: usize, stride_f: usize, output_padding: usize) -> Result<Self> {
        Self::packed(&[(w, b)], f_in, stride_f, output_padding)
    }

    pub fn packed(
        parts: &[(&Tensor<T>, &Tensor<T>)],
        f_in: usize,
        stride_f: usize,
        output_padding: usize,
    ) -> Result<Self> {
        let [c_in, _, k_t, k_f] = kernel_dims(parts[0].0, parts[0].1, "deconv")?;
        if stride_f == 0 || k_t == 0 || k_f == 0 || f_in == 0 {
            return Err(Error::InvalidArgument("stride, kernel and input width must be positive".into()));
        }
        if output_padding >= stride_f.max(1) && output_padding > 0 {
            return Err(Error::InvalidArgument(format!(
                "output padding {output_padding} must be below the stride {stride_f}"
            )));
        }
        let mut c_out = 0;
        for (w, b) in parts {
            let [ci, co, kt, kf] = kernel_dims(w, b, "deconv")?;
            if (ci, kt, kf) != (c_in, k_t, k_f) || b.len() != co {
                return Err(Error::shape(format!(
                    "packed kernels disagree: {:?} / bias {:?} vs [{c_in}, _, {k_t}, {k_f}]",
                    w.shape(),
                    b.shape()
                )));
            }
            c_out += co;
        }
        let n = k_f * c_out;
        let mut weight = vec![T::zero(); k_t * c_in * n];
        let mut bias = Vec::with_capacity(c_out);
        let mut col0 = 0;
        for (w, b) in parts {
            let co_n = w.shape()[1];
            let wd = w.data();
            for ci in 0..c_in {
                for co in 0..co_n {
                    for kt in 0..k_t {
                        for kf in 0..k_f {
                            let row = kt * c_in + ci;
                            weight[row * n + kf * c_out + col0 + co] = wd[((ci * co_n + co) * k_t + kt) * k_f + kf];
                        }
                    }
                }
            }
            bias.extend_from_slice(b.data());
            col0 += co_n;
        }
        Ok(CausalDeconv2d {
            c_in,
            c_out,
            k_t,
            k_f,
            stride_f,
            f_in,
            f_out: (f_in - 1) * stride_f + k_f + output_padding,
            weight,
            bias,
        })
    }

    pub fn c_in(&self) -> usize {
        self.c_in
    }

    pub fn c_out(&self) -> usize {
        self.c_out
    }

    pub fn f_out(&self) -> usize {
        self.f_out
    }

    pub fn left_context(&self) -> usize {
        self.k_t - 1
    }

    pub fn state(&self) -> ConvState<T> {
        ConvState {
            hist: FrameHistory::new(self.k_t, self.f_in * self.c_in),
            patch: vec![T::zero(); self.f_in * self.k_t * self.c_in],
            scratch: vec![T::zero(); self.f_in * self.k_f * self.c_out],
        }
    }

    pub fn step(&self, state: &mut ConvState<T>, frame: &[T], out: &mut [T]) {
        debug_assert_eq!(frame.len(), self.f_in * self.c_in);
        debug_assert_eq!(out.len(), self.f_out * self.c_out);
        state.hist.push(frame);
        let ci = self.c_in;
        let k = self.k_t * ci;
        for fi in 0..self.f_in {
            for kt in 0..self.k_t {
                let src = state.hist.get(self.k_t - 1 - kt);
                let dst = fi * k + kt * ci;
                state.patch[dst..dst + ci].copy_from_slice(&src[fi * ci..(fi + 1) * ci]);
            }
        }
        let n = self.k_f * self.c_out;
        T::gemm(self.f_in, k, n, &state.patch, &self.weight, T::zero(), &mut state.scratch);
        for o in out.chunks_exact_mut(self.c_out) {
            o.copy_from_slice(&self.bias);
        }
        for fi in 0..self.f_in {
            for kf in 0..self.k_f {
                let fo = fi * self.stride_f + kf;
                let src = &state.scratch[fi * n + kf * self.c_out..fi * n + (kf + 1) * self.c_out];
                for (o, &v) in out[fo * self.c_out..(fo + 1) * self.c_out].iter_mut().zip(src) {
                    *o = *o + v;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum GatedKernel<T> {
    Conv(CausalConv2d<T>),
    Deconv(CausalDeconv2d<T>),
}

/// `norm_act(a(x) ⊙ σ(b(x)))` where `a` and `b` share geometry. The norm and
/// activation are absent on output layers.
#[derive(Debug, Clone)]
pub struct GatedBlock<T> {
    kernel: GatedKernel<T>,
    channels: usize,
    norm: Option<FrameNorm<T>>,
    act: Option<Prelu<T>>,
}

impl<T: Real> GatedBlock<T> {
    /// Encoder-style block read from `{prefix}.conv_a`, `{prefix}.conv_b`,
    /// `{prefix}.norm` and `{prefix}.prelu`.
    pub fn conv_from_store(
        store: &ParamStore<T>,
        prefix: &str,
        f_in: usize,
        stride_f: usize,
        dilation_t: usize,
        with_norm_act: bool,
    ) -> Result<Self> {
        let (wa, ba, wb, bb) = gate_tensors(store, prefix, "conv")?;
        let conv = CausalConv2d::packed(&[(wa, ba), (wb, bb)], f_in, stride_f, dilation_t)?;
        let channels = wa.shape()[0];
        Self::assemble(store, prefix, GatedKernel::Conv(conv), channels, with_norm_act)
    }

    /// Decoder-style block read from `{prefix}.deconv_a` / `{prefix}.deconv_b`.
    pub fn deconv_from_store(
        store: &ParamStore<T>,
        prefix: &str,
        f_in: usize,
        stride_f: usize,
        output_padding: usize,
        with_norm_act: bool,
    ) -> Result<Self> {
        let (wa, ba, wb, bb) = gate_tensors(store, prefix, "deconv")?;
        let deconv = CausalDeconv2d::packed(&[(wa, ba), (wb, bb)], f_in, stride_f, output_padding)?;
        let channels = wa.shape()[1];
        Self::assemble(store, prefix, GatedKernel::Deconv(deconv), channels, with_norm_act)
    }

    fn assemble(
        store: &ParamStore<T>,
        prefix: &str,
        kernel: GatedKernel<T>,
        channels: usize,
        with_norm_act: bool,
    ) -> Result<Self> {
        let (norm, act) = if with_norm_act {
            (
                Some(FrameNorm::from_store(store, &format!("{prefix}.norm"), channels)?),
                Some(Prelu::from_store(store, &format!("{prefix}.prelu"), channels)?),
            )
        } else {
            (None, None)
        };
        Ok(GatedBlock {
            kernel,
            channels,
            norm,
            act,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn f_out(&self) -> usize {
        match &self.kernel {
            GatedKernel::Conv(c) => c.f_out(),
            GatedKernel::Deconv(d) => d.f_out(),
        }
    }

    pub fn left_context(&self) -> usize {
        match &self.kernel {
            GatedKernel::Conv(c) => c.left_context(),
            GatedKernel::Deconv(d) => d.left_context(),
        }
    }

    pub fn state(&self) -> GatedState<T> {
        let conv = match &self.kernel {
            GatedKernel::Conv(c) => c.state(),
            GatedKernel::Deconv(d) => d.state(),
        };
        GatedState {
            conv,
            packed: vec![T::zero(); self.f_out() * 2 * self.channels],
        }
    }

    /// One frame in, one `[f_out][channels]` frame out.
    pub fn step(&self, state: &mut GatedState<T>, frame: &[T], out: &mut [T]) {
        match &self.kernel {
            GatedKernel::Conv(c) => c.step(&mut state.conv, frame, &mut state.packed),
            GatedKernel::Deconv(d) => d.step(&mut state.conv, frame, &mut state.packed),
        }
        gate(&state.packed, self.channels, out);
        if let Some(norm) = &self.norm {
            norm.apply(out);
        }
        if let Some(act) = &self.act {
            act.apply(out);
        }
    }
}

#[derive(Debug, Clone)]
pub struct GatedState<T> {
    conv: ConvState<T>,
    packed: Vec<T>,
}

fn gate_tensors<'a, T: Real>(
    store: &'a ParamStore<T>,
    prefix: &str,
    kind: &str,
) -> Result<(&'a Tensor<T>, &'a Tensor<T>, &'a Tensor<T>, &'a Tensor<T>)> {
    let wa = store.get(&format!("{prefix}.{kind}_a.weight"))?;
    let ba = store.get(&format!("{prefix}.{kind}_a.bias"))?;
    let wb = store.expect(&format!("{prefix}.{kind}_b.weight"), wa.shape())?;
    let bb = store.expect(&format!("{prefix}.{kind}_b.bias"), ba.shape())?;
    Ok((wa, ba, wb, bb))
}

/// Splits a packed `[f][2c]` buffer (main half first) into `main ⊙ σ(gate)`.
pub(crate) fn gate<T: Real>(packed: &[T], c: usize, out: &mut [T]) {
    for (row, o) in packed.chunks_exact(2 * c).zip(out.chunks_exact_mut(c)) {
        let (main, g) = row.split_at(c);
        for ((o, &m), &g) in o.iter_mut().zip(main).zip(g) {
            *o = m * sigmoid(g);
        }
    }
}

/// Copies frame `t` of a `[C, T, F]` tensor into `[F][C]` layout.
pub(crate) fn gather_frame<T: Real>(x: &Tensor<T>, t: usize, out: &mut [T]) {
    let (c, tt, f) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let d = x.data();
    for ci in 0..c {
        for fi in 0..f {
            out[fi * c + ci] = d[(ci * tt + t) * f + fi];
        }
    }
}

/// Inverse of [`gather_frame`].
pub(crate) fn scatter_frame<T: Real>(frame: &[T], t: usize, y: &mut Tensor<T>) {
    let (c, tt, f) = (y.shape()[0], y.shape()[1], y.shape()[2]);
    let d = y.data_mut();
    for ci in 0..c {
        for fi in 0..f {
            d[(ci * tt + t) * f + fi] = frame[fi * c + ci];
        }
    }
}

fn rank3<T: Real>(x: &Tensor<T>) -> Result<(usize, usize, usize)> {
    match *x.shape() {
        [c, t, f] => Ok((c, t, f)),
        ref s => Err(Error::shape(format!("expected a [C, T, F] tensor, got {s:?}"))),
    }
}

/// Batch causal convolution of a `[C_in, T, F]` tensor.
pub fn conv2d_causal<T: Real>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    b: &Tensor<T>,
    stride_f: usize,
    dilation_t: usize,
) -> Result<Tensor<T>> {
    let (c, t, f) = rank3(x)?;
    if w.shape().len() != 4 || w.shape()[1] != c {
        return Err(Error::shape(format!("input has {c} channels, kernel is {:?}", w.shape())));
    }
    let conv = CausalConv2d::new(w, b, f, stride_f, dilation_t)?;
    let mut y = Tensor::zeros(&[conv.c_out(), t, conv.f_out()]);
    let mut state = conv.state();
    let mut xin = vec![T::zero(); f * c];
    let mut yout = vec![T::zero(); conv.f_out() * conv.c_out()];
    for ti in 0..t {
        gather_frame(x, ti, &mut xin);
        conv.step(&mut state, &xin, &mut yout);
        scatter_frame(&yout, ti, &mut y);
    }
    Ok(y)
}

/// Batch causal transposed convolution of a `[C_in, T, F]` tensor.
pub fn deconv2d_causal<T: Real>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    b: &Tensor<T>,
    stride_f: usize,
    output_padding: usize,
) -> Result<Tensor<T>> {
    let (c, t, f) = rank3(x)?;
    if w.shape().len() != 4 || w.shape()[0] != c {
        return Err(Error::shape(format!("input has {c} channels, kernel is {:?}", w.shape())));
    }
    let deconv = CausalDeconv2d::new(w, b, f, stride_f, output_padding)?;
    let mut y = Tensor::zeros(&[deconv.c_out(), t, deconv.f_out()]);
    let mut state = deconv.state();
    let mut xin = vec![T::zero(); f * c];
    let mut yout = vec![T::zero(); deconv.f_out() * deconv.c_out()];
    for ti in 0..t {
        gather_frame(x, ti, &mut xin);
        deconv.step(&mut state, &xin, &mut yout);
        scatter_frame(&yout, ti, &mut y);
    }
    Ok(y)
}

/// Batch gated convolution block (`{prefix}.conv_a`, `conv_b`, `norm`, `prelu`).
pub fn gated_conv_block<T: Real>(x: &Tensor<T>, store: &ParamStore<T>, prefix: &str, stride_f: usize) -> Result<Tensor<T>> {
    let (c, t, f) = rank3(x)?;
    let block = GatedBlock::conv_from_store(store, prefix, f, stride_f, 1, true)?;
    let expected_in = store.get(&format!("{prefix}.conv_a.weight"))?.shape()[1];
    if expected_in != c {
        return Err(Error::shape(format!("input has {c} channels, block expects {expected_in}")));
    }
    let mut y = Tensor::zeros(&[block.channels(), t, block.f_out()]);
    let mut state = block.state();
    let mut xin = vec![T::zero(); f * c];
    let mut yout = vec![T::zero(); block.f_out() * block.channels()];
    for ti in 0..t {
        gather_frame(x, ti, &mut xin);
        block.step(&mut state, &xin, &mut yout);
        scatter_frame(&yout, ti, &mut y);
    }
    Ok(y)
}
