use super::conv::{CausalConv2d, ConvState, GatedBlock, GatedState};
use super::norm::{FrameNorm, Prelu};
use super::params::ParamStore;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::real::Real;

/// Layout of the stacked temporal modules: groups of `units_per_group` units whose
/// dilations run through `dilations`. A dual unit pairs dilation `2^r` with its
/// complement `2^(exponent - r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TcmGroupSpec {
    pub dilations: Vec<usize>,
    pub exponent: u32,
    pub inner: usize,
    pub outer: usize,
    pub kernel: usize,
}

impl Default for TcmGroupSpec {
    fn default() -> Self {
        TcmGroupSpec {
            dilations: vec![1, 2, 4, 8, 16, 32],
            exponent: 5,
            inner: 64,
            outer: 256,
            kernel: 3,
        }
    }
}

impl TcmGroupSpec {
    pub fn units_per_group(&self) -> usize {
        self.dilations.len()
    }

    /// Dilation pair of the `r`-th dual unit in a group.
    pub fn dual_dilations(&self, r: u32) -> (usize, usize) {
        (1 << r, 1 << (self.exponent - r))
    }
}

/// Compress → norm/act → gated dilated conv (single branch or two complementary
/// branches, concatenated) → expand, plus a residual connection.
#[derive(Debug, Clone)]
struct Bottleneck<T> {
    outer: usize,
    inner: usize,
    input: CausalConv2d<T>,
    in_norm: FrameNorm<T>,
    in_act: Prelu<T>,
    branches: Vec<GatedBlock<T>>,
    output: CausalConv2d<T>,
}

#[derive(Debug, Clone)]
pub struct UnitState<T> {
    input: ConvState<T>,
    branches: Vec<GatedState<T>>,
    output: ConvState<T>,
    hidden: Vec<T>,
    concat: Vec<T>,
    proj: Vec<T>,
}

impl<T: Real> Bottleneck<T> {
    fn from_store(store: &ParamStore<T>, prefix: &str, branch_prefixes: &[(String, usize)]) -> Result<Self> {
        let iw = store.get(&format!("{prefix}.input.weight"))?;
        if iw.shape().len() != 4 || iw.shape()[2..] != [1, 1] {
            return Err(Error::shape(format!("{prefix}.input.weight must be [inner, outer, 1, 1]")));
        }
        let (inner, outer) = (iw.shape()[0], iw.shape()[1]);
        let input = CausalConv2d::new(iw, store.get(&format!("{prefix}.input.bias"))?, 1, 1, 1)?;
        let in_norm = FrameNorm::from_store(store, &format!("{prefix}.in_norm"), inner)?;
        let in_act = Prelu::from_store(store, &format!("{prefix}.in_prelu"), inner)?;
        let branches = branch_prefixes
            .iter()
            .map(|(name, d)| GatedBlock::conv_from_store(store, &format!("{prefix}.{name}"), 1, 1, *d, true))
            .collect::<Result<Vec<_>>>()?;
        for b in &branches {
            if b.channels() != inner {
                return Err(Error::shape(format!("{prefix}: branch width {} != {inner}", b.channels())));
            }
        }
        let output = CausalConv2d::new(
            store.expect(&format!("{prefix}.output.weight"), &[outer, inner * branches.len(), 1, 1])?,
            store.get(&format!("{prefix}.output.bias"))?,
            1,
            1,
            1,
        )?;
        Ok(Bottleneck {
            outer,
            inner,
            input,
            in_norm,
            in_act,
            branches,
            output,
        })
    }

    fn left_context(&self) -> usize {
        self.branches.iter().map(GatedBlock::left_context).max().unwrap_or(0)
    }

    fn state(&self) -> UnitState<T> {
        UnitState {
            input: self.input.state(),
            branches: self.branches.iter().map(GatedBlock::state).collect(),
            output: self.output.state(),
            hidden: vec![T::zero(); self.inner],
            concat: vec![T::zero(); self.inner * self.branches.len()],
            proj: vec![T::zero(); self.outer],
        }
    }

    fn step(&self, s: &mut UnitState<T>, x: &[T], out: &mut [T]) {
        self.input.step(&mut s.input, x, &mut s.hidden);
        self.in_norm.apply(&mut s.hidden);
        self.in_act.apply(&mut s.hidden);
        for ((b, bs), dst) in self
            .branches
            .iter()
            .zip(s.branches.iter_mut())
            .zip(s.concat.chunks_exact_mut(self.inner))
        {
            b.step(bs, &s.hidden, dst);
        }
        self.output.step(&mut s.output, &s.concat, &mut s.proj);
        for ((o, &xi), &p) in out.iter_mut().zip(x).zip(&s.proj) {
            *o = xi + p;
        }
    }
}

/// Light-weight temporal module: one gated dilated branch.
///
/// Parameters under `prefix`: `input`, `in_norm`, `in_prelu`, `dconv.{conv_a, conv_b,
/// norm, prelu}`, `output`.
#[derive(Debug, Clone)]
pub struct TcmLight<T>(Bottleneck<T>);

impl<T: Real> TcmLight<T> {
    pub fn from_store(store: &ParamStore<T>, prefix: &str, dilation: usize) -> Result<Self> {
        Ok(TcmLight(Bottleneck::from_store(store, prefix, &[("dconv".into(), dilation)])?))
    }
}

/// Dual temporal module: two gated dilated branches with complementary dilations,
/// concatenated before the output projection.
///
/// Parameters under `prefix`: `input`, `in_norm`, `in_prelu`, `branch0.*`, `branch1.*`,
/// `output`.
#[derive(Debug, Clone)]
pub struct Dtcm<T>(Bottleneck<T>);

impl<T: Real> Dtcm<T> {
    pub fn from_store(store: &ParamStore<T>, prefix: &str, dilations: (usize, usize)) -> Result<Self> {
        Ok(Dtcm(Bottleneck::from_store(
            store,
            prefix,
            &[("branch0".into(), dilations.0), ("branch1".into(), dilations.1)],
        )?))
    }
}

#[derive(Debug, Clone)]
pub enum TemporalUnit<T> {
    Light(TcmLight<T>),
    Dual(Dtcm<T>),
}

impl<T: Real> TemporalUnit<T> {
    fn inner(&self) -> &Bottleneck<T> {
        match self {
            TemporalUnit::Light(u) => &u.0,
            TemporalUnit::Dual(u) => &u.0,
        }
    }

    pub fn width(&self) -> usize {
        self.inner().outer
    }

    /// Past frames that reach an output frame: `(kernel - 1) · max dilation`.
    pub fn left_context(&self) -> usize {
        self.inner().left_context()
    }

    pub fn state(&self) -> UnitState<T> {
        self.inner().state()
    }

    pub fn step(&self, state: &mut UnitState<T>, x: &[T], out: &mut [T]) {
        self.inner().step(state, x, out)
    }
}

fn run_sequence<T: Real>(unit: &TemporalUnit<T>, x: &Tensor<T>) -> Result<Tensor<T>> {
    let (c, t) = match *x.shape() {
        [c, t] => (c, t),
        ref s => return Err(Error::shape(format!("expected a [C, T] tensor, got {s:?}"))),
    };
    if c != unit.width() {
        return Err(Error::shape(format!("input has {c} channels, unit expects {}", unit.width())));
    }
    let mut state = unit.state();
    let mut y = Tensor::zeros(&[c, t]);
    let mut xin = vec![T::zero(); c];
    let mut yout = vec![T::zero(); c];
    for ti in 0..t {
        for ci in 0..c {
            xin[ci] = x.data()[ci * t + ti];
        }
        unit.step(&mut state, &xin, &mut yout);
        for ci in 0..c {
            y.data_mut()[ci * t + ti] = yout[ci];
        }
    }
    Ok(y)
}

/// Batch light temporal module over a `[C, T]` sequence.
pub fn tcm_light<T: Real>(x: &Tensor<T>, store: &ParamStore<T>, prefix: &str, dilation: usize) -> Result<Tensor<T>> {
    run_sequence(&TemporalUnit::Light(TcmLight::from_store(store, prefix, dilation)?), x)
}

/// Batch dual temporal module with branch dilations `2^r` and `2^(5 - r)`.
pub fn dtcm<T: Real>(x: &Tensor<T>, store: &ParamStore<T>, prefix: &str, r: u32) -> Result<Tensor<T>> {
    let spec = TcmGroupSpec::default();
    if r > spec.exponent {
        return Err(Error::InvalidArgument(format!("dilation exponent {r} exceeds {}", spec.exponent)));
    }
    run_sequence(&TemporalUnit::Dual(Dtcm::from_store(store, prefix, spec.dual_dilations(r))?), x)
}
