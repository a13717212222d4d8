use super::config::{ModelConfig, NetKind};
use crate::error::{Error, Result};
use crate::nn::{softplus, Dtcm, GatedBlock, GatedState, ParamStore, TcmLight, TemporalUnit, UnitState};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Softplus,
    Linear,
}

/// Gated encoder → flattened temporal modules → gated decoder(s) with skip
/// connections, run one frame at a time.
#[derive(Debug, Clone)]
pub struct Net<T> {
    kind: NetKind,
    n_bins: usize,
    in_channels: usize,
    channels: usize,
    bottleneck_freq: usize,
    encoder: Vec<GatedBlock<T>>,
    units: Vec<TemporalUnit<T>>,
    decoders: Vec<Vec<GatedBlock<T>>>,
    out_channels: Vec<usize>,
    activation: OutputActivation,
}

/// Per-stream buffers of a [`Net`].
#[derive(Debug, Clone)]
pub struct NetState<T> {
    enc: Vec<GatedState<T>>,
    enc_out: Vec<Vec<T>>,
    units: Vec<UnitState<T>>,
    seq: [Vec<T>; 2],
    bottleneck: Vec<T>,
    dec: Vec<Vec<GatedState<T>>>,
    dec_in: Vec<Vec<T>>,
    dec_out: Vec<Vec<T>>,
}

impl<T: Real> Net<T> {
    pub fn from_store(cfg: &ModelConfig, kind: NetKind, store: &ParamStore<T>) -> Result<Self> {
        cfg.validate()?;
        store.check(&cfg.param_specs(kind))?;
        let p = kind.prefix();
        let chain = cfg.freq_chain();
        let n = cfg.enc_blocks;
        let encoder = (0..n)
            .map(|i| GatedBlock::conv_from_store(store, &format!("{p}.enc{i}"), chain[i], cfg.stride_f, 1, true))
            .collect::<Result<Vec<_>>>()?;
        let spec = &cfg.tcm;
        let units = (0..cfg.groups(kind) * spec.units_per_group())
            .map(|j| {
                let name = format!("{p}.tcm{j}");
                let r = (j % spec.units_per_group()) as u32;
                Ok(match kind {
                    NetKind::Cme => TemporalUnit::Light(TcmLight::from_store(store, &name, 1 << r)?),
                    NetKind::Csr => TemporalUnit::Dual(Dtcm::from_store(store, &name, spec.dual_dilations(r))?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut decoders = Vec::new();
        let mut out_channels = Vec::new();
        for (dname, co) in cfg.decoders(kind) {
            let blocks = (0..n)
                .map(|k| {
                    GatedBlock::deconv_from_store(
                        store,
                        &format!("{p}.{dname}{k}"),
                        chain[n - k],
                        cfg.stride_f,
                        cfg.decoder_padding(k),
                        k + 1 < n,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            if blocks.last().map(GatedBlock::f_out) != Some(cfg.n_bins) {
                return Err(Error::shape(format!("decoder `{dname}` does not return to {} bins", cfg.n_bins)));
            }
            decoders.push(blocks);
            out_channels.push(co);
        }
        Ok(Net {
            kind,
            n_bins: cfg.n_bins,
            in_channels: cfg.in_channels(kind),
            channels: cfg.channels,
            bottleneck_freq: chain[n],
            encoder,
            units,
            decoders,
            out_channels,
            activation: match kind {
                NetKind::Cme => OutputActivation::Softplus,
                NetKind::Csr => OutputActivation::Linear,
            },
        })
    }

    pub fn kind(&self) -> NetKind {
        self.kind
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    /// Channels per output bin (decoder outputs side by side).
    pub fn out_channels(&self) -> usize {
        self.out_channels.iter().sum()
    }

    /// Width of the flattened sequence seen by the temporal modules.
    pub fn sequence_width(&self) -> usize {
        self.channels * self.bottleneck_freq
    }

    /// Frequency widths produced by the encoder blocks.
    pub fn encoder_widths(&self) -> Vec<usize> {
        self.encoder.iter().map(GatedBlock::f_out).collect()
    }

    /// Longest chain of past frames that can reach an output frame.
    pub fn left_context(&self) -> usize {
        let enc: usize = self.encoder.iter().map(GatedBlock::left_context).sum();
        let units: usize = self.units.iter().map(TemporalUnit::left_context).sum();
        let dec = self
            .decoders
            .iter()
            .map(|d| d.iter().map(GatedBlock::left_context).sum::<usize>())
            .max()
            .unwrap_or(0);
        enc + units + dec
    }

    pub fn state(&self) -> NetState<T> {
        let width = self.sequence_width();
        let c = self.channels;
        let first = &self.decoders[0];
        NetState {
            enc: self.encoder.iter().map(GatedBlock::state).collect(),
            enc_out: self.encoder.iter().map(|b| vec![T::zero(); b.f_out() * c]).collect(),
            units: self.units.iter().map(TemporalUnit::state).collect(),
            seq: [vec![T::zero(); width], vec![T::zero(); width]],
            bottleneck: vec![T::zero(); width],
            dec: self.decoders.iter().map(|d| d.iter().map(GatedBlock::state).collect()).collect(),
            // decoder block k consumes 2c channels at the width of encoder output n-1-k
            dec_in: (0..first.len())
                .map(|k| vec![T::zero(); self.encoder[first.len() - 1 - k].f_out() * 2 * c])
                .collect(),
            dec_out: (0..first.len())
                .map(|k| vec![T::zero(); first[k].f_out() * c.max(self.out_channels.iter().copied().max().unwrap_or(1))])
                .collect(),
        }
    }

    /// Runs one `[n_bins][in_channels]` frame, writing `[n_bins][out_channels]`.
    pub fn step(&self, s: &mut NetState<T>, frame: &[T], out: &mut [T]) {
        debug_assert_eq!(frame.len(), self.n_bins * self.in_channels);
        debug_assert_eq!(out.len(), self.n_bins * self.out_channels());
        let c = self.channels;

        for (i, block) in self.encoder.iter().enumerate() {
            let (done, rest) = s.enc_out.split_at_mut(i);
            let input: &[T] = if i == 0 { frame } else { &done[i - 1] };
            block.step(&mut s.enc[i], input, &mut rest[0]);
        }

        // [f][c] → channel-major sequence vector
        let fb = self.bottleneck_freq;
        let last = &s.enc_out[self.encoder.len() - 1];
        for f in 0..fb {
            for ch in 0..c {
                s.seq[0][ch * fb + f] = last[f * c + ch];
            }
        }
        let mut cur = 0;
        for (unit, us) in self.units.iter().zip(s.units.iter_mut()) {
            let [a, b] = &mut s.seq;
            let (src, dst) = if cur == 0 { (&*a, b) } else { (&*b, a) };
            unit.step(us, src, dst);
            cur ^= 1;
        }
        for f in 0..fb {
            for ch in 0..c {
                s.bottleneck[f * c + ch] = s.seq[cur][ch * fb + f];
            }
        }

        let total_out = self.out_channels();
        let mut col = 0;
        let n = self.encoder.len();
        for (d, blocks) in self.decoders.iter().enumerate() {
            for (k, block) in blocks.iter().enumerate() {
                let skip = &s.enc_out[n - 1 - k];
                let x: &[T] = if k == 0 { &s.bottleneck } else { &s.dec_out[k - 1] };
                let f_in = skip.len() / c;
                let din = &mut s.dec_in[k];
                for f in 0..f_in {
                    din[f * 2 * c..f * 2 * c + c].copy_from_slice(&x[f * c..(f + 1) * c]);
                    din[f * 2 * c + c..(f + 1) * 2 * c].copy_from_slice(&skip[f * c..(f + 1) * c]);
                }
                let width = block.f_out() * block.channels();
                let (_, tail) = s.dec_out.split_at_mut(k);
                block.step(&mut s.dec[d][k], &s.dec_in[k], &mut tail[0][..width]);
            }
            let oc = self.out_channels[d];
            let y = &s.dec_out[blocks.len() - 1];
            for f in 0..self.n_bins {
                for j in 0..oc {
                    let v = y[f * oc + j];
                    out[f * total_out + col + j] = match self.activation {
                        OutputActivation::Softplus => softplus(v),
                        OutputActivation::Linear => v,
                    };
                }
            }
            col += oc;
        }
    }
}
