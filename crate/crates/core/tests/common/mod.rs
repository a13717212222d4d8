//! Direct, loop-by-loop reference implementations used as test oracles.
#![allow(dead_code)]

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tscn_core::model::NetKind;
use tscn_core::{ComplexSpectrogram, ModelConfig, ParamStore, Tensor};

/// `[C][T][F]` array in f64.
#[derive(Clone, Debug, PartialEq)]
pub struct A3 {
    pub c: usize,
    pub t: usize,
    pub f: usize,
    pub d: Vec<f64>,
}

impl A3 {
    pub fn zeros(c: usize, t: usize, f: usize) -> Self {
        A3 { c, t, f, d: vec![0.0; c * t * f] }
    }

    pub fn at(&self, c: usize, t: usize, f: usize) -> f64 {
        self.d[(c * self.t + t) * self.f + f]
    }

    pub fn set(&mut self, c: usize, t: usize, f: usize, v: f64) {
        self.d[(c * self.t + t) * self.f + f] = v;
    }

    pub fn from_tensor<T: tscn_core::Real>(x: &Tensor<T>) -> Self {
        let s = x.shape();
        let (c, t, f) = match s.len() {
            2 => (s[0], s[1], 1),
            _ => (s[0], s[1], s[2]),
        };
        A3 { c, t, f, d: x.data().iter().map(|v| v.to_f64_lossy()).collect() }
    }

    pub fn concat_channels(&self, other: &A3) -> A3 {
        assert_eq!((self.t, self.f), (other.t, other.f));
        let mut d = self.d.clone();
        d.extend_from_slice(&other.d);
        A3 { c: self.c + other.c, t: self.t, f: self.f, d }
    }
}

pub fn w(store: &ParamStore<f64>, name: &str) -> (Vec<usize>, Vec<f64>) {
    let t = store.get(name).unwrap();
    (t.shape().to_vec(), t.data().to_vec())
}

/// `y[o,t,i] = b[o] + Σ w[o,c,j,k] · x[c, t - (KT-1-j)·d, i·s + k]`.
pub fn conv(x: &A3, wt: &(Vec<usize>, Vec<f64>), b: &[f64], stride: usize, dil: usize) -> A3 {
    let (s, wd) = wt;
    let (co, ci, kt, kf) = (s[0], s[1], s[2], s[3]);
    assert_eq!(ci, x.c);
    let fo = (x.f - kf) / stride + 1;
    let mut y = A3::zeros(co, x.t, fo);
    for o in 0..co {
        for t in 0..x.t {
            for i in 0..fo {
                let mut acc = b[o];
                for c in 0..ci {
                    for j in 0..kt {
                        let lag = (kt - 1 - j) * dil;
                        if lag > t {
                            continue;
                        }
                        for k in 0..kf {
                            acc += wd[((o * ci + c) * kt + j) * kf + k] * x.at(c, t - lag, i * stride + k);
                        }
                    }
                }
                y.set(o, t, i, acc);
            }
        }
    }
    y
}

/// Scatter-add transposed convolution along frequency, causal in time.
pub fn deconv(x: &A3, wt: &(Vec<usize>, Vec<f64>), b: &[f64], stride: usize, pad: usize) -> A3 {
    let (s, wd) = wt;
    let (ci, co, kt, kf) = (s[0], s[1], s[2], s[3]);
    assert_eq!(ci, x.c);
    let fo = (x.f - 1) * stride + kf + pad;
    let mut y = A3::zeros(co, x.t, fo);
    for o in 0..co {
        for t in 0..x.t {
            for i in 0..fo {
                y.set(o, t, i, b[o]);
            }
        }
    }
    for c in 0..ci {
        for o in 0..co {
            for t in 0..x.t {
                for j in 0..kt {
                    let lag = kt - 1 - j;
                    if lag > t {
                        continue;
                    }
                    for fi in 0..x.f {
                        for k in 0..kf {
                            let v = y.at(o, t, fi * stride + k)
                                + wd[((c * co + o) * kt + j) * kf + k] * x.at(c, t - lag, fi);
                            y.set(o, t, fi * stride + k, v);
                        }
                    }
                }
            }
        }
    }
    y
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn softplus(x: f64) -> f64 {
    (1.0 + x.exp()).ln()
}

/// Layer norm over (channel, frequency) of each frame, per-channel affine, then PReLU.
pub fn norm_act(x: &mut A3, store: &ParamStore<f64>, norm: &str, prelu: &str) {
    let gamma = store.get(&format!("{norm}.gamma")).unwrap().data().to_vec();
    let beta = store.get(&format!("{norm}.beta")).unwrap().data().to_vec();
    let slope = store.get(&format!("{prelu}.slope")).unwrap().data().to_vec();
    let n = (x.c * x.f) as f64;
    for t in 0..x.t {
        let mut mean = 0.0;
        for c in 0..x.c {
            for f in 0..x.f {
                mean += x.at(c, t, f);
            }
        }
        mean /= n;
        let mut var = 0.0;
        for c in 0..x.c {
            for f in 0..x.f {
                var += (x.at(c, t, f) - mean).powi(2);
            }
        }
        var /= n;
        for c in 0..x.c {
            for f in 0..x.f {
                let v = (x.at(c, t, f) - mean) / (var + 1e-5).sqrt() * gamma[c] + beta[c];
                x.set(c, t, f, if v < 0.0 { slope[c] * v } else { v });
            }
        }
    }
}

fn gate(a: &A3, b: &A3) -> A3 {
    let mut y = a.clone();
    for (v, g) in y.d.iter_mut().zip(&b.d) {
        *v *= sigmoid(*g);
    }
    y
}

pub fn gated_conv(x: &A3, store: &ParamStore<f64>, p: &str, stride: usize, dil: usize) -> A3 {
    let bias = |n: &str| store.get(n).unwrap().data().to_vec();
    let a = conv(x, &w(store, &format!("{p}.conv_a.weight")), &bias(&format!("{p}.conv_a.bias")), stride, dil);
    let b = conv(x, &w(store, &format!("{p}.conv_b.weight")), &bias(&format!("{p}.conv_b.bias")), stride, dil);
    let mut y = gate(&a, &b);
    norm_act(&mut y, store, &format!("{p}.norm"), &format!("{p}.prelu"));
    y
}

pub fn gated_deconv(x: &A3, store: &ParamStore<f64>, p: &str, stride: usize, pad: usize, with_norm: bool) -> A3 {
    let bias = |n: &str| store.get(n).unwrap().data().to_vec();
    let a = deconv(x, &w(store, &format!("{p}.deconv_a.weight")), &bias(&format!("{p}.deconv_a.bias")), stride, pad);
    let b = deconv(x, &w(store, &format!("{p}.deconv_b.weight")), &bias(&format!("{p}.deconv_b.bias")), stride, pad);
    let mut y = gate(&a, &b);
    if with_norm {
        norm_act(&mut y, store, &format!("{p}.norm"), &format!("{p}.prelu"));
    }
    y
}

/// Temporal unit on a `[C][T][1]` sequence; one branch per dilation.
pub fn temporal_unit(x: &A3, store: &ParamStore<f64>, p: &str, branches: &[(&str, usize)]) -> A3 {
    let bias = |n: &str| store.get(n).unwrap().data().to_vec();
    let mut h = conv(x, &w(store, &format!("{p}.input.weight")), &bias(&format!("{p}.input.bias")), 1, 1);
    norm_act(&mut h, store, &format!("{p}.in_norm"), &format!("{p}.in_prelu"));
    let mut cat: Option<A3> = None;
    for (name, d) in branches {
        let y = gated_conv(&h, store, &format!("{p}.{name}"), 1, *d);
        cat = Some(match cat {
            None => y,
            Some(c) => c.concat_channels(&y),
        });
    }
    let proj = conv(&cat.unwrap(), &w(store, &format!("{p}.output.weight")), &bias(&format!("{p}.output.bias")), 1, 1);
    let mut y = x.clone();
    for (v, p) in y.d.iter_mut().zip(&proj.d) {
        *v += p;
    }
    y
}

/// Whole network on a `[C_in][T][F]` input.
pub fn net(cfg: &ModelConfig, kind: NetKind, store: &ParamStore<f64>, x: &A3) -> A3 {
    let p = kind.prefix();
    let n = cfg.enc_blocks;
    let mut enc = Vec::new();
    let mut cur = x.clone();
    for i in 0..n {
        cur = gated_conv(&cur, store, &format!("{p}.enc{i}"), cfg.stride_f, 1);
        enc.push(cur.clone());
    }
    let (c, t, fb) = (cur.c, cur.t, cur.f);
    // flatten channel-major: sequence channel ch·fb + f
    let mut seq = A3::zeros(c * fb, t, 1);
    for ch in 0..c {
        for ti in 0..t {
            for f in 0..fb {
                seq.set(ch * fb + f, ti, 0, cur.at(ch, ti, f));
            }
        }
    }
    let m = cfg.tcm.exponent;
    for j in 0..cfg.groups(kind) * cfg.tcm.dilations.len() {
        let r = (j % cfg.tcm.dilations.len()) as u32;
        let name = format!("{p}.tcm{j}");
        seq = match kind {
            NetKind::Cme => temporal_unit(&seq, store, &name, &[("dconv", 1 << r)]),
            NetKind::Csr => temporal_unit(&seq, store, &name, &[("branch0", 1 << r), ("branch1", 1 << (m - r))]),
        };
    }
    let mut bottleneck = A3::zeros(c, t, fb);
    for ch in 0..c {
        for ti in 0..t {
            for f in 0..fb {
                bottleneck.set(ch, ti, f, seq.at(ch * fb + f, ti, 0));
            }
        }
    }
    let mut outs: Option<A3> = None;
    for (dname, _) in cfg.decoders(kind) {
        let mut y = bottleneck.clone();
        for k in 0..n {
            let input = y.concat_channels(&enc[n - 1 - k]);
            y = gated_deconv(&input, store, &format!("{p}.{dname}{k}"), cfg.stride_f, cfg.decoder_padding(k), k + 1 < n);
        }
        outs = Some(match outs {
            None => y,
            Some(o) => o.concat_channels(&y),
        });
    }
    let mut out = outs.unwrap();
    if kind == NetKind::Cme {
        out.d.iter_mut().for_each(|v| *v = softplus(*v));
    }
    out
}

pub struct RefOutput {
    pub est_mag: Vec<Vec<f64>>,
    pub refined: Vec<Vec<Complex<f64>>>,
}

/// Both stages on a `[T][F]` complex input.
pub fn tscn(cfg: &ModelConfig, store: &ParamStore<f64>, noisy: &ComplexSpectrogram<f64>) -> RefOutput {
    let (t, f) = noisy.dim();
    let mut mag = A3::zeros(1, t, f);
    for ti in 0..t {
        for k in 0..f {
            mag.set(0, ti, k, noisy.get(ti, k).norm());
        }
    }
    let est = net(cfg, NetKind::Cme, store, &mag);
    let mut csr_in = A3::zeros(4, t, f);
    let mut ccs = vec![vec![Complex::new(0.0, 0.0); f]; t];
    for ti in 0..t {
        for k in 0..f {
            let x = noisy.get(ti, k);
            let th = if x.re == 0.0 && x.im == 0.0 { 0.0 } else { x.im.atan2(x.re) };
            let m = est.at(0, ti, k);
            ccs[ti][k] = Complex::new(m * th.cos(), m * th.sin());
            csr_in.set(0, ti, k, ccs[ti][k].re);
            csr_in.set(1, ti, k, ccs[ti][k].im);
            csr_in.set(2, ti, k, x.re);
            csr_in.set(3, ti, k, x.im);
        }
    }
    let res = net(cfg, NetKind::Csr, store, &csr_in);
    RefOutput {
        est_mag: (0..t).map(|ti| (0..f).map(|k| est.at(0, ti, k)).collect()).collect(),
        refined: (0..t)
            .map(|ti| (0..f).map(|k| ccs[ti][k] + Complex::new(res.at(0, ti, k), res.at(1, ti, k))).collect())
            .collect(),
    }
}

/// Every parameter set to a random value, so that biases, norms and slopes are all exercised.
pub fn scramble(store: &mut ParamStore<f64>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (name, t) in store.iter_mut() {
        let (lo, hi) = if name.ends_with(".gamma") {
            (0.5, 1.5)
        } else if name.ends_with(".slope") {
            (0.0, 0.5)
        } else if name.ends_with(".bias") || name.ends_with(".beta") {
            (-0.2, 0.2)
        } else {
            let fan = t.shape()[1..].iter().product::<usize>().max(1) as f64;
            let b = (3.0 / fan).sqrt();
            (-b, b)
        };
        t.data_mut().iter_mut().for_each(|v| *v = rng.random_range(lo..hi));
    }
}

pub fn random_spectrogram(frames: usize, bins: usize, seed: u64) -> ComplexSpectrogram<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = ComplexSpectrogram::zeros(frames, bins);
    s.real.iter_mut().for_each(|v| *v = rng.random_range(-2.0..2.0));
    s.imag.iter_mut().for_each(|v| *v = rng.random_range(-2.0..2.0));
    s
}

pub fn random_a3(c: usize, t: usize, f: usize, rng: &mut ChaCha8Rng) -> A3 {
    A3 { c, t, f, d: (0..c * t * f).map(|_| rng.random_range(-1.0..1.0)).collect() }
}

pub fn to_tensor<T: tscn_core::Real>(x: &A3, rank2: bool) -> Tensor<T> {
    let shape = if rank2 { vec![x.c, x.t] } else { vec![x.c, x.t, x.f] };
    Tensor::new(shape, x.d.iter().map(|&v| T::from_f64_lossy(v)).collect()).unwrap()
}

pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}
