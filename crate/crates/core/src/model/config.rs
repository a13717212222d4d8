use crate::error::{Error, Result};
use crate::nn::{Init, ParamSpec, Prelu, TcmGroupSpec};

/// Which of the two sub-networks a parameter set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetKind {
    /// Coarse magnitude estimator: 1 input channel (|X|), softplus magnitude output,
    /// light temporal modules.
    Cme,
    /// Complex refinement: 4 input channels `(S̃cm_r, S̃cm_i, X_r, X_i)`, linear RI
    /// residual output, dual temporal modules.
    Csr,
}

impl NetKind {
    pub fn prefix(self) -> &'static str {
        match self {
            NetKind::Cme => "cme",
            NetKind::Csr => "csr",
        }
    }
}

/// Network geometry shared by both stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub n_bins: usize,
    pub enc_blocks: usize,
    pub channels: usize,
    /// (time, frequency)
    pub kernel: (usize, usize),
    pub stride_f: usize,
    pub tcm: TcmGroupSpec,
    pub cme_groups: usize,
    pub csr_groups: usize,
    /// 1: a single decoder emits both RI channels; 2: separate real/imaginary decoders.
    pub csr_decoders: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            n_bins: 161,
            enc_blocks: 5,
            channels: 64,
            kernel: (2, 3),
            stride_f: 2,
            tcm: TcmGroupSpec::default(),
            cme_groups: 3,
            csr_groups: 2,
            csr_decoders: 2,
        }
    }
}

impl ModelConfig {
    /// Tiny geometry for oracle comparisons and the finite-difference training
    /// harness: 9 bins, 2 blocks of 4 channels, one group of two units.
    pub fn micro() -> Self {
        ModelConfig {
            n_bins: 9,
            enc_blocks: 2,
            channels: 4,
            kernel: (2, 3),
            stride_f: 2,
            tcm: TcmGroupSpec {
                dilations: vec![1, 2],
                exponent: 1,
                inner: 2,
                outer: 4,
                kernel: 3,
            },
            cme_groups: 1,
            csr_groups: 1,
            csr_decoders: 2,
        }
    }

    /// Frequency widths from the input through every encoder block.
    pub fn freq_chain(&self) -> Vec<usize> {
        let mut chain = vec![self.n_bins];
        let mut f = self.n_bins;
        for _ in 0..self.enc_blocks {
            f = if f >= self.kernel.1 {
                (f - self.kernel.1) / self.stride_f + 1
            } else {
                0
            };
            chain.push(f);
        }
        chain
    }

    /// Width of the flattened encoder output fed to the temporal modules.
    pub fn tcm_width(&self) -> usize {
        self.channels * self.freq_chain().last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let chain = self.freq_chain();
        if self.enc_blocks == 0 || chain.iter().any(|&f| f == 0) {
            return Err(Error::Config(format!("encoder collapses the frequency axis: {chain:?}")));
        }
        if self.tcm.outer != self.tcm_width() {
            return Err(Error::Config(format!(
                "temporal module width {} does not match flattened encoder output {}",
                self.tcm.outer,
                self.tcm_width()
            )));
        }
        if self.tcm.dilations.iter().enumerate().any(|(r, &d)| d != 1 << r)
            || self.tcm.dilations.len() != self.tcm.exponent as usize + 1
        {
            return Err(Error::Config(format!(
                "dilations {:?} must be 2^r for r = 0..={}",
                self.tcm.dilations, self.tcm.exponent
            )));
        }
        if !(1..=2).contains(&self.csr_decoders) {
            return Err(Error::Config("csr_decoders must be 1 or 2".into()));
        }
        Ok(())
    }

    pub fn in_channels(&self, kind: NetKind) -> usize {
        match kind {
            NetKind::Cme => 1,
            NetKind::Csr => 4,
        }
    }

    pub fn groups(&self, kind: NetKind) -> usize {
        match kind {
            NetKind::Cme => self.cme_groups,
            NetKind::Csr => self.csr_groups,
        }
    }

    /// Decoder names and their output channel counts.
    pub fn decoders(&self, kind: NetKind) -> Vec<(&'static str, usize)> {
        match (kind, self.csr_decoders) {
            (NetKind::Cme, _) => vec![("dec", 1)],
            (NetKind::Csr, 1) => vec![("dec", 2)],
            (NetKind::Csr, _) => vec![("dec_re", 1), ("dec_im", 1)],
        }
    }

    /// Output-padding needed by decoder block `k` to land on the matching encoder width.
    pub fn decoder_padding(&self, k: usize) -> usize {
        let chain = self.freq_chain();
        let n = self.enc_blocks;
        let f_in = chain[n - k];
        let target = chain[n - 1 - k];
        target - ((f_in - 1) * self.stride_f + self.kernel.1)
    }

    pub fn param_specs(&self, kind: NetKind) -> Vec<ParamSpec> {
        let p = kind.prefix();
        let (kt, kf) = self.kernel;
        let c = self.channels;
        let mut specs = Vec::new();
        for i in 0..self.enc_blocks {
            let c_in = if i == 0 { self.in_channels(kind) } else { c };
            let name = format!("{p}.enc{i}");
            gated(&mut specs, &format!("{name}.conv"), [c, c_in, kt, kf], c, c_in * kt * kf, c * kt * kf);
            norm_act(&mut specs, &name, c);
        }
        let t = &self.tcm;
        let n_units = self.groups(kind) * t.units_per_group();
        for j in 0..n_units {
            let name = format!("{p}.tcm{j}");
            conv(&mut specs, &format!("{name}.input"), vec![t.inner, t.outer, 1, 1], t.inner, t.outer, t.inner);
            specs.push(constant(format!("{name}.in_norm.gamma"), t.inner, 1.0));
            specs.push(constant(format!("{name}.in_norm.beta"), t.inner, 0.0));
            specs.push(constant(format!("{name}.in_prelu.slope"), t.inner, Prelu::<f32>::INIT_SLOPE));
            let branches: &[&str] = match kind {
                NetKind::Cme => &["dconv"],
                NetKind::Csr => &["branch0", "branch1"],
            };
            for b in branches {
                let bn = format!("{name}.{b}");
                gated(
                    &mut specs,
                    &format!("{bn}.conv"),
                    [t.inner, t.inner, t.kernel, 1],
                    t.inner,
                    t.inner * t.kernel,
                    t.inner * t.kernel,
                );
                norm_act(&mut specs, &bn, t.inner);
            }
            let cat = t.inner * branches.len();
            conv(&mut specs, &format!("{name}.output"), vec![t.outer, cat, 1, 1], t.outer, cat, t.outer);
        }
        for (dname, out_ch) in self.decoders(kind) {
            for k in 0..self.enc_blocks {
                let last = k + 1 == self.enc_blocks;
                let co = if last { out_ch } else { c };
                let name = format!("{p}.{dname}{k}");
                gated(&mut specs, &format!("{name}.deconv"), [2 * c, co, kt, kf], co, 2 * c * kt * kf, co * kt * kf);
                if !last {
                    norm_act(&mut specs, &name, co);
                }
            }
        }
        specs
    }

    /// Specs of both stages, CME first.
    pub fn all_param_specs(&self) -> Vec<ParamSpec> {
        let mut s = self.param_specs(NetKind::Cme);
        s.extend(self.param_specs(NetKind::Csr));
        s
    }
}

fn constant(name: String, n: usize, v: f64) -> ParamSpec {
    ParamSpec {
        name,
        shape: vec![n],
        init: Init::Const(v),
    }
}

fn conv(specs: &mut Vec<ParamSpec>, name: &str, shape: Vec<usize>, bias: usize, fan_in: usize, fan_out: usize) {
    specs.push(ParamSpec {
        name: format!("{name}.weight"),
        shape,
        init: Init::XavierUniform { fan_in, fan_out },
    });
    specs.push(constant(format!("{name}.bias"), bias, 0.0));
}

fn gated(specs: &mut Vec<ParamSpec>, name: &str, shape: [usize; 4], bias: usize, fan_in: usize, fan_out: usize) {
    for half in ["a", "b"] {
        conv(specs, &format!("{name}_{half}"), shape.to_vec(), bias, fan_in, fan_out);
    }
}

fn norm_act(specs: &mut Vec<ParamSpec>, block: &str, c: usize) {
    specs.push(constant(format!("{block}.norm.gamma"), c, 1.0));
    specs.push(constant(format!("{block}.norm.beta"), c, 0.0));
    specs.push(constant(format!("{block}.prelu.slope"), c, Prelu::<f32>::INIT_SLOPE));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_geometry() {
        let cfg = ModelConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.freq_chain(), [161, 80, 39, 19, 9, 4]);
        assert_eq!(cfg.tcm_width(), 256);
        assert_eq!((0..5).map(|k| cfg.decoder_padding(k)).collect::<Vec<_>>(), [0, 0, 0, 1, 0]);
    }

    #[test]
    fn micro_geometry() {
        let cfg = ModelConfig::micro();
        cfg.validate().unwrap();
        assert_eq!(cfg.freq_chain(), [9, 4, 1]);
        assert_eq!(cfg.tcm_width(), 4);
        assert_eq!(cfg.decoder_padding(0), 1);
        assert_eq!(cfg.decoder_padding(1), 0);
    }

    #[test]
    fn unit_counts() {
        let cfg = ModelConfig::default();
        let count = |kind| {
            cfg.param_specs(kind)
                .iter()
                .filter(|s| s.name.ends_with(".input.weight"))
                .count()
        };
        assert_eq!(count(NetKind::Cme), 18);
        assert_eq!(count(NetKind::Csr), 12);
    }

    #[test]
    fn names_are_unique() {
        let specs = ModelConfig::default().all_param_specs();
        let mut names: Vec<_> = specs.iter().map(|s| &s.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), specs.len());
    }
}
