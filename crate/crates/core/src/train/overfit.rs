use std::io::Write;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::loss::{loss_cm, loss_joint, LossConfig, LossReport};
use crate::dsp::ComplexSpectrogram;
use crate::error::{Error, Result};
use crate::model::{ModelConfig, TscnModel};
use crate::nn::ParamStore;

/// A fixed noisy/clean spectrogram pair.
#[derive(Debug, Clone)]
pub struct TrainingPair {
    pub noisy: ComplexSpectrogram<f64>,
    pub clean: ComplexSpectrogram<f64>,
}

/// Harmonic-looking clean spectra plus uniform complex noise.
pub fn synthetic_pair(frames: usize, bins: usize, seed: u64) -> TrainingPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clean = ComplexSpectrogram::zeros(frames, bins);
    let mut noisy = ComplexSpectrogram::zeros(frames, bins);
    for t in 0..frames {
        let env = 0.6 + 0.4 * (t as f64 * 0.45).sin();
        for k in 0..bins {
            let ridge = if k % 3 == 1 { 1.0 } else { 0.25 };
            let m = env * ridge;
            let ph = 0.7 * t as f64 + 1.3 * k as f64;
            let (cr, ci) = (m * ph.cos(), m * ph.sin());
            clean.real[[t, k]] = cr;
            clean.imag[[t, k]] = ci;
            noisy.real[[t, k]] = cr + rng.random_range(-0.4..0.4);
            noisy.imag[[t, k]] = ci + rng.random_range(-0.4..0.4);
        }
    }
    TrainingPair { noisy, clean }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverfitConfig {
    /// Total optimizer steps over both phases.
    pub steps: usize,
    /// Steps spent on the stage-one network alone.
    pub cme_steps: usize,
    pub seed: u64,
    /// Initial descent step, adapted after every step.
    pub step_size: f64,
    /// Perturbation magnitude of the gradient probe.
    pub perturbation: f64,
    pub loss: LossConfig,
}

impl Default for OverfitConfig {
    fn default() -> Self {
        OverfitConfig {
            steps: 200,
            cme_steps: 60,
            seed: 7,
            step_size: 0.02,
            perturbation: 1e-3,
            loss: LossConfig::mean(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    Cme,
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub phase: Phase,
    pub report: LossReport,
}

#[derive(Debug, Clone)]
pub struct OverfitResult {
    /// Point 0 is the initial state, point `i` follows step `i`.
    pub trajectory: Vec<TrajectoryPoint>,
    pub params: ParamStore<f64>,
}

impl OverfitResult {
    pub fn initial(&self) -> &LossReport {
        &self.trajectory[0].report
    }

    pub fn last(&self) -> &LossReport {
        &self.trajectory[self.trajectory.len() - 1].report
    }
}

struct Objective<'a> {
    cfg: &'a ModelConfig,
    pair: &'a TrainingPair,
    clean_mag: ndarray::Array2<f64>,
    loss: LossConfig,
    store: ParamStore<f64>,
}

impl Objective<'_> {
    fn report(&mut self, theta: &[f64]) -> Result<LossReport> {
        self.store.assign_flat(theta)?;
        let model = TscnModel::from_params(self.cfg, &self.store)?;
        let out = model.forward(&self.pair.noisy)?;
        loss_joint(&out.refined, &self.pair.clean, &out.est_mag, &self.clean_mag, &self.loss)
    }

    fn cme_loss(&mut self, theta: &[f64]) -> Result<f64> {
        self.store.assign_flat(theta)?;
        let model = TscnModel::from_params(self.cfg, &self.store)?;
        let est = model.cme_forward(&self.pair.noisy.magnitude())?;
        loss_cm(&est, &self.clean_mag, &self.loss)
    }

    fn value(&mut self, phase: Phase, theta: &[f64]) -> Result<f64> {
        match phase {
            Phase::Cme => self.cme_loss(theta),
            Phase::Joint => Ok(self.report(theta)?.l_total),
        }
    }
}

/// Two-phase derivative-free descent on a small model.
///
/// The first `cme_steps` steps move only the stage-one parameters under the
/// magnitude loss; the rest move everything under the joint loss. Each step draws
/// a Rademacher direction, estimates the directional slope from two probes and
/// keeps the proposal only if the phase objective drops, so every phase
/// objective is non-increasing.
pub fn micro_overfit(
    cfg: &ModelConfig,
    pair: &TrainingPair,
    params: ParamStore<f64>,
    oc: &OverfitConfig,
) -> Result<OverfitResult> {
    oc.loss.validate()?;
    if oc.cme_steps > oc.steps {
        return Err(Error::Config("cme_steps exceeds steps".into()));
    }
    let cme_ranges = params.ranges_with_prefix(&format!("{}.", crate::model::NetKind::Cme.prefix()));
    let all: Vec<Range<usize>> = vec![0..params.param_count()];
    let mut theta = params.to_flat();
    let mut obj = Objective {
        cfg,
        pair,
        clean_mag: pair.clean.magnitude(),
        loss: oc.loss,
        store: params,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(oc.seed);

    let first = obj.report(&theta)?;
    if !first.is_finite() {
        return Err(Error::Diverged(0));
    }
    let mut trajectory = vec![TrajectoryPoint {
        step: 0,
        phase: Phase::Cme,
        report: first,
    }];

    let mut phase = Phase::Cme;
    let mut current = obj.value(phase, &theta)?;
    let mut a = oc.step_size;
    let c = oc.perturbation;
    for step in 1..=oc.steps {
        if step == oc.cme_steps + 1 && phase == Phase::Cme {
            phase = Phase::Joint;
            current = obj.value(phase, &theta)?;
            a = oc.step_size;
        }
        let ranges = if phase == Phase::Cme { &cme_ranges } else { &all };
        let mut delta = vec![0.0; theta.len()];
        for r in ranges {
            for d in &mut delta[r.clone()] {
                *d = if rng.random::<bool>() { 1.0 } else { -1.0 };
            }
        }
        let shifted = |s: f64| -> Vec<f64> { theta.iter().zip(&delta).map(|(t, d)| t + s * d).collect() };
        let plus = obj.value(phase, &shifted(c))?;
        let minus = obj.value(phase, &shifted(-c))?;
        if !(plus.is_finite() && minus.is_finite()) {
            return Err(Error::Diverged(step));
        }
        let slope = (plus - minus) / (2.0 * c);
        let cand = shifted(-a * slope);
        let value = obj.value(phase, &cand)?;
        if value.is_finite() && value < current {
            theta = cand;
            current = value;
            a = (a * 1.5).min(1e3 * oc.step_size);
        } else {
            a *= 0.5;
        }
        let report = obj.report(&theta)?;
        if !report.is_finite() {
            return Err(Error::Diverged(step));
        }
        trajectory.push(TrajectoryPoint { step, phase, report });
    }
    obj.store.assign_flat(&theta)?;
    Ok(OverfitResult {
        trajectory,
        params: obj.store,
    })
}

/// Writes `step,l_cm,l_ri,l_mag,l_total` rows.
pub fn write_trajectory_csv<W: Write>(mut w: W, trajectory: &[TrajectoryPoint]) -> std::io::Result<()> {
    writeln!(w, "step,l_cm,l_ri,l_mag,l_total")?;
    for p in trajectory {
        let r = &p.report;
        writeln!(w, "{},{:e},{:e},{:e},{:e}", p.step, r.l_cm, r.l_ri, r.l_mag, r.l_total)?;
    }
    Ok(())
}
