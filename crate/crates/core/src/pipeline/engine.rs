use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex;
use serde::Serialize;

use super::config::{EngineConfig, Precision, Stage};
use super::dump::dump_spectra;
use super::oracle::oracle_gain_frame;
use super::wav::{read_wav, write_wav};
use crate::dsp::{analyze, ComplexSpectrogram, StftConfig, StreamAnalyzer, StreamSynthesizer, WaveBuffer};
use crate::error::{Error, Result};
use crate::model::{TscnModel, TscnStream};
use crate::nn::load_params;
use crate::post::{pp_frame, PpConfig, PpState};
use crate::real::Real;

/// Per-frame wall-clock figures of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencyReport {
    pub frames: usize,
    pub mean_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
    pub algorithmic_delay_ms: f64,
}

impl LatencyReport {
    pub fn from_timings(timings: &[Duration], stft: &StftConfig) -> Self {
        let mut ms: Vec<f64> = timings.iter().map(|d| d.as_secs_f64() * 1e3).collect();
        ms.sort_by(f64::total_cmp);
        let n = ms.len();
        let mean = if n == 0 { 0.0 } else { ms.iter().sum::<f64>() / n as f64 };
        let p95 = if n == 0 { 0.0 } else { ms[(0.95 * n as f64).ceil() as usize - 1] };
        LatencyReport {
            frames: n,
            mean_ms: mean,
            p95_ms: p95,
            max_ms: ms.last().copied().unwrap_or(0.0),
            algorithmic_delay_ms: stft.algorithmic_delay_ms(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain numeric struct")
    }
}

/// What produces the first-pipeline spectrum from a noisy frame.
pub enum Enhancer<'a, T: Real> {
    /// Passes the noisy frame through unchanged.
    Identity,
    Network { stream: TscnStream<'a, T>, refine: bool },
    /// Ideal gain from a clean reference, applied to the noisy frame.
    OracleGain { clean: ComplexSpectrogram<T> },
}

impl<'a, T: Real> Enhancer<'a, T> {
    pub fn network(model: &'a TscnModel<T>, stage: Stage) -> Self {
        Enhancer::Network {
            stream: model.stream(),
            refine: stage == Stage::Two,
        }
    }

    fn process(&mut self, t: usize, noisy: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        match self {
            Enhancer::Identity => Ok(noisy.to_vec()),
            Enhancer::Network { stream, refine } => Ok(stream.step(noisy, *refine)?.refined),
            Enhancer::OracleGain { clean } => {
                if t >= clean.frames() {
                    return Err(Error::shape(format!("clean reference ends before frame {t}")));
                }
                let gain = oracle_gain_frame(&clean.frame(t), noisy);
                Ok(noisy
                    .iter()
                    .zip(gain)
                    .map(|(x, g)| x * T::from_f64_lossy(g))
                    .collect())
            }
        }
    }
}

/// Streaming frame loop: analysis, enhancement, optional post-processing and
/// overlap-add synthesis. Accepts input in chunks of any size.
pub struct Engine<'a, T: Real> {
    stft: StftConfig,
    analyzer: StreamAnalyzer<T>,
    synth: StreamSynthesizer<T>,
    enhancer: Enhancer<'a, T>,
    pp: Option<(PpState, PpConfig)>,
    frame: usize,
    timings: Vec<Duration>,
    spectra: Option<Vec<Vec<Complex<T>>>>,
}

impl<'a, T: Real> Engine<'a, T> {
    pub fn new(enhancer: Enhancer<'a, T>, pp: Option<PpConfig>) -> Result<Self> {
        let stft = StftConfig::default();
        if let Some(c) = &pp {
            c.validate()?;
        }
        Ok(Engine {
            analyzer: StreamAnalyzer::new(&stft),
            synth: StreamSynthesizer::new(&stft),
            enhancer,
            pp: pp.map(|c| (PpState::new(stft.n_bins()), c)),
            frame: 0,
            timings: Vec::new(),
            spectra: None,
            stft,
        })
    }

    /// Keeps every output spectrum for later inspection.
    pub fn record_spectra(&mut self) {
        self.spectra.get_or_insert_with(Vec::new);
    }

    pub fn frames(&self) -> usize {
        self.frame
    }

    /// Feeds samples and returns the output samples they complete.
    pub fn push(&mut self, samples: &[T]) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(samples.len() + self.stft.hop);
        let mut rest = samples;
        while !rest.is_empty() {
            let need = self.stft.win_len.saturating_sub(self.analyzer.buffered()).max(1);
            let (head, tail) = rest.split_at(need.min(rest.len()));
            rest = tail;
            let start = Instant::now();
            for f in self.analyzer.push(head) {
                out.extend(self.process_frame(&f)?);
                self.timings.push(start.elapsed());
            }
        }
        Ok(out)
    }

    /// Runs one analysed frame through the chain and returns `hop` output samples.
    pub fn process_frame(&mut self, noisy: &[Complex<T>]) -> Result<Vec<T>> {
        let t = self.frame;
        let finite = |v: &[Complex<T>]| v.iter().all(|c| c.re.is_finite() && c.im.is_finite());
        if !finite(noisy) {
            return Err(Error::NonFinite { frame: t });
        }
        let mut enhanced = self.enhancer.process(t, noisy)?;
        if let Some((state, cfg)) = &mut self.pp {
            enhanced = pp_frame(state, &enhanced, noisy, cfg);
        }
        if !finite(&enhanced) {
            return Err(Error::NonFinite { frame: t });
        }
        let samples = self.synth.push(&enhanced)?;
        if let Some(s) = &mut self.spectra {
            s.push(enhanced);
        }
        self.frame += 1;
        Ok(samples)
    }

    /// Flushes the tail covered only by the last frame.
    pub fn finish(&mut self) -> Vec<T> {
        self.synth.finish()
    }

    pub fn latency(&self) -> LatencyReport {
        LatencyReport::from_timings(&self.timings, &self.stft)
    }

    pub fn spectra(&self) -> Option<Result<ComplexSpectrogram<T>>> {
        self.spectra
            .as_ref()
            .map(|s| ComplexSpectrogram::from_frames(s, self.stft.n_bins()))
    }
}

/// Result of [`enhance_wave`].
pub struct Enhanced<T> {
    pub wave: WaveBuffer<T>,
    pub latency: LatencyReport,
    pub spectra: Option<ComplexSpectrogram<T>>,
}

/// Enhances a whole buffer with an already prepared enhancer.
pub fn enhance_wave<T: Real>(
    noisy: &WaveBuffer<T>,
    enhancer: Enhancer<'_, T>,
    pp: Option<PpConfig>,
    keep_spectra: bool,
) -> Result<Enhanced<T>> {
    noisy.validate()?;
    let stft = StftConfig::default();
    if noisy.len() < stft.win_len {
        return Err(Error::TooShort {
            len: noisy.len(),
            needed: stft.win_len,
        });
    }
    let mut engine = Engine::new(enhancer, pp)?;
    if keep_spectra {
        engine.record_spectra();
    }
    let mut samples = engine.push(&noisy.samples)?;
    samples.extend(engine.finish());
    Ok(Enhanced {
        wave: WaveBuffer::with_rate(samples, noisy.sample_rate),
        latency: engine.latency(),
        spectra: engine.spectra().transpose()?,
    })
}

fn build_model<T: Real>(cfg: &EngineConfig) -> Result<Option<TscnModel<T>>> {
    if let Some(path) = &cfg.weights_path {
        let store = load_params(path).map_err(|e| Error::Weights(e).at(path))?;
        let model = TscnModel::from_params(&cfg.model, &store.cast::<T>()).map_err(|e| e.at(path))?;
        return Ok(Some(model));
    }
    match cfg.seed {
        Some(seed) => Ok(Some(TscnModel::seeded(&cfg.model, seed)?.0)),
        None => Ok(None),
    }
}

fn run_typed<T: Real>(cfg: &EngineConfig, noisy: &WaveBuffer<f32>, out_path: &Path) -> Result<LatencyReport> {
    let noisy = noisy.cast::<T>();
    let model;
    let enhancer = match &cfg.oracle_gain {
        Some(path) => {
            let clean = read_wav(path)?;
            if clean.len() != noisy.len() {
                return Err(Error::shape(format!(
                    "clean reference has {} samples, input has {}",
                    clean.len(),
                    noisy.len()
                ))
                .at(path));
            }
            Enhancer::OracleGain {
                clean: analyze(&clean.cast::<T>(), &StftConfig::default())?,
            }
        }
        None => {
            model = build_model::<T>(cfg)?.ok_or_else(|| Error::Config("one of weights or seed is required".into()))?;
            Enhancer::network(&model, cfg.stage)
        }
    };
    let pp = cfg.pp.then(|| cfg.pp_config.clone());
    let result = enhance_wave(&noisy, enhancer, pp, cfg.dump_spectra.is_some())?;
    write_wav(out_path, &result.wave)?;
    if let (Some(path), Some(spec)) = (&cfg.dump_spectra, &result.spectra) {
        dump_spectra(path, spec)?;
    }
    Ok(result.latency)
}

/// Reads `in_path`, enhances it as configured and writes `out_path`.
pub fn run_enhance(cfg: &EngineConfig, in_path: impl AsRef<Path>, out_path: impl AsRef<Path>) -> Result<LatencyReport> {
    cfg.validate()?;
    let (in_path, out_path) = (in_path.as_ref(), out_path.as_ref());
    let noisy = read_wav(in_path)?;
    let run = match cfg.precision {
        Precision::Single => run_typed::<f32>(cfg, &noisy, out_path),
        Precision::Double => run_typed::<f64>(cfg, &noisy, out_path),
    };
    run.map_err(|e| match e {
        Error::File { .. } => e,
        Error::TooShort { .. } | Error::NonFinite { .. } => e.at(in_path),
        other => other,
    })
}
