use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::post::PpConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stage {
    /// Magnitude estimation only.
    One,
    /// Magnitude estimation followed by complex refinement.
    #[default]
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Single,
    Double,
}

impl FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Stage::One),
            "2" => Ok(Stage::Two),
            other => Err(Error::Config(format!("stage must be 1 or 2, got `{other}`"))),
        }
    }
}

impl FromStr for Precision {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "single" | "f32" => Ok(Precision::Single),
            "double" | "f64" => Ok(Precision::Double),
            other => Err(Error::Config(format!("precision must be single or double, got `{other}`"))),
        }
    }
}

pub fn parse_switch(s: &str) -> Result<bool> {
    match s.trim() {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        other => Err(Error::Config(format!("expected on or off, got `{other}`"))),
    }
}

/// Everything `run_enhance` needs besides the file paths.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub weights_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub stage: Stage,
    pub pp: bool,
    /// Clean reference; when present the ideal gain replaces the networks.
    pub oracle_gain: Option<PathBuf>,
    pub precision: Precision,
    pub dump_spectra: Option<PathBuf>,
    pub pp_config: PpConfig,
    pub model: ModelConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            weights_path: None,
            seed: None,
            stage: Stage::Two,
            pp: true,
            oracle_gain: None,
            precision: Precision::Single,
            dump_spectra: None,
            pp_config: PpConfig::default(),
            model: ModelConfig::default(),
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{}`", v.trim())))
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        match (&self.weights_path, self.seed, &self.oracle_gain) {
            (Some(_), Some(_), _) => return Err(Error::Config("give either weights or seed, not both".into())),
            (None, None, None) => return Err(Error::Config("one of weights or seed is required".into())),
            _ => {}
        }
        self.pp_config.validate()?;
        self.model.validate()
    }

    /// Sets one field from its textual form. Keys are the field names; the
    /// post-processor fields are accepted without a prefix.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let path = || (!v.is_empty()).then(|| PathBuf::from(v));
        let pp = &mut self.pp_config;
        match key.trim() {
            "weights_path" | "weights" => self.weights_path = path(),
            "seed" => self.seed = if v.is_empty() { None } else { Some(num(key, v)?) },
            "stage" => self.stage = v.parse()?,
            "pp" => self.pp = parse_switch(v)?,
            "oracle_gain" => self.oracle_gain = path(),
            "precision" => self.precision = v.parse()?,
            "dump_spectra" => self.dump_spectra = path(),
            "alpha_d" => pp.alpha_d = num(key, v)?,
            "beta_dd" => pp.beta_dd = num(key, v)?,
            "xi_min" => pp.xi_min = num(key, v)?,
            "gain_min" => pp.gain_min = num(key, v)?,
            "quefrency_min" => pp.quefrency_min = num(key, v)?,
            "quefrency_max" => pp.quefrency_max = num(key, v)?,
            "notch_halfwidth" => pp.notch_halfwidth = num(key, v)?,
            "peak_threshold" => pp.peak_threshold = num(key, v)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {}", i + 1, e)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(e).at(path))?;
        self.apply_text(&text).map_err(|e| e.at(path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_field() {
        let mut c = EngineConfig::default();
        c.apply_text(
            "# engine\nseed = 3\nstage=1\npp = off\nprecision = double\n\
             alpha_d = 0.9 # smoother\nbeta_dd=0.97\nxi_min=0.01\ngain_min=0.2\n\
             quefrency_min=50\nquefrency_max=150\nnotch_halfwidth=1\npeak_threshold=4\n\
             dump_spectra = out.csv\n",
        )
        .unwrap();
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.stage, Stage::One);
        assert!(!c.pp);
        assert_eq!(c.precision, Precision::Double);
        assert_eq!(c.pp_config.alpha_d, 0.9);
        assert_eq!(c.pp_config.quefrency_max, 150);
        assert_eq!(c.dump_spectra.as_deref(), Some(Path::new("out.csv")));
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_lines_and_combinations() {
        let mut c = EngineConfig::default();
        assert!(c.apply_text("stage = 3").is_err());
        assert!(c.apply_text("colour = red").is_err());
        assert!(c.apply_text("seed 4").is_err());
        assert!(c.validate().is_err());
        c.seed = Some(1);
        c.weights_path = Some("w.bin".into());
        assert!(c.validate().is_err());
        c.weights_path = None;
        c.validate().unwrap();
    }

    #[test]
    fn oracle_mode_needs_no_model() {
        let c = EngineConfig {
            oracle_gain: Some("clean.wav".into()),
            ..EngineConfig::default()
        };
        c.validate().unwrap();
    }
}
