//! `tscn`: streaming two-stage speech enhancement on WAV files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tscn_core::pipeline::{mix_at_snr, parse_switch, read_wav, run_enhance, write_wav, EngineConfig, Precision, Stage};
use tscn_core::{Error, ModelConfig};

#[derive(Parser)]
#[command(name = "tscn", version, about = "Two-stage causal speech enhancement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhance a 16 kHz mono 16-bit WAV file.
    Enhance(EnhanceArgs),
    /// Mix clean speech and noise at a given SNR.
    Mix(MixArgs),
    /// Write a randomly initialized weight file.
    InitWeights(InitArgs),
}

#[derive(Args)]
struct EnhanceArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long = "out", value_name = "FILE")]
    output: PathBuf,
    #[arg(long, value_name = "FILE", conflicts_with = "seed")]
    weights: Option<PathBuf>,
    /// Use randomly initialized weights from this seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["1", "2"])]
    stage: Option<String>,
    #[arg(long, value_parser = ["on", "off"])]
    pp: Option<String>,
    /// Clean reference; its ideal gain replaces the networks.
    #[arg(long = "oracle-gain", value_name = "FILE")]
    oracle_gain: Option<PathBuf>,
    #[arg(long = "dump-spectra", value_name = "FILE")]
    dump_spectra: Option<PathBuf>,
    /// Print per-frame timing as one JSON line.
    #[arg(long = "report-latency")]
    report_latency: bool,
    #[arg(long, value_parser = ["single", "double"])]
    precision: Option<String>,
    /// key=value settings; flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MixArgs {
    #[arg(long)]
    clean: PathBuf,
    #[arg(long)]
    noise: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    snr: f64,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Args)]
struct InitArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long = "out")]
    output: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::Weights(_) | Error::MissingParam(_) | Error::ParamShape { .. } => 4,
        Error::NonFinite { .. } | Error::Diverged(_) => 5,
        _ => 3,
    }
}

fn engine_config(a: &EnhanceArgs) -> Result<EngineConfig, Error> {
    let mut cfg = EngineConfig::default();
    if let Some(path) = &a.config {
        cfg.apply_file(path)
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    if let Some(w) = &a.weights {
        cfg.weights_path = Some(w.clone());
        cfg.seed = None;
    }
    if let Some(s) = a.seed {
        cfg.seed = Some(s);
        cfg.weights_path = None;
    }
    if let Some(s) = &a.stage {
        cfg.stage = s.parse::<Stage>()?;
    }
    if let Some(p) = &a.pp {
        cfg.pp = parse_switch(p)?;
    }
    if let Some(p) = &a.precision {
        cfg.precision = p.parse::<Precision>()?;
    }
    if a.oracle_gain.is_some() {
        cfg.oracle_gain = a.oracle_gain.clone();
    }
    if a.dump_spectra.is_some() {
        cfg.dump_spectra = a.dump_spectra.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Enhance(a) => {
            let cfg = engine_config(&a)?;
            let report = run_enhance(&cfg, &a.input, &a.output)?;
            if a.report_latency {
                println!("{}", report.to_json());
            }
        }
        Command::Mix(a) => {
            let clean = read_wav(&a.clean)?;
            let noise = read_wav(&a.noise)?;
            write_wav(&a.output, &mix_at_snr(&clean, &noise, a.snr)?)?;
        }
        Command::InitWeights(a) => {
            let cfg = ModelConfig::default();
            let store = tscn_core::nn::init_params(&cfg.all_param_specs(), a.seed)?;
            tscn_core::nn::save_params(&store, &a.output).map_err(|e| Error::Weights(e).at(&a.output))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tscn: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
