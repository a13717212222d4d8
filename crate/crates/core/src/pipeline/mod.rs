//! File-level enhancement: WAV I/O, mixing utilities and the streaming engine.

mod config;
mod dump;
mod engine;
mod mix;
mod oracle;
mod wav;

pub use config::{parse_switch, EngineConfig, Precision, Stage};
pub use dump::{dump_spectra, magnitude_db, write_spectra_csv, DB_FLOOR};
pub use engine::{enhance_wave, run_enhance, Engine, Enhanced, Enhancer, LatencyReport};
pub use mix::mix_at_snr;
pub use oracle::{oracle_gain_frame, oracle_gain_mode, ORACLE_EPS};
pub use wav::{read_wav, read_wav_from, to_pcm16, write_wav, write_wav_to};
