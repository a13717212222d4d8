use std::io::{Read, Seek, Write};
use std::path::Path;

use crate::dsp::WaveBuffer;
use crate::error::{Error, Result, WavError};
use crate::real::Real;
use crate::SAMPLE_RATE;

const FULL_SCALE: f64 = 32768.0;

fn wav_err(e: hound::Error) -> WavError {
    match e {
        hound::Error::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            WavError::Malformed("unexpected end of file".into())
        }
        hound::Error::IoError(io) => WavError::Io(io),
        other => WavError::Malformed(other.to_string()),
    }
}

/// Decodes 16-bit mono PCM at 16 kHz into samples in `[-1, 1)`.
pub fn read_wav_from<R: Read>(reader: R) -> Result<WaveBuffer<f32>, WavError> {
    let reader = hound::WavReader::new(reader).map_err(wav_err)?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        let format = match spec.sample_format {
            hound::SampleFormat::Int => "integer",
            hound::SampleFormat::Float => "float",
        };
        return Err(WavError::SampleFormat {
            bits: spec.bits_per_sample,
            format,
        });
    }
    if spec.channels != 1 {
        return Err(WavError::Channels(spec.channels));
    }
    if spec.sample_rate != SAMPLE_RATE {
        return Err(WavError::SampleRate(spec.sample_rate));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| (v as f64 / FULL_SCALE) as f32))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(wav_err)?;
    Ok(WaveBuffer::new(samples))
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<WaveBuffer<f32>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io(e).at(path))?;
    read_wav_from(std::io::BufReader::new(file)).map_err(|e| Error::Wav(e).at(path))
}

/// Rounds to 16-bit PCM, saturating out-of-range samples.
pub fn to_pcm16<T: Real>(x: T) -> i16 {
    let v = (x.to_f64_lossy() * FULL_SCALE).round();
    if v.is_nan() {
        0
    } else {
        v.clamp(i16::MIN as f64, i16::MAX as f64) as i16
    }
}

pub fn write_wav_to<W: Write + Seek, T: Real>(writer: W, wave: &WaveBuffer<T>) -> Result<(), WavError> {
    if wave.sample_rate != SAMPLE_RATE {
        return Err(WavError::SampleRate(wave.sample_rate));
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: SAMPLE_RATE,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::new(writer, spec).map_err(wav_err)?;
    {
        let mut w16 = w.get_i16_writer(wave.samples.len() as u32);
        for &s in &wave.samples {
            w16.write_sample(to_pcm16(s));
        }
        w16.flush().map_err(wav_err)?;
    }
    w.finalize().map_err(wav_err)
}

pub fn write_wav<T: Real>(path: impl AsRef<Path>, wave: &WaveBuffer<T>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::Io(e).at(path))?;
    write_wav_to(std::io::BufWriter::new(file), wave).map_err(|e| Error::Wav(e).at(path))
}
