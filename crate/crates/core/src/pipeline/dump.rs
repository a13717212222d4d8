use std::io::Write;
use std::path::Path;

use crate::dsp::{ComplexSpectrogram, StftConfig};
use crate::error::{Error, Result};
use crate::real::Real;

pub const DB_FLOOR: f64 = -120.0;

/// Magnitude in dB, floored at [`DB_FLOOR`].
pub fn magnitude_db(re: f64, im: f64) -> f64 {
    let m = re.hypot(im);
    if m > 0.0 {
        (20.0 * m.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// One row per frame of bin magnitudes in dB, below a header of bin frequencies in Hz.
pub fn write_spectra_csv<W: Write, T: Real>(mut w: W, spec: &ComplexSpectrogram<T>, stft: &StftConfig) -> Result<()> {
    let header: Vec<String> = (0..spec.bins()).map(|k| format!("{}", stft.bin_frequency(k))).collect();
    writeln!(w, "{}", header.join(","))?;
    let mut row = String::new();
    for t in 0..spec.frames() {
        row.clear();
        for k in 0..spec.bins() {
            if k > 0 {
                row.push(',');
            }
            let c = spec.get(t, k);
            row.push_str(&format!("{:.4}", magnitude_db(c.re.to_f64_lossy(), c.im.to_f64_lossy())));
        }
        writeln!(w, "{row}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn dump_spectra<T: Real>(path: impl AsRef<Path>, spec: &ComplexSpectrogram<T>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::Io(e).at(path))?;
    write_spectra_csv(std::io::BufWriter::new(file), spec, &StftConfig::default()).map_err(|e| e.at(path))
}
