//! Weight-file format:
//!
//! ```text
//! "TSCNW1" | header_len: u32 LE | JSON header | payload | crc32(payload): u32 LE
//! ```
//!
//! The header is a JSON array of `{name, shape, dtype, offset, length}` records, with
//! `offset` and `length` in bytes relative to the start of the payload. The payload is
//! raw little-endian `f32` data.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::ParamStore;
use super::tensor::Tensor;
use crate::error::WeightFileError;

pub const WEIGHT_MAGIC: &[u8; 6] = b"TSCNW1";

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    name: String,
    shape: Vec<usize>,
    dtype: String,
    offset: usize,
    length: usize,
}

pub fn write_params<W: Write>(store: &ParamStore<f32>, mut w: W) -> Result<(), WeightFileError> {
    let mut entries = Vec::with_capacity(store.len());
    let mut payload = Vec::with_capacity(store.param_count() * 4);
    for (name, t) in store.iter() {
        entries.push(Entry {
            name: name.to_string(),
            shape: t.shape().to_vec(),
            dtype: "f32".into(),
            offset: payload.len(),
            length: t.len() * 4,
        });
        for v in t.data() {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    let header = serde_json::to_vec(&entries).map_err(|e| WeightFileError::Header(e.to_string()))?;
    let header_len = u32::try_from(header.len()).map_err(|_| WeightFileError::Header("header too large".into()))?;
    w.write_all(WEIGHT_MAGIC)?;
    w.write_all(&header_len.to_le_bytes())?;
    w.write_all(&header)?;
    w.write_all(&payload)?;
    w.write_all(&crc32fast::hash(&payload).to_le_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_params<R: Read>(mut r: R) -> Result<ParamStore<f32>, WeightFileError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    parse(&bytes)
}

fn parse(bytes: &[u8]) -> Result<ParamStore<f32>, WeightFileError> {
    let magic_len = WEIGHT_MAGIC.len();
    if bytes.len() < magic_len {
        return Err(if WEIGHT_MAGIC.starts_with(bytes) {
            WeightFileError::Truncated
        } else {
            WeightFileError::BadMagic
        });
    }
    if &bytes[..magic_len] != WEIGHT_MAGIC {
        return Err(WeightFileError::BadMagic);
    }
    let rest = &bytes[magic_len..];
    if rest.len() < 4 {
        return Err(WeightFileError::Truncated);
    }
    let header_len = u32::from_le_bytes(rest[..4].try_into().unwrap()) as usize;
    let rest = &rest[4..];
    if rest.len() < header_len + 4 {
        return Err(WeightFileError::Truncated);
    }
    let entries: Vec<Entry> =
        serde_json::from_slice(&rest[..header_len]).map_err(|e| WeightFileError::Header(e.to_string()))?;
    let payload = &rest[header_len..rest.len() - 4];
    let stored = u32::from_le_bytes(rest[rest.len() - 4..].try_into().unwrap());

    // Bounds before checksum: a cut-off payload is reported as truncation.
    let needed = entries.iter().map(|e| e.offset.saturating_add(e.length)).max().unwrap_or(0);
    if needed > payload.len() {
        return Err(WeightFileError::Truncated);
    }
    let computed = crc32fast::hash(payload);
    if computed != stored {
        return Err(WeightFileError::Checksum { stored, computed });
    }

    let mut store = ParamStore::new();
    for e in entries {
        if e.dtype != "f32" {
            return Err(WeightFileError::Dtype(e.dtype));
        }
        let numel: usize = e.shape.iter().product();
        if e.length != numel * 4 {
            return Err(WeightFileError::Header(format!(
                "tensor `{}`: length {} does not match shape {:?}",
                e.name, e.length, e.shape
            )));
        }
        let raw = payload
            .get(e.offset..e.offset + e.length)
            .ok_or_else(|| WeightFileError::OutOfBounds(e.name.clone()))?;
        let data: Vec<f32> = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(WeightFileError::NonFinite(e.name));
        }
        if store.contains(&e.name) {
            return Err(WeightFileError::Duplicate(e.name));
        }
        let tensor = Tensor::new(e.shape, data).map_err(|err| WeightFileError::Header(err.to_string()))?;
        store
            .insert(e.name.clone(), tensor)
            .map_err(|_| WeightFileError::Duplicate(e.name))?;
    }
    Ok(store)
}

pub fn save_params(store: &ParamStore<f32>, path: impl AsRef<Path>) -> Result<(), WeightFileError> {
    let mut buf = Vec::new();
    write_params(store, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_params(path: impl AsRef<Path>) -> Result<ParamStore<f32>, WeightFileError> {
    parse(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ParamStore<f32> {
        let mut s = ParamStore::new();
        s.insert("a.weight", Tensor::new(vec![2, 3], vec![1.0, -2.5, 3.25, 0.0, -0.0, 1e-30]).unwrap())
            .unwrap();
        s.insert("a.bias", Tensor::new(vec![2], vec![f32::MAX, f32::MIN_POSITIVE]).unwrap())
            .unwrap();
        s
    }

    fn encoded() -> Vec<u8> {
        let mut buf = Vec::new();
        write_params(&sample(), &mut buf).unwrap();
        buf
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let back = read_params(encoded().as_slice()).unwrap();
        let bits = |s: &ParamStore<f32>| -> Vec<u32> { s.to_flat().iter().map(|v| v.to_bits()).collect() };
        assert_eq!(bits(&back), bits(&sample()));
        assert_eq!(back.names().collect::<Vec<_>>(), ["a.weight", "a.bias"]);
    }

    #[test]
    fn layout() {
        let buf = encoded();
        assert_eq!(&buf[..6], b"TSCNW1");
        let hlen = u32::from_le_bytes(buf[6..10].try_into().unwrap()) as usize;
        let header: serde_json::Value = serde_json::from_slice(&buf[10..10 + hlen]).unwrap();
        assert_eq!(header[1]["offset"], 24);
        assert_eq!(header[1]["length"], 8);
        assert_eq!(header[0]["dtype"], "f32");
        assert_eq!(buf.len(), 10 + hlen + 32 + 4);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let buf = encoded();
        for cut in [3, 8, 20, buf.len() - 5, buf.len() - 1] {
            assert!(
                matches!(read_params(&buf[..cut]), Err(WeightFileError::Truncated)),
                "cut at {cut}"
            );
        }
    }

    #[test]
    fn bad_magic() {
        let mut buf = encoded();
        buf[0] = b'X';
        assert!(matches!(read_params(buf.as_slice()), Err(WeightFileError::BadMagic)));
    }

    #[test]
    fn flipped_payload_bit_fails_checksum() {
        let mut buf = encoded();
        let n = buf.len();
        buf[n - 10] ^= 0x10;
        assert!(matches!(read_params(buf.as_slice()), Err(WeightFileError::Checksum { .. })));
    }
}
