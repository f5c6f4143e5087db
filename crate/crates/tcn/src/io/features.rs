//! Feature sequence files. Two interchangeable encodings, auto-detected by
//! magic bytes:
//!
//! - text CSV: one frame per line, comma-separated reals;
//! - binary TCNF: `"TCNF" | u32 version (1) | u32 F0 | u32 T` followed by
//!   `F0 * T` little-endian f32 values, frame-major.

use crate::error::{Result, TcnError};
use crate::nn::SeqTensor;
use std::fs;
use std::io::Write as _;
use std::path::Path;

const MAGIC: &[u8; 4] = b"TCNF";
const VERSION: u32 = 1;

/// Reads either encoding, detected by the leading magic bytes.
pub fn read_features(path: impl AsRef<Path>) -> Result<SeqTensor> {
    let path = path.as_ref();
    let bytes = fs::read(path)
        .map_err(|e| TcnError::data(format!("cannot read {}: {e}", path.display())))?;
    if bytes.starts_with(MAGIC) {
        parse_binary(&bytes, path)
    } else {
        parse_csv(&bytes, path)
    }
}

fn parse_csv(bytes: &[u8], path: &Path) -> Result<SeqTensor> {
    let err = |line: usize, message: String| {
        TcnError::parse(path.display().to_string(), format!("line {line}"), message)
    };
    let text = std::str::from_utf8(bytes)
        .map_err(|_| err(0, "file is neither TCNF binary nor UTF-8 text".into()))?;
    let mut frames: Vec<Vec<f64>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for tok in line.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| err(i + 1, format!("bad number {:?}", tok.trim())))?;
            row.push(v);
        }
        if let Some(first) = frames.first() {
            if row.len() != first.len() {
                return Err(err(
                    i + 1,
                    format!("expected {} values, found {}", first.len(), row.len()),
                ));
            }
        }
        frames.push(row);
    }
    if frames.is_empty() {
        return Err(err(1, "no frames".into()));
    }
    let channels = frames[0].len();
    let mut out = SeqTensor::zeros(channels, frames.len());
    for (t, row) in frames.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            out.set(c, t, v);
        }
    }
    Ok(out)
}

fn parse_binary(bytes: &[u8], path: &Path) -> Result<SeqTensor> {
    let err = |offset: usize, message: String| {
        TcnError::parse(
            path.display().to_string(),
            format!("byte {offset}"),
            message,
        )
    };
    let u32_at = |offset: usize| -> Result<u32> {
        let end = offset + 4;
        let chunk = bytes
            .get(offset..end)
            .ok_or_else(|| err(offset, "truncated header".into()))?;
        Ok(u32::from_le_bytes(chunk.try_into().unwrap()))
    };
    let version = u32_at(4)?;
    if version != VERSION {
        return Err(err(4, format!("unsupported version {version}")));
    }
    let channels = u32_at(8)? as usize;
    let frames = u32_at(12)? as usize;
    if channels == 0 || frames == 0 {
        return Err(err(8, "empty tensor".into()));
    }
    let needed = 16 + channels * frames * 4;
    if bytes.len() != needed {
        return Err(err(
            bytes.len().min(needed),
            format!("expected {needed} bytes, file has {}", bytes.len()),
        ));
    }
    let mut out = SeqTensor::zeros(channels, frames);
    for t in 0..frames {
        for c in 0..channels {
            let at = 16 + (t * channels + c) * 4;
            let v = f32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
            out.set(c, t, v as f64);
        }
    }
    Ok(out)
}

/// Writes the CSV encoding. Values print in shortest round-trip form, so a
/// read-back is value-exact.
pub fn write_features_csv(x: &SeqTensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for t in 0..x.frames() {
        for c in 0..x.channels() {
            if c > 0 {
                text.push(',');
            }
            text.push_str(&format!("{}", x.at(c, t)));
        }
        text.push('\n');
    }
    fs::write(path, text)
        .map_err(|e| TcnError::data(format!("cannot write {}: {e}", path.display())))
}

/// Writes the TCNF binary encoding (f32 precision).
pub fn write_features_binary(x: &SeqTensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(16 + x.channels() * x.frames() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(x.channels() as u32).to_le_bytes());
    out.extend_from_slice(&(x.frames() as u32).to_le_bytes());
    for t in 0..x.frames() {
        for c in 0..x.channels() {
            out.write_all(&(x.at(c, t) as f32).to_le_bytes()).unwrap();
        }
    }
    fs::write(path, out)
        .map_err(|e| TcnError::data(format!("cannot write {}: {e}", path.display())))
}
