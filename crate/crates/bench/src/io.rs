//! Raw binary tensor and mask files.
//!
//! Both share a 16-byte header: a 4-byte magic (`TNS3` or `MSK3`) followed by
//! `n1`, `n2`, `n3` as little-endian `u32`. Tensor payloads are little-endian
//! `f64` values, masks one byte per entry (0 missing, 1 observed), both in
//! tensor storage order (first index fastest).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use tnnr::{Dims, ObservationMask, Tensor};

use crate::error::BenchError;

pub const TENSOR_MAGIC: &[u8; 4] = b"TNS3";
pub const MASK_MAGIC: &[u8; 4] = b"MSK3";

fn header(magic: &[u8; 4], dims: Dims) -> Result<[u8; 16], BenchError> {
    let mut out = [0u8; 16];
    out[..4].copy_from_slice(magic);
    for (slot, n) in [dims.0, dims.1, dims.2].into_iter().enumerate() {
        let n = u32::try_from(n).map_err(|_| BenchError::Format(format!("dimension {n} exceeds u32")))?;
        out[4 + 4 * slot..8 + 4 * slot].copy_from_slice(&n.to_le_bytes());
    }
    Ok(out)
}

fn parse_header(bytes: &[u8], magic: &[u8; 4]) -> Result<(Dims, usize), BenchError> {
    if bytes.len() < 16 {
        return Err(BenchError::Format("file shorter than its header".into()));
    }
    if &bytes[..4] != magic {
        return Err(BenchError::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&bytes[..4]),
            String::from_utf8_lossy(magic)
        )));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let dims = (dim(0), dim(1), dim(2));
    let len = dims
        .0
        .checked_mul(dims.1)
        .and_then(|v| v.checked_mul(dims.2))
        .filter(|&v| v > 0)
        .ok_or_else(|| BenchError::Format(format!("invalid dims {dims:?}")))?;
    Ok((dims, len))
}

pub fn encode_tensor(t: &Tensor) -> Result<Vec<u8>, BenchError> {
    let mut out = Vec::with_capacity(16 + 8 * t.len());
    out.extend_from_slice(&header(TENSOR_MAGIC, t.dims())?);
    for v in t.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_tensor(bytes: &[u8]) -> Result<Tensor, BenchError> {
    let (dims, len) = parse_header(bytes, TENSOR_MAGIC)?;
    let payload = &bytes[16..];
    if payload.len() != 8 * len {
        return Err(BenchError::Format(format!(
            "payload holds {} bytes, dims {dims:?} need {}",
            payload.len(),
            8 * len
        )));
    }
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(BenchError::Format("tensor file contains non-finite values".into()));
    }
    Ok(Tensor::new(dims, data)?)
}

pub fn encode_mask(m: &ObservationMask) -> Result<Vec<u8>, BenchError> {
    let mut out = Vec::with_capacity(16 + m.indicator().len());
    out.extend_from_slice(&header(MASK_MAGIC, m.dims())?);
    out.extend(m.indicator().iter().map(|&b| u8::from(b)));
    Ok(out)
}

pub fn decode_mask(bytes: &[u8]) -> Result<ObservationMask, BenchError> {
    let (dims, len) = parse_header(bytes, MASK_MAGIC)?;
    let payload = &bytes[16..];
    if payload.len() != len {
        return Err(BenchError::Format(format!("mask payload holds {} bytes, dims {dims:?} need {len}", payload.len())));
    }
    let observed = payload
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(BenchError::Format(format!("mask byte {other} is neither 0 nor 1"))),
        })
        .collect::<Result<Vec<bool>, _>>()?;
    ObservationMask::new(dims, observed).map_err(|e| BenchError::Format(e.to_string()))
}

fn read_all(path: &Path) -> Result<Vec<u8>, BenchError> {
    let mut buf = Vec::new();
    BufReader::new(File::open(path).map_err(|e| BenchError::io(path, e))?)
        .read_to_end(&mut buf)
        .map_err(|e| BenchError::io(path, e))?;
    Ok(buf)
}

fn write_all(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| BenchError::io(path, e))?);
    w.write_all(bytes).and_then(|_| w.flush()).map_err(|e| BenchError::io(path, e))
}

pub fn read_tensor(path: &Path) -> Result<Tensor, BenchError> {
    decode_tensor(&read_all(path)?)
}

pub fn write_tensor(path: &Path, t: &Tensor) -> Result<(), BenchError> {
    write_all(path, &encode_tensor(t)?)
}

pub fn read_mask(path: &Path) -> Result<ObservationMask, BenchError> {
    decode_mask(&read_all(path)?)
}

pub fn write_mask(path: &Path, m: &ObservationMask) -> Result<(), BenchError> {
    write_all(path, &encode_mask(m)?)
}
