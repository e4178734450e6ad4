//! Series file formats.
//!
//! - CSV: one value per line, an optional non-numeric header line, blank lines
//!   ignored.
//! - Binary: 16-byte header `b"TSA1"`, `u32` dtype code, `u64` sample count,
//!   all little-endian, followed by the packed little-endian samples.
//!
//! Values are quantized to the target type by rounding to nearest, ties to
//! even; values outside the target range are rejected.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_traits::NumCast;

use crate::error::TsaError;
use crate::scalar::{DType, Sample};
use crate::series::TimeSeries;

pub const MAGIC: &[u8; 4] = b"TSA1";
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesFormat {
    Csv,
    Binary,
}

impl SeriesFormat {
    /// `.bin` / `.tsa` are binary, anything else is CSV.
    pub fn from_path(path: &Path) -> SeriesFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("tsa") => SeriesFormat::Binary,
            _ => SeriesFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Raw {
    Int(i128),
    Float(f64),
}

fn quantize<T: Sample>(raw: Raw) -> Option<T> {
    match raw {
        Raw::Int(v) => <T as NumCast>::from(v),
        Raw::Float(v) if T::DTYPE.is_integer() => {
            if !v.is_finite() {
                return None;
            }
            <T as NumCast>::from(v.round_ties_even())
        }
        Raw::Float(v) => <T as NumCast>::from(v),
    }
}

fn parse_value(s: &str) -> Option<Raw> {
    if let Ok(v) = s.parse::<i128>() {
        return Some(Raw::Int(v));
    }
    s.parse::<f64>().ok().map(Raw::Float)
}

/// Parses CSV text. Line numbers in errors are 1-based.
pub fn parse_csv<T: Sample>(text: &str) -> Result<TimeSeries<T>, TsaError> {
    let mut samples = Vec::new();
    let mut seen_content = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        // first column only, so exported tables with extra columns still load
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match parse_value(field) {
            Some(raw) => {
                let v = quantize::<T>(raw).ok_or_else(|| TsaError::OutOfRange {
                    index: samples.len(),
                    value: field.to_string(),
                    dtype: T::DTYPE,
                })?;
                samples.push(v);
            }
            None if !seen_content => {} // header
            None => {
                return Err(TsaError::Parse {
                    line: lineno,
                    msg: format!("not a number: `{field}`"),
                })
            }
        }
        seen_content = true;
    }
    TimeSeries::new(samples)
}

pub fn to_csv<T: Sample>(series: &TimeSeries<T>) -> String {
    let mut s = String::with_capacity(series.len() * 6);
    for v in series.samples() {
        s.push_str(&v.to_string());
        s.push('\n');
    }
    s
}

/// Encodes a series in its own dtype.
pub fn to_binary<T: Sample>(series: &TimeSeries<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + series.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&T::DTYPE.code().to_le_bytes());
    out.extend_from_slice(&(series.len() as u64).to_le_bytes());
    for &v in series.samples() {
        v.write_le(&mut out);
    }
    out
}

fn decode_as<S: Sample, T: Sample>(body: &[u8], len: usize) -> Result<Vec<T>, TsaError> {
    let width = std::mem::size_of::<S>();
    body.chunks_exact(width)
        .take(len)
        .enumerate()
        .map(|(i, chunk)| {
            let v = S::read_le(chunk);
            let raw = if S::DTYPE.is_integer() {
                Raw::Int(v.to_i128().expect("integer sample"))
            } else {
                Raw::Float(v.to_f64().expect("float sample"))
            };
            quantize::<T>(raw).ok_or_else(|| TsaError::OutOfRange {
                index: i,
                value: v.to_string(),
                dtype: T::DTYPE,
            })
        })
        .collect()
}

/// Decodes a binary series, converting from the stored dtype to `T`.
pub fn parse_binary<T: Sample>(bytes: &[u8]) -> Result<TimeSeries<T>, TsaError> {
    if bytes.len() < HEADER_LEN {
        return Err(TsaError::BadBinary("truncated header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(TsaError::BadBinary("bad magic".into()));
    }
    let code = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let dtype = DType::from_code(code)
        .ok_or_else(|| TsaError::BadBinary(format!("unknown dtype code {code}")))?;
    let body = &bytes[HEADER_LEN..];
    let need = len
        .checked_mul(dtype.bits() as usize / 8)
        .ok_or_else(|| TsaError::BadBinary("length overflow".into()))?;
    if body.len() < need {
        return Err(TsaError::BadBinary(format!(
            "expected {need} payload bytes, found {}",
            body.len()
        )));
    }
    let samples = match dtype {
        DType::Int8 => decode_as::<i8, T>(body, len),
        DType::Int16 => decode_as::<i16, T>(body, len),
        DType::Int32 => decode_as::<i32, T>(body, len),
        DType::Int64 => decode_as::<i64, T>(body, len),
        DType::Fp32 => decode_as::<f32, T>(body, len),
        DType::Fp64 => decode_as::<f64, T>(body, len),
    }?;
    TimeSeries::new(samples)
}

/// Loads a series from disk, picking the format from the extension unless given.
pub fn ingest<T: Sample>(
    path: &Path,
    format: Option<SeriesFormat>,
) -> Result<TimeSeries<T>, TsaError> {
    match format.unwrap_or_else(|| SeriesFormat::from_path(path)) {
        SeriesFormat::Csv => parse_csv(&fs::read_to_string(path)?),
        SeriesFormat::Binary => parse_binary(&fs::read(path)?),
    }
}

pub fn write_series<T: Sample>(
    path: &Path,
    series: &TimeSeries<T>,
    format: SeriesFormat,
) -> Result<(), TsaError> {
    let mut f = fs::File::create(path)?;
    match format {
        SeriesFormat::Csv => f.write_all(to_csv(series).as_bytes())?,
        SeriesFormat::Binary => f.write_all(&to_binary(series))?,
    }
    Ok(())
}
