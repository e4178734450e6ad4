use thiserror::Error;

/// Errors from the host-side reference path and series I/O.
#[derive(Debug, Error)]
pub enum TsaError {
    #[error("empty series")]
    EmptySeries,
    #[error("accumulator saturated computing {what}")]
    Saturation { what: String },
    #[error("window length {window} exceeds series length {len}")]
    WindowTooLong { window: usize, len: usize },
    #[error("window length must be at least 1")]
    ZeroWindow,
    #[error("requested {requested} queries but only {available} windows fit")]
    NotEnoughWindows { requested: usize, available: usize },
    #[error("stride must be at least 1")]
    ZeroStride,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("sample {value} at position {index} does not fit {dtype}")]
    OutOfRange {
        index: usize,
        value: String,
        dtype: crate::DType,
    },
    #[error("bad binary series: {0}")]
    BadBinary(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
