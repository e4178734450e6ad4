//! Host-side series and query sets.

use serde::{Deserialize, Serialize};

use crate::error::TsaError;
use crate::scalar::Sample;

/// A non-empty sequence of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    samples: Vec<T>,
}

impl<T: Sample> TimeSeries<T> {
    pub fn new(samples: Vec<T>) -> Result<Self, TsaError> {
        if samples.is_empty() {
            return Err(TsaError::EmptySeries);
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for the `len`/`is_empty` pair.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The window `T[start .. start + len]`.
    pub fn window(&self, start: usize, len: usize) -> Result<TimeSeries<T>, TsaError> {
        if len == 0 {
            return Err(TsaError::ZeroWindow);
        }
        if start + len > self.len() {
            return Err(TsaError::WindowTooLong {
                window: start + len,
                len: self.len(),
            });
        }
        Ok(TimeSeries {
            samples: self.samples[start..start + len].to_vec(),
        })
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    QueryFiltering,
    SelfJoin,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::QueryFiltering => "query_filtering",
            Mode::SelfJoin => "self_join",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "query_filtering" => Ok(Mode::QueryFiltering),
            "self_join" => Ok(Mode::SelfJoin),
            other => Err(format!(
                "unknown mode `{other}` (expected query_filtering|self_join)"
            )),
        }
    }
}

/// Queries to compare against a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySet<T> {
    pub queries: Vec<TimeSeries<T>>,
    pub mode: Mode,
    /// Window start offsets when the queries were sliced from a series.
    pub offsets: Option<Vec<usize>>,
}

impl<T: Sample> QuerySet<T> {
    pub fn filtering(queries: Vec<TimeSeries<T>>) -> Self {
        Self {
            queries,
            mode: Mode::QueryFiltering,
            offsets: None,
        }
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }
}

/// Deterministic windows of `query_size` samples taken every `stride` samples.
///
/// Windows never wrap; the last window must end inside the series.
pub fn slice_queries<T: Sample>(
    series: &TimeSeries<T>,
    query_size: usize,
    num_queries: usize,
    stride: usize,
) -> Result<QuerySet<T>, TsaError> {
    if query_size == 0 {
        return Err(TsaError::ZeroWindow);
    }
    if stride == 0 {
        return Err(TsaError::ZeroStride);
    }
    if query_size > series.len() {
        return Err(TsaError::WindowTooLong {
            window: query_size,
            len: series.len(),
        });
    }
    let available = (series.len() - query_size) / stride + 1;
    if num_queries > available {
        return Err(TsaError::NotEnoughWindows {
            requested: num_queries,
            available,
        });
    }
    let offsets: Vec<usize> = (0..num_queries).map(|k| k * stride).collect();
    let queries = offsets
        .iter()
        .map(|&o| series.window(o, query_size))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QuerySet {
        queries,
        mode: Mode::QueryFiltering,
        offsets: Some(offsets),
    })
}

/// Number of windows of length `query_size` at `stride` that fit.
pub fn available_windows(len: usize, query_size: usize, stride: usize) -> usize {
    if query_size == 0 || stride == 0 || query_size > len {
        0
    } else {
        (len - query_size) / stride + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: i32) -> TimeSeries<i32> {
        TimeSeries::new((0..n).collect()).unwrap()
    }

    #[test]
    fn empty_series_rejected() {
        assert!(matches!(
            TimeSeries::<i32>::new(vec![]),
            Err(TsaError::EmptySeries)
        ));
    }

    #[test]
    fn strided_windows() {
        let qs = slice_queries(&ramp(10), 4, 4, 2).unwrap();
        assert_eq!(qs.offsets.as_deref(), Some(&[0, 2, 4, 6][..]));
        assert_eq!(qs.queries[3].samples(), &[6, 7, 8, 9]);
    }

    #[test]
    fn stride_equal_to_size_tiles() {
        let qs = slice_queries(&ramp(12), 4, 3, 4).unwrap();
        let flat: Vec<i32> = qs.queries.iter().flat_map(|q| q.samples().to_vec()).collect();
        assert_eq!(flat, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn too_many_queries() {
        assert!(matches!(
            slice_queries(&ramp(10), 4, 5, 2),
            Err(TsaError::NotEnoughWindows { requested: 5, available: 4 })
        ));
        assert!(matches!(
            slice_queries(&ramp(3), 4, 1, 1),
            Err(TsaError::WindowTooLong { .. })
        ));
    }
}
