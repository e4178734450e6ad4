//! Host-side subsequence DTW: the full-matrix reference, the four-vector
//! streaming form, and the query-filtering / self-join drivers.
//!
//! Index convention: the textbook recurrence uses 1-based loops `1..N`; here
//! rows run `0..N` and columns `0..M` with `N = |Q|`, `M = |R|`.

use num_traits::{Bounded, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::TsaError;
use crate::metric::{dist, DistanceMetric};
use crate::scalar::{Accumulator, Sample};
use crate::series::{QuerySet, TimeSeries};

/// Initialisation of row 0 for columns `j >= 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowZeroInit {
    /// `S[0, j] = 0` for `j >= 1`; only `S[0, 0]` carries a distance.
    #[default]
    Verbatim,
    /// Conventional open start: `S[0, j] = dist(Q[0], R[j])`.
    OpenStart,
}

impl std::str::FromStr for RowZeroInit {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "verbatim" => Ok(RowZeroInit::Verbatim),
            "open_start" | "open-start" => Ok(RowZeroInit::OpenStart),
            other => Err(format!("unknown row-zero init `{other}` (expected verbatim|open_start)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SdtwResult<A> {
    pub distance: A,
    pub anomaly: bool,
}

impl<A: Accumulator> SdtwResult<A> {
    pub fn classify(distance: A, threshold: Option<A>) -> Self {
        Self {
            distance,
            anomaly: threshold.is_some_and(|t| distance > t),
        }
    }
}

fn add<A: Accumulator>(a: A, b: A) -> Result<A, TsaError> {
    a.checked_accumulate(b).ok_or_else(|| TsaError::Saturation {
        what: format!("{a} + {b}"),
    })
}

fn min3<A: Accumulator>(a: A, b: A, c: A) -> A {
    a.min_of(b).min_of(c)
}

/// Materialises the whole `N x M` scoring matrix and returns the minimum of
/// its last row.
pub fn sdtw_full<T: Sample>(
    query: &[T],
    reference: &[T],
    metric: DistanceMetric,
    init: RowZeroInit,
) -> Result<T::Acc, TsaError> {
    Ok(*sdtw_matrix(query, reference, metric, init)?
        .last()
        .expect("non-empty matrix")
        .iter()
        .fold(None::<&T::Acc>, |m, v| match m {
            Some(m) if !(v < m) => Some(m),
            _ => Some(v),
        })
        .expect("non-empty row"))
}

/// The full scoring matrix, row-major.
pub fn sdtw_matrix<T: Sample>(
    query: &[T],
    reference: &[T],
    metric: DistanceMetric,
    init: RowZeroInit,
) -> Result<Vec<Vec<T::Acc>>, TsaError> {
    let (n, m) = (query.len(), reference.len());
    if n == 0 || m == 0 {
        return Err(TsaError::EmptySeries);
    }
    // S starts as zeros(N, M)
    let mut s = vec![vec![T::Acc::zero(); m]; n];
    // S[0,0] = dist(Q[0], R[0])
    s[0][0] = dist(query[0], reference[0], metric)?;
    if init == RowZeroInit::OpenStart {
        for j in 1..m {
            s[0][j] = dist(query[0], reference[j], metric)?;
        }
    }
    // first column is cumulative
    for i in 1..n {
        s[i][0] = add(s[i - 1][0], dist(query[i], reference[0], metric)?)?;
    }
    // row-major fill
    for i in 1..n {
        for j in 1..m {
            let best = min3(s[i - 1][j - 1], s[i][j - 1], s[i - 1][j]);
            s[i][j] = add(dist(query[i], reference[j], metric)?, best)?;
        }
    }
    Ok(s)
}

/// Working set of the streaming form: exactly four vectors of length `M`.
#[derive(Debug, Clone)]
pub struct StreamWorkspace<A> {
    cur: Vec<A>,
    diag: Vec<A>,
    up: Vec<A>,
    left: Vec<A>,
}

impl<A: Accumulator> StreamWorkspace<A> {
    pub fn new(m: usize) -> Self {
        Self {
            cur: vec![A::zero(); m],
            diag: vec![A::zero(); m],
            up: vec![A::zero(); m],
            left: vec![A::zero(); m],
        }
    }

    /// Lengths of the working vectors `[S_cur, S_diag, S_up, S_left]`.
    pub fn footprint(&self) -> [usize; 4] {
        [self.cur.len(), self.diag.len(), self.up.len(), self.left.len()]
    }

    /// Values of `S_cur` after the last processed row.
    pub fn current_row(&self) -> &[A] {
        &self.cur
    }

    fn resize(&mut self, m: usize) {
        for v in [&mut self.cur, &mut self.diag, &mut self.up, &mut self.left] {
            v.clear();
            v.resize(m, A::zero());
        }
    }
}

/// Row-by-row sDTW over four length-`M` vectors, mirroring the vector shifts
/// the crossbar performs. Returns the same value as [`sdtw_full`].
pub fn sdtw_stream<T: Sample>(
    query: &[T],
    reference: &[T],
    metric: DistanceMetric,
    init: RowZeroInit,
) -> Result<T::Acc, TsaError> {
    let mut ws = StreamWorkspace::new(reference.len());
    sdtw_stream_with(&mut ws, query, reference, metric, init)
}

/// As [`sdtw_stream`], reusing a caller-owned workspace.
pub fn sdtw_stream_with<T: Sample>(
    ws: &mut StreamWorkspace<T::Acc>,
    query: &[T],
    reference: &[T],
    metric: DistanceMetric,
    init: RowZeroInit,
) -> Result<T::Acc, TsaError> {
    let (n, m) = (query.len(), reference.len());
    if n == 0 || m == 0 {
        return Err(TsaError::EmptySeries);
    }
    ws.resize(m);
    let zero = T::Acc::zero();

    ws.cur[0] = dist(query[0], reference[0], metric)?;
    for j in 1..m {
        ws.cur[j] = match init {
            RowZeroInit::Verbatim => zero,
            RowZeroInit::OpenStart => dist(query[0], reference[j], metric)?,
        };
    }

    for &q in &query[1..] {
        // shift the finished row into the temporal vectors
        for j in 1..m {
            ws.diag[j] = ws.cur[j - 1];
        }
        ws.up.copy_from_slice(&ws.cur);
        // column 0: only the cell above exists
        ws.cur[0] = add(ws.up[0], dist(q, reference[0], metric)?)?;
        for j in 1..m {
            ws.left[j] = ws.cur[j - 1];
            let best = min3(ws.diag[j], ws.up[j], ws.left[j]);
            ws.cur[j] = add(dist(q, reference[j], metric)?, best)?;
        }
    }

    Ok(ws
        .cur
        .iter()
        .copied()
        .reduce(|a, b| a.min_of(b))
        .expect("m >= 1"))
}

/// One result per query; queries are independent and processed in parallel.
pub fn run_query_filtering<T: Sample>(
    reference: &TimeSeries<T>,
    queries: &QuerySet<T>,
    metric: DistanceMetric,
    init: RowZeroInit,
    threshold: Option<T::Acc>,
) -> Result<Vec<SdtwResult<T::Acc>>, TsaError> {
    queries
        .queries
        .par_iter()
        .map(|q| {
            let d = sdtw_stream(q.samples(), reference.samples(), metric, init)?;
            Ok(SdtwResult::classify(d, threshold))
        })
        .collect()
}

/// Self-join over all windows `T[i .. i + m]`.
///
/// The distance of window `i` is the minimum sDTW distance to any window `j`
/// with `|i - j| >= m`; closer windows overlap `i` and are trivial matches.
/// A window with no admissible partner gets the accumulator maximum.
pub fn run_self_join<T: Sample>(
    series: &TimeSeries<T>,
    m: usize,
    metric: DistanceMetric,
    init: RowZeroInit,
    threshold: Option<T::Acc>,
) -> Result<Vec<SdtwResult<T::Acc>>, TsaError> {
    if m == 0 {
        return Err(TsaError::ZeroWindow);
    }
    if m > series.len() {
        return Err(TsaError::WindowTooLong {
            window: m,
            len: series.len(),
        });
    }
    let windows = series.len() - m + 1;
    let t = series.samples();
    (0..windows)
        .into_par_iter()
        .map(|i| {
            let mut ws = StreamWorkspace::new(m);
            let mut best = T::Acc::max_value();
            for j in self_join_partners(i, windows, m) {
                let d = sdtw_stream_with(&mut ws, &t[i..i + m], &t[j..j + m], metric, init)?;
                best = best.min_of(d);
            }
            Ok(SdtwResult::classify(best, threshold))
        })
        .collect()
}

/// Windows outside the exclusion zone of window `i`.
pub fn self_join_partners(i: usize, windows: usize, m: usize) -> impl Iterator<Item = usize> {
    (0..windows).filter(move |&j| i.abs_diff(j) >= m)
}
