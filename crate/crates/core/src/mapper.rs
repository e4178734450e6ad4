//! Placement of the reference and the queries on compute columns.
//!
//! With at least as many columns as reference samples the reference is
//! replicated `floor(C / M)` times and queries are dealt round-robin to the
//! replicas. With fewer columns the reference is cut into `ceil(M / C)`
//! batches that run one after the other on the same columns; the scores of a
//! batch's last column feed the next batch's column 0.

use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::crossbar::{ColumnBits, ColumnLayout, CostSink, Crossbar, COLS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("need at least one compute column")]
    NoColumns,
    #[error("reference is empty")]
    EmptyReference,
    #[error("boundary for batch {batch} is missing")]
    MissingBoundary { batch: usize },
    #[error("boundary stream has {got} entries, expected {expected}")]
    BoundaryLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MappingPlan {
    pub total_columns: usize,
    pub ref_len: usize,
    pub replication: usize,
    pub batches: usize,
    /// Query ids per replica, in injection order.
    pub assignments: Vec<Vec<usize>>,
}

/// Plans placement of a length-`ref_len` reference and `num_queries` queries.
pub fn plan(total_columns: usize, ref_len: usize, num_queries: usize) -> Result<MappingPlan, MapError> {
    if total_columns == 0 {
        return Err(MapError::NoColumns);
    }
    if ref_len == 0 {
        return Err(MapError::EmptyReference);
    }
    let (replication, batches) = if total_columns >= ref_len {
        (total_columns / ref_len, 1)
    } else {
        (1, ref_len.div_ceil(total_columns))
    };
    let mut assignments = vec![Vec::new(); replication];
    for q in 0..num_queries {
        assignments[q % replication].push(q);
    }
    Ok(MappingPlan {
        total_columns,
        ref_len,
        replication,
        batches,
        assignments,
    })
}

impl MappingPlan {
    /// Columns each replica's crossbar needs.
    pub fn replica_columns(&self) -> usize {
        self.ref_len.min(self.total_columns)
    }

    /// Reference indices held by batch `b`.
    pub fn batch_range(&self, b: usize) -> Range<usize> {
        let c = self.replica_columns();
        let start = b * c;
        start..(start + c).min(self.ref_len)
    }

    pub fn queries_per_replica(&self) -> Vec<usize> {
        self.assignments.iter().map(Vec::len).collect()
    }

    /// Plan summary for reports.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "columns": self.total_columns,
            "replication": self.replication,
            "batches": self.batches,
            "queries_per_replica": self.queries_per_replica(),
        })
    }
}

/// Writes batch `b` of the reference into the R slice of `xb` and resets the
/// first-row flags so every column starts as a pipeline bubble.
pub fn load_reference(
    plan: &MappingPlan,
    reference: &[i64],
    batch: usize,
    layout: &ColumnLayout,
    xb: &mut Crossbar,
    sink: &mut dyn CostSink,
) -> ColumnBits {
    let range = plan.batch_range(batch);
    let width = range.len();
    let mask = ColumnBits::first(xb.columns(), width);
    xb.load_words(layout.r, &reference[range], &mask, sink);
    xb.fill_slice(crate::crossbar::Slice::new(layout.first_row, 1), true, &mask, sink);
    mask
}

/// Scores of one batch's last column for every element of the query stream,
/// in stream order. Entry `e` is `S[i, last]` where stream element `e` is
/// query row `i`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BatchBoundary {
    pub scores: Vec<i64>,
}

impl BatchBoundary {
    /// Values the next batch injects at column 0 while preparing iteration
    /// `t + 1`: `(S_left, S_diag) = (scores[t + 1], scores[t])`. Past the end
    /// of the stream the columns hold bubbles and the value is irrelevant.
    pub fn injection(&self, t: usize) -> (i64, i64) {
        let get = |e: usize| self.scores.get(e).copied().unwrap_or(0);
        (get(t + 1), get(t))
    }
}

/// Checks the boundary produced by batch `b` before batch `b + 1` consumes it.
pub fn carry_boundary(
    plan: &MappingPlan,
    batch: usize,
    boundary: Option<&BatchBoundary>,
    stream_len: usize,
) -> Result<Option<BatchBoundary>, MapError> {
    if plan.batches == 1 || stream_len == 0 {
        return Ok(None);
    }
    let b = boundary.ok_or(MapError::MissingBoundary { batch })?;
    if b.scores.len() != stream_len {
        return Err(MapError::BoundaryLength {
            expected: stream_len,
            got: b.scores.len(),
        });
    }
    Ok(Some(b.clone()))
}

/// Subarrays a replica occupies.
pub fn replica_subarrays(plan: &MappingPlan) -> usize {
    plan.replica_columns().div_ceil(COLS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostLedger;
    use proptest::prelude::*;

    #[test]
    fn replication_and_batching() {
        let p = plan(1024, 256, 10).unwrap();
        assert_eq!((p.replication, p.batches), (4, 1));
        assert_eq!(p.queries_per_replica(), vec![3, 3, 2, 2]);
        let p = plan(256, 1024, 3).unwrap();
        assert_eq!((p.replication, p.batches), (1, 4));
        assert_eq!(p.batch_range(3), 768..1024);
        let p = plan(300, 300, 0).unwrap();
        assert_eq!((p.replication, p.batches), (1, 1));
        let p = plan(100, 250, 1).unwrap();
        assert_eq!(p.batch_range(2), 200..250);
        assert_eq!(plan(0, 1, 1), Err(MapError::NoColumns));
        assert_eq!(plan(1, 0, 1), Err(MapError::EmptyReference));
    }

    #[test]
    fn summary() {
        let p = plan(1024, 256, 10).unwrap();
        let j = p.summary_json();
        assert_eq!(j["replication"], 4);
        assert_eq!(j["queries_per_replica"][0], 3);
    }

    #[test]
    fn reference_readback() {
        let layout = ColumnLayout::for_data_width(16).unwrap();
        let r: Vec<i64> = (0..40).map(|i| i * 37 - 700).collect();
        let p = plan(16, 40, 1).unwrap();
        let mut xb = Crossbar::new(16, &layout);
        let mut l = CostLedger::default();
        load_reference(&p, &r, 1, &layout, &mut xb, &mut l);
        for c in 0..16 {
            assert_eq!(xb.peek_word(layout.r, c), r[16 + c]);
            assert!(xb.cell(layout.first_row, c));
        }
        let mask = load_reference(&p, &r, 2, &layout, &mut xb, &mut l);
        assert_eq!(mask.count(), 8);
        assert_eq!(xb.peek_word(layout.r, 7), r[39]);
        // replicas hold identical columns
        let p = plan(100, 30, 1).unwrap();
        let mut a = Crossbar::new(30, &layout);
        let mut b = Crossbar::new(30, &layout);
        load_reference(&p, &r[..30], 0, &layout, &mut a, &mut l);
        load_reference(&p, &r[..30], 0, &layout, &mut b, &mut l);
        assert_eq!(a.cell_digest(), b.cell_digest());
    }

    #[test]
    fn boundary_checks() {
        let single = plan(64, 64, 2).unwrap();
        assert_eq!(carry_boundary(&single, 0, None, 10), Ok(None));
        let split = plan(32, 64, 2).unwrap();
        assert_eq!(carry_boundary(&split, 0, None, 0), Ok(None));
        assert_eq!(
            carry_boundary(&split, 0, None, 10),
            Err(MapError::MissingBoundary { batch: 0 })
        );
        let b = BatchBoundary { scores: vec![1, 2, 3] };
        assert!(carry_boundary(&split, 0, Some(&b), 4).is_err());
        assert_eq!(b.injection(0), (2, 1));
        assert_eq!(b.injection(2), (0, 3));
    }

    proptest! {
        #[test]
        fn plan_invariants(c in 1usize..5000, m in 1usize..5000, q in 0usize..200) {
            let p = plan(c, m, q).unwrap();
            prop_assert!(p.replication >= 1 && p.batches >= 1);
            prop_assert!(p.replication == 1 || p.batches == 1);
            prop_assert!(p.replication * m <= c || p.batches > 1);
            prop_assert!(p.batches * c >= m);
            let counts = p.queries_per_replica();
            prop_assert_eq!(counts.iter().sum::<usize>(), q);
            let lo = *counts.iter().min().unwrap();
            let hi = *counts.iter().max().unwrap();
            prop_assert!(hi - lo <= 1);
        }
    }
}
