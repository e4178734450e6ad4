use pumdtw::cost::CostLedger;
use pumdtw::crossbar::{ColumnLayout, Crossbar};
use pumdtw::mapper;
use pumdtw::sdtw;
use pumdtw::wavefront::{self, WavefrontConfig, WavefrontError, WorkloadShape};
use pumdtw::{DType, DistanceMetric, RowZeroInit};
use proptest::prelude::*;

fn check<T: pumdtw::Sample + Into<i64>>(
    r: &[T],
    qs: &[Vec<T>],
    columns: usize,
    metric: DistanceMetric,
    init: RowZeroInit,
) -> Result<(), TestCaseError> {
    let refs: Vec<&[T]> = qs.iter().map(Vec::as_slice).collect();
    let plan = mapper::plan(columns, r.len(), qs.len()).unwrap();
    let out = wavefront::run_batch(r, &refs, &plan, metric, init, None, false).unwrap();
    prop_assert_eq!(out.results.len(), qs.len());
    for (q, got) in qs.iter().zip(&out.results) {
        let want = sdtw::sdtw_full(q, r, metric, init).unwrap();
        prop_assert_eq!(num_traits::ToPrimitive::to_i64(&want).unwrap(), got.distance);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wavefront_equals_oracle_i16(
        r in prop::collection::vec(-2000i16..2000, 1..80),
        qs in prop::collection::vec(prop::collection::vec(-2000i16..2000, 1..20), 1..4),
        cols in 1usize..200,
        square in any::<bool>(),
        open in any::<bool>(),
    ) {
        let metric = if square { DistanceMetric::SquareDiff } else { DistanceMetric::AbsDiff };
        let init = if open { RowZeroInit::OpenStart } else { RowZeroInit::Verbatim };
        check(&r, &qs, cols, metric, init)?;
    }

    #[test]
    fn wavefront_equals_oracle_i8(
        r in prop::collection::vec(-20i8..20, 1..40),
        qs in prop::collection::vec(prop::collection::vec(-20i8..20, 1..10), 1..3),
        cols in 1usize..100,
    ) {
        check(&r, &qs, cols, DistanceMetric::SquareDiff, RowZeroInit::Verbatim)?;
    }
}

#[test]
fn overflow_is_reported_not_wrapped() {
    let r = vec![i16::MAX; 16];
    let q = vec![i16::MIN; 8];
    let plan = mapper::plan(16, 16, 1).unwrap();
    let err = wavefront::run_batch(&r, &[&q], &plan, DistanceMetric::SquareDiff, RowZeroInit::Verbatim, None, false)
        .unwrap_err();
    assert!(matches!(err, WavefrontError::Overflow { .. }));
}

#[test]
fn ledger_phases_match_closed_form() {
    let cfg = WavefrontConfig::new(DType::Int32, DistanceMetric::AbsDiff, RowZeroInit::Verbatim).unwrap();
    let r: Vec<i32> = (0..100).map(|i| (i * 13 % 29) - 14).collect();
    let qs: Vec<Vec<i32>> = (0..5).map(|k| (0..12).map(|i| (i * k % 17) - 8).collect()).collect();
    let refs: Vec<&[i32]> = qs.iter().map(Vec::as_slice).collect();
    for cols in [30, 100, 250] {
        let plan = mapper::plan(cols, r.len(), qs.len()).unwrap();
        let sim = wavefront::run_batch(&r, &refs, &plan, cfg.metric, cfg.init, None, false).unwrap().ledger;
        let shape = WorkloadShape { ref_len: 100, query_len: 12, num_queries: 5 };
        let model = wavefront::model_ledger(shape, &plan, &cfg, 0.5);
        assert_eq!((sim.read_phases, sim.write_phases), (model.read_phases, model.write_phases));
        assert_eq!(sim.read_bits, model.read_bits);
    }
}

#[test]
fn diagonal_copy_crosses_subarrays() {
    let layout = ColumnLayout::for_data_width(16).unwrap();
    let mut xb = Crossbar::new(300, &layout);
    let mask = xb.full_mask();
    let mut l = CostLedger::default();
    let vals: Vec<i64> = (0..300).map(|i| i * 3 - 400).collect();
    xb.load_words(layout.s_cur, &vals, &mask, &mut l);
    for k in 0..layout.s_cur.width {
        xb.diagonal_row_copy(layout.s_cur.row(k), layout.s_left.row(k), false, &mask, &mut l).unwrap();
    }
    for c in 1..300 {
        assert_eq!(xb.peek_word(layout.s_left, c), vals[c - 1]);
    }
    assert_eq!(xb.peek_word(layout.s_left, 0), 0);
}
