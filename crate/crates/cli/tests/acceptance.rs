//! Acceptance criteria 1-10. Each test writes one `criterion N: PASS|FAIL`
//! line straight to stdout (so it shows without `--nocapture`) and then
//! asserts the same verdict.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pumdtw::cost::{self, CostLedger, DeviceConfig, TechParams, TEN_YEARS_S};
use pumdtw::crossbar::{ColumnBits, Crossbar, Slice};
use pumdtw::dse::{self, Engine, ExecOptions, WorkloadSpec};
use pumdtw::mapper;
use pumdtw::sdtw::{self, StreamWorkspace};
use pumdtw::wavefront;
use pumdtw::{DType, DistanceMetric, RowZeroInit, Sample};

// pinned tolerances and budgets
const C1_CASES: usize = 1000;
const C1_BUDGET: Duration = Duration::from_secs(300);
const C2_RANDOM_CASES: usize = 100_000;
const C2_BUDGET: Duration = Duration::from_secs(60);
const C3_CASES: usize = 10_000;
const C4_REL_TOL: f64 = 0.05;
const C4_COLUMNS: [usize; 3] = [32 << 10, 64 << 10, 128 << 10];
const C5_MIN_R2: f64 = 0.99;
// the embedded device scaled down with the workloads (128 / 64)
const C5_CROSSBARS: usize = 2;
const C5_UNSCALED_CROSSBARS: usize = 128;
const C7_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
// shares are fractions; the tolerance is one percentage point
const C7_ABS_TOL: f64 = 0.01;
const C8_TARGET: f64 = 4e9;
const C8_DECADES: f64 = 1.0;
const C8_CELL_NS: f64 = 5.0;
const C8_CROSSBARS: usize = 128;
const PUBLISHED_RD_X10: f64 = 4.7;
const PUBLISHED_WR_X10: f64 = 6.5;
const PUBLISHED_WRITE_OVER_READ: f64 = 1.19;

fn verdict(n: u32, pass: bool, detail: String) {
    let line = format!("criterion {n}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {n} failed: {detail}");
}

fn uniform<T: Sample>(rng: &mut ChaCha8Rng, len: usize, bound: i64) -> Vec<T> {
    (0..len)
        .map(|_| <T as num_traits::NumCast>::from(rng.gen_range(-bound..=bound)).unwrap())
        .collect()
}

/// One randomized wavefront-vs-oracle case; returns mismatches.
fn c1_case<T: Sample>(rng: &mut ChaCha8Rng, metric: DistanceMetric, bound: i64) -> usize {
    let m = rng.gen_range(1..=256);
    let n = rng.gen_range(1..=64);
    let nq = rng.gen_range(1..=4);
    let init = if rng.gen_bool(0.5) { RowZeroInit::Verbatim } else { RowZeroInit::OpenStart };
    // half the cases replicate the reference, half split it into batches
    let columns = if rng.gen_bool(0.5) {
        rng.gen_range(m..=3 * m)
    } else {
        rng.gen_range(1.max(m / 5)..=m)
    };
    let reference: Vec<T> = uniform(rng, m, bound);
    let queries: Vec<Vec<T>> = (0..nq).map(|_| uniform(rng, n, bound)).collect();
    let refs: Vec<&[T]> = queries.iter().map(Vec::as_slice).collect();
    let plan = mapper::plan(columns, m, nq).unwrap();
    let out = wavefront::run_batch(&reference, &refs, &plan, metric, init, None, false).unwrap();
    queries
        .iter()
        .zip(&out.results)
        .filter(|(q, r)| {
            let want = sdtw::sdtw_full(q, &reference, metric, init).unwrap();
            want.to_i64().unwrap() != r.distance
        })
        .count()
}

#[test]
fn criterion_01_wavefront_matches_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc1);
    let mut mismatches = 0;
    for case in 0..C1_CASES {
        let metric = if case % 2 == 0 { DistanceMetric::AbsDiff } else { DistanceMetric::SquareDiff };
        let int16 = (case / 2) % 2 == 0;
        // input ranges keep every score inside the accumulator
        mismatches += match (int16, metric) {
            (true, DistanceMetric::AbsDiff) => c1_case::<i16>(&mut rng, metric, i16::MAX as i64),
            (true, DistanceMetric::SquareDiff) => c1_case::<i16>(&mut rng, metric, 1 << 10),
            (false, DistanceMetric::AbsDiff) => c1_case::<i32>(&mut rng, metric, 1 << 20),
            (false, DistanceMetric::SquareDiff) => c1_case::<i32>(&mut rng, metric, 1 << 10),
        };
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        mismatches == 0 && elapsed < C1_BUDGET,
        format!("{C1_CASES} cases, {mismatches} mismatches, {:.1}s (budget {}s)", elapsed.as_secs_f64(), C1_BUDGET.as_secs()),
    );
}

const DISCARD: usize = 250;
const OVF: usize = 251;

/// Loads `inputs` into consecutive width-`w` slices, runs `op`, returns the
/// word in `read` and the overflow flag per column.
fn bitserial(
    w: usize,
    inputs: &[&[i64]],
    read: Slice,
    op: impl FnOnce(&mut Crossbar, &[Slice], &ColumnBits, &mut CostLedger),
) -> Vec<(i64, bool)> {
    let n = inputs[0].len();
    let mut x = Crossbar::with_flag_rows(n, DISCARD, OVF);
    let mask = x.full_mask();
    let mut l = CostLedger::default();
    let slices: Vec<Slice> = (0..inputs.len()).map(|k| Slice::new(k * w, w)).collect();
    for (s, v) in slices.iter().zip(inputs) {
        x.load_words(*s, v, &mask, &mut l);
    }
    op(&mut x, &slices, &mask, &mut l);
    (0..n).map(|c| (x.peek_word(read, c), x.cell(OVF, c))).collect()
}

fn wrap(v: i64, w: usize) -> i64 {
    let shift = 64 - w;
    (v << shift) >> shift
}

fn fits(v: i64, w: usize) -> bool {
    wrap(v, w) == v
}

/// add, sub, abs and min3 against i64 semantics; returns mismatches.
fn check_ops(w: usize, a: &[i64], b: &[i64], c: &[i64]) -> usize {
    let mut bad = 0;
    let out = Slice::new(3 * w, w);
    let r = bitserial(w, &[a, b, c], out, |x, s, m, l| x.add(s[0], s[1], out, m, l).unwrap());
    bad += (0..a.len()).filter(|&i| r[i] != (wrap(a[i] + b[i], w), !fits(a[i] + b[i], w))).count();
    let r = bitserial(w, &[a, b, c], out, |x, s, m, l| x.sub(s[0], s[1], out, m, l).unwrap());
    bad += (0..a.len()).filter(|&i| r[i] != (wrap(a[i] - b[i], w), !fits(a[i] - b[i], w))).count();
    let r = bitserial(w, &[a, b, c], Slice::new(0, w), |x, s, m, l| x.abs(s[0], s[0], m, l).unwrap());
    let min = -(1i64 << (w - 1));
    bad += (0..a.len())
        .filter(|&i| a[i] != min && r[i] != (a[i].abs(), false))
        .count();
    let r = bitserial(w, &[a, b, c], out, |x, s, m, l| x.min3(s[0], s[1], s[2], out, m, l).unwrap());
    bad += (0..a.len()).filter(|&i| r[i].0 != a[i].min(b[i]).min(c[i])).count();
    bad
}

/// abs then square at width `w` for every value of `a`; returns mismatches.
fn check_square(w: usize, a: &[i64]) -> usize {
    let out = Slice::new(w, w);
    let r = bitserial(w, &[a], out, |x, s, m, l| {
        x.abs(s[0], s[0], m, l).unwrap();
        x.square(s[0], out, m, l).unwrap();
    });
    (0..a.len()).filter(|&i| r[i] != (a[i] * a[i], false)).count()
}

#[test]
fn criterion_02_bit_serial_arithmetic() {
    let start = Instant::now();
    let mut bad = 0;
    let mut cases = 0;
    // exhaustive width 8: one crossbar per value of `a`, `b` sweeps the columns
    let all: Vec<i64> = (-128..128).collect();
    for a in -128..128i64 {
        let av = vec![a; 256];
        let cv: Vec<i64> = all.iter().map(|v| (v * 37 + a) % 128).collect();
        bad += check_ops(8, &av, &all, &cv);
        cases += 256;
    }
    let sq: Vec<i64> = (-255..=255).collect();
    bad += check_square(32, &sq);
    cases += sq.len();
    // random widths 16 and 32
    let mut rng = ChaCha8Rng::seed_from_u64(0xc2);
    for w in [16usize, 32] {
        let hi = (1i64 << (w - 1)) - 1;
        let sq_hi = ((hi as f64).sqrt()) as i64;
        let mut done = 0;
        while done < C2_RANDOM_CASES {
            let gen = |rng: &mut ChaCha8Rng, lo: i64, hi: i64| -> Vec<i64> { (0..256).map(|_| rng.gen_range(lo..=hi)).collect() };
            let (a, b, c) = (gen(&mut rng, -hi - 1, hi), gen(&mut rng, -hi - 1, hi), gen(&mut rng, -hi - 1, hi));
            bad += check_ops(w, &a, &b, &c);
            bad += check_square(w, &gen(&mut rng, -sq_hi, sq_hi));
            done += 256;
        }
        cases += done;
    }
    let elapsed = start.elapsed();
    verdict(
        2,
        bad == 0 && elapsed < C2_BUDGET,
        format!("{cases} operand sets, {bad} mismatches, {:.1}s (budget {}s)", elapsed.as_secs_f64(), C2_BUDGET.as_secs()),
    );
}

#[test]
fn criterion_03_streaming_footprint() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc3);
    let mut bad = 0;
    let mut footprint_ok = true;
    for case in 0..C3_CASES {
        let m = rng.gen_range(1..=96);
        let n = rng.gen_range(1..=32);
        let metric = if case % 2 == 0 { DistanceMetric::AbsDiff } else { DistanceMetric::SquareDiff };
        let init = if case % 4 < 2 { RowZeroInit::Verbatim } else { RowZeroInit::OpenStart };
        let r: Vec<i32> = uniform(&mut rng, m, 1000);
        let q: Vec<i32> = uniform(&mut rng, n, 1000);
        let mut ws = StreamWorkspace::new(m);
        let got = sdtw::sdtw_stream_with(&mut ws, &q, &r, metric, init).unwrap();
        footprint_ok &= ws.footprint() == [m; 4];
        if got != sdtw::sdtw_full(&q, &r, metric, init).unwrap() {
            bad += 1;
        }
    }
    verdict(
        3,
        bad == 0 && footprint_ok,
        format!("{C3_CASES} cases, {bad} mismatches, four length-M vectors: {footprint_ok}"),
    );
}

fn model_opts(seed: u64) -> ExecOptions {
    ExecOptions {
        metric: DistanceMetric::AbsDiff,
        dtype: DType::Int32,
        init: RowZeroInit::Verbatim,
        seed,
        engine: Engine::Model,
    }
}

fn modeled_time(w: &WorkloadSpec, crossbars: usize, tech: &TechParams) -> f64 {
    let l = dse::workload_ledger(w, &DeviceConfig::new(crossbars).unwrap(), &model_opts(0)).unwrap();
    cost::total_time(&l.ledger, tech)
}

#[test]
fn criterion_04_column_scaling() {
    let w = WorkloadSpec::new(2048, 128, 2048);
    let tech = TechParams::baseline();
    let mut ratios = Vec::new();
    for c in C4_COLUMNS {
        let t1 = modeled_time(&w, c / 256, &tech);
        let t2 = modeled_time(&w, 2 * c / 256, &tech);
        ratios.push((c, t2 / t1));
    }
    let pass = ratios.iter().all(|&(_, r)| (r / 0.5 - 1.0).abs() <= C4_REL_TOL);
    let detail: Vec<String> = ratios.iter().map(|(c, r)| format!("t({}K)/t({}K)={r:.4}", 2 * c / 1024, c / 1024)).collect();
    verdict(4, pass, format!("{} (target 0.5 +/- {:.0}%)", detail.join(", "), C4_REL_TOL * 100.0));
}

#[test]
fn scaling_approaches_half_when_queries_dominate() {
    // not a criterion: the same ratio once the query stream dwarfs the fill
    let w = WorkloadSpec::new(2048, 128, 2048 * 64);
    let tech = TechParams::baseline();
    for c in C4_COLUMNS {
        let r = modeled_time(&w, 2 * c / 256, &tech) / modeled_time(&w, c / 256, &tech);
        assert!((r / 0.5 - 1.0).abs() <= C4_REL_TOL, "{c}: {r}");
    }
}

#[test]
fn criterion_05_workload_proportionality() {
    let tech = TechParams::baseline();
    let grid = WorkloadSpec::scaled_grid();
    let xs: Vec<f64> = grid.iter().map(|w| (w.ref_size * w.query_size * w.num_queries) as f64).collect();
    let fit = |crossbars: usize| {
        let ys: Vec<f64> = grid.iter().map(|w| modeled_time(w, crossbars, &tech)).collect();
        dse::fit_through_origin(&xs, &ys)
    };
    let (k, r2) = fit(C5_CROSSBARS);
    let (_, r2_unscaled) = fit(C5_UNSCALED_CROSSBARS);
    verdict(
        5,
        r2 >= C5_MIN_R2,
        format!(
            "{} scaled workloads on {C5_CROSSBARS} crossbars, k={k:.4e} ns, R^2={r2:.5} (min {C5_MIN_R2}); on {C5_UNSCALED_CROSSBARS} crossbars R^2={r2_unscaled:.5}",
            grid.len()
        ),
    );
}

fn simulated_ledger(w: &WorkloadSpec, crossbars: usize, metric: DistanceMetric, seed: u64) -> CostLedger {
    let opts = ExecOptions {
        metric,
        engine: Engine::Simulate,
        ..model_opts(seed)
    };
    dse::workload_ledger(w, &DeviceConfig::new(crossbars).unwrap(), &opts).unwrap().ledger
}

fn small_ledger(metric: DistanceMetric) -> CostLedger {
    simulated_ledger(&WorkloadSpec::new(512, 64, 32), 1, metric, 1)
}

#[test]
fn criterion_06_latency_sensitivity() {
    let tech = TechParams::baseline();
    let mut pass = true;
    let mut detail = Vec::new();
    for metric in [DistanceMetric::AbsDiff, DistanceMetric::SquareDiff] {
        let s = cost::sensitivity_report(&small_ledger(metric), &tech, &[]);
        pass &= s.slowdown_wr_x10 > s.slowdown_rd_x10;
        detail.push(format!("{metric}: rd x10 -> {:.3}x, wr x10 -> {:.3}x", s.slowdown_rd_x10, s.slowdown_wr_x10));
    }
    verdict(
        6,
        pass,
        format!("{} (published: {PUBLISHED_RD_X10}x / {PUBLISHED_WR_X10}x)", detail.join("; ")),
    );
}

#[test]
fn criterion_07_energy_split() {
    let w = WorkloadSpec::new(1024, 64, 128);
    let tech = TechParams::baseline();
    let mut pass = true;
    let mut detail = Vec::new();
    for metric in [DistanceMetric::AbsDiff, DistanceMetric::SquareDiff] {
        let shares: Vec<(f64, f64, f64)> = C7_SEEDS
            .iter()
            .map(|&s| {
                let r = cost::sensitivity_report(&simulated_ledger(&w, 4, metric, s), &tech, &[]);
                (r.read_energy_share, r.write_energy_share, r.write_over_read_energy)
            })
            .collect();
        let n = shares.len() as f64;
        let mean_r = shares.iter().map(|s| s.0).sum::<f64>() / n;
        let mean_w = shares.iter().map(|s| s.1).sum::<f64>() / n;
        let spread = shares
            .iter()
            .map(|s| (s.0 - mean_r).abs().max((s.1 - mean_w).abs()))
            .fold(0.0, f64::max);
        pass &= spread <= C7_ABS_TOL && (mean_r + mean_w - 1.0).abs() < 1e-12;
        detail.push(format!(
            "{metric}: read {mean_r:.4} / write {mean_w:.4}, write/read {:.3}, max seed deviation {:.2} points",
            shares[0].2,
            spread * 100.0
        ));
    }
    verdict(
        7,
        pass,
        format!("{} (published write/read: {PUBLISHED_WRITE_OVER_READ})", detail.join("; ")),
    );
}

#[test]
fn criterion_08_endurance() {
    let w = WorkloadSpec::new(2048, 128, 2048);
    let device = DeviceConfig::new(C8_CROSSBARS).unwrap();
    let tech = TechParams::new("5ns", C8_CELL_NS, C8_CELL_NS, 50.0, 70.0).unwrap();
    let l = dse::workload_ledger(&w, &device, &model_opts(0)).unwrap().ledger;
    let e = cost::endurance_estimate(&l, cost::total_time(&l, &tech), TEN_YEARS_S, &device).unwrap();
    let decades = (e.mean_writes_per_cell / C8_TARGET).log10();
    verdict(
        8,
        decades.abs() <= C8_DECADES,
        format!(
            "10-year mean {:.3e} writes/cell (max {:.3e}), target {C8_TARGET:.0e} within {C8_DECADES} decade(s), off by {decades:+.2} decades",
            e.mean_writes_per_cell, e.max_writes_per_cell
        ),
    );
}

#[test]
fn criterion_09_cost_linearity() {
    let l = small_ledger(DistanceMetric::SquareDiff);
    let base = TechParams::baseline();
    let axis = |set: fn(&mut TechParams, f64), f: fn(&CostLedger, &TechParams) -> f64| -> bool {
        let pts = [1.0, 3.0, 20.0];
        let v: Vec<f64> = pts
            .iter()
            .map(|&x| {
                let mut t = base.clone();
                set(&mut t, x);
                f(&l, &t)
            })
            .collect();
        let slope = (v[1] - v[0]) / (pts[1] - pts[0]);
        v[0] + slope * (pts[2] - pts[0]) == v[2] && v[0] - slope * pts[0] + slope * pts[2] == v[2]
    };
    let checks = [
        ("rd_lat", axis(|t, x| t.rd_lat = x, cost::total_time)),
        ("wr_lat", axis(|t, x| t.wr_lat = x, cost::total_time)),
        ("rd_energy", axis(|t, x| t.rd_energy = x, cost::total_energy)),
        ("wr_energy", axis(|t, x| t.wr_energy = x, cost::total_energy)),
        // the other quantity does not move along an unrelated axis
        ("time vs energy", {
            let mut t = base.clone();
            t.rd_energy *= 3.0;
            t.wr_energy *= 3.0;
            cost::total_time(&l, &t) == cost::total_time(&l, &base)
        }),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    verdict(
        9,
        failed.is_empty(),
        format!("exact reconstruction on rd_lat, wr_lat, rd_energy, wr_energy; failed: {failed:?}"),
    );
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, args: &[&str]| -> Vec<u8> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_pumdtw"))
            .args(args)
            .arg("--out")
            .arg(&out)
            .env_remove("PUMDTW_PRESET_DIR")
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let sweep = [
        "sweep", "--workloads", "scaled", "--tech-grid", "full", "--crossbars", "128,256", "--seed", "11",
    ];
    let single = [
        "run", "--ref-size", "600", "--query-size", "48", "--num-queries", "12", "--crossbars", "2", "--seed", "11",
        "--metric", "square_diff", "--dtype", "int16",
    ];
    let (a, b) = (run("a.csv", &sweep), run("b.csv", &sweep));
    let (c, d) = (run("c.csv", &single), run("d.csv", &single));
    let rows = a.iter().filter(|&&x| x == b'\n').count() - 1;
    verdict(
        10,
        a == b && c == d && rows == 64 * 2 * 225,
        format!("sweep {rows} rows byte-identical: {}, single run byte-identical: {}", a == b, c == d),
    );
}
