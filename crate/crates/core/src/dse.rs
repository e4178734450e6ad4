//! Workloads, single runs, sweeps and the CSV report.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cost::{self, CostError, CostLedger, DeviceConfig, SensitivityReport, TechParams};
use crate::io::{self, SeriesFormat};
use crate::mapper::{self, MapError, MappingPlan};
use crate::metric::DistanceMetric;
use crate::scalar::{DType, Sample};
use crate::sdtw::{self, RowZeroInit, SdtwResult};
use crate::series::{slice_queries, Mode, TimeSeries};
use crate::wavefront::{self, TraceRecord, WavefrontConfig, WavefrontError, WorkloadShape};
use crate::TsaError;

/// Failure classes, each with its process exit code.
#[derive(Debug, Error)]
pub enum DseError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("crossbar result differs from the reference for query {query}: expected {expected}, got {got}")]
    Mismatch {
        query: usize,
        expected: String,
        got: String,
    },
    #[error("{0}")]
    Overflow(String),
}

impl DseError {
    pub fn exit_code(&self) -> i32 {
        match self {
            DseError::Usage(_) => 1,
            DseError::Io(_) => 2,
            DseError::Mismatch { .. } => 3,
            DseError::Overflow(_) => 4,
        }
    }
}

impl From<TsaError> for DseError {
    fn from(e: TsaError) -> Self {
        match e {
            TsaError::Saturation { .. } => DseError::Overflow(e.to_string()),
            TsaError::Io(_) | TsaError::Parse { .. } | TsaError::OutOfRange { .. } | TsaError::BadBinary(_) => {
                DseError::Io(e.to_string())
            }
            other => DseError::Usage(other.to_string()),
        }
    }
}

impl From<WavefrontError> for DseError {
    fn from(e: WavefrontError) -> Self {
        match e {
            WavefrontError::Overflow { .. } | WavefrontError::SampleRange(_) => DseError::Overflow(e.to_string()),
            other => DseError::Usage(other.to_string()),
        }
    }
}

impl From<CostError> for DseError {
    fn from(e: CostError) -> Self {
        DseError::Usage(e.to_string())
    }
}

impl From<MapError> for DseError {
    fn from(e: MapError) -> Self {
        DseError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for DseError {
    fn from(e: std::io::Error) -> Self {
        DseError::Io(e.to_string())
    }
}

/// Bounded integer random walk: steps uniform in `[-max_step, max_step]`,
/// reflected back inside `[-bound, bound]`.
pub fn random_walk(len: usize, seed: u64, max_step: i64, bound: i64) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0i64;
    (0..len)
        .map(|_| {
            x += rng.gen_range(-max_step..=max_step);
            if x > bound {
                x = 2 * bound - x;
            } else if x < -bound {
                x = -2 * bound - x;
            }
            x = x.clamp(-bound, bound);
            x
        })
        .collect()
}

/// Walk parameters `(max_step, bound)` per dtype. The bound keeps squared
/// scores inside the accumulator; the step lets the walk cross its range
/// within a few hundred samples.
pub fn walk_params(dtype: DType) -> (i64, i64) {
    match dtype {
        DType::Int8 => (4, 60),
        _ => (16, 256),
    }
}

fn cast_all<T: Sample>(xs: &[i64]) -> Vec<T> {
    xs.iter()
        .map(|&x| <T as num_traits::NumCast>::from(x).expect("walk stays in range"))
        .collect()
}

/// A workload of the characterization grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorkloadSpec {
    pub id: String,
    pub ref_size: usize,
    pub query_size: usize,
    pub num_queries: usize,
    /// Desk-scale twin of a full-size workload.
    pub scaled: bool,
}

pub const GRID_REF: [usize; 4] = [64 << 10, 128 << 10, 256 << 10, 512 << 10];
pub const GRID_QUERY: [usize; 4] = [4 << 10, 8 << 10, 16 << 10, 32 << 10];
pub const GRID_NUM_QUERIES: [usize; 4] = [4 << 10, 8 << 10, 16 << 10, 64 << 10];
pub const SCALE: usize = 64;

impl WorkloadSpec {
    pub fn new(ref_size: usize, query_size: usize, num_queries: usize) -> Self {
        Self {
            id: format!("r{ref_size}-q{query_size}-n{num_queries}"),
            ref_size,
            query_size,
            num_queries,
            scaled: false,
        }
    }

    /// The full-size grid.
    pub fn grid() -> Vec<WorkloadSpec> {
        let mut out = Vec::new();
        for &r in &GRID_REF {
            for &q in &GRID_QUERY {
                for &n in &GRID_NUM_QUERIES {
                    out.push(Self::new(r, q, n));
                }
            }
        }
        out
    }

    /// The grid with every size divided by 64, labelled `scaled-...`.
    pub fn scaled_grid() -> Vec<WorkloadSpec> {
        Self::grid().into_iter().map(|w| w.scaled_down(SCALE)).collect()
    }

    pub fn scaled_down(&self, factor: usize) -> WorkloadSpec {
        let (r, q, n) = (self.ref_size / factor, self.query_size / factor, self.num_queries / factor);
        WorkloadSpec {
            id: format!("scaled-r{r}-q{q}-n{n}"),
            ref_size: r,
            query_size: q,
            num_queries: n,
            scaled: true,
        }
    }

    pub fn shape(&self) -> WorkloadShape {
        WorkloadShape {
            ref_len: self.ref_size,
            query_len: self.query_size,
            num_queries: self.num_queries,
        }
    }

    /// Synthetic reference and queries. Queries tile a second walk.
    pub fn generate<T: Sample>(&self, seed: u64) -> (TimeSeries<T>, Vec<TimeSeries<T>>) {
        let (step, bound) = walk_params(T::DTYPE);
        let r = random_walk(self.ref_size, seed, step, bound);
        let q = random_walk(self.query_size * self.num_queries, seed ^ 0x9e37_79b9_7f4a_7c15, step, bound);
        let reference = TimeSeries::new(cast_all(&r)).expect("ref_size >= 1");
        let queries = q
            .chunks(self.query_size)
            .map(|c| TimeSeries::new(cast_all(c)).expect("query_size >= 1"))
            .collect();
        (reference, queries)
    }
}

/// How a workload's ledger is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Simulate when small enough, otherwise the calibrated closed-form model.
    Auto,
    Simulate,
    Model,
}

impl std::str::FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Engine::Auto),
            "simulate" => Ok(Engine::Simulate),
            "model" => Ok(Engine::Model),
            other => Err(format!("unknown engine `{other}` (expected auto|simulate|model)")),
        }
    }
}

/// Column-iterations above which `Engine::Auto` switches to the model.
pub const SIMULATION_BUDGET: u64 = 20_000_000;

fn column_iterations(shape: WorkloadShape, plan: &MappingPlan) -> u64 {
    let c = plan.replica_columns() as u64;
    let per_replica = plan
        .queries_per_replica()
        .iter()
        .map(|&n| (n * shape.query_len) as u64 + c)
        .max()
        .unwrap_or(0);
    per_replica * c * plan.batches as u64 * plan.replication as u64
}

/// Ledger of one workload on one device, and how it was obtained.
#[derive(Debug, Clone, Serialize)]
pub struct WorkloadLedger {
    pub ledger: CostLedger,
    pub simulated: bool,
    /// Predicate activity used by the model (absent when simulated).
    pub activity: Option<f64>,
    pub plan: MappingPlan,
}

/// Options shared by the run and sweep paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExecOptions {
    pub metric: DistanceMetric,
    pub dtype: DType,
    pub init: RowZeroInit,
    pub seed: u64,
    pub engine: Engine,
}

macro_rules! with_int_dtype {
    ($dtype:expr, $T:ident => $body:expr) => {
        match $dtype {
            DType::Int8 => {
                type $T = i8;
                $body
            }
            DType::Int16 => {
                type $T = i16;
                $body
            }
            DType::Int32 => {
                type $T = i32;
                $body
            }
            other => Err(DseError::Usage(format!("{other} cannot run on the crossbar"))),
        }
    };
}

/// Ledger of a synthetic workload on a device.
pub fn workload_ledger(
    workload: &WorkloadSpec,
    device: &DeviceConfig,
    opts: &ExecOptions,
) -> Result<WorkloadLedger, DseError> {
    with_int_dtype!(opts.dtype, T => workload_ledger_typed::<T>(workload, device, opts))
}

fn simulate<T: Sample>(
    reference: &TimeSeries<T>,
    queries: &[TimeSeries<T>],
    plan: &MappingPlan,
    opts: &ExecOptions,
) -> Result<CostLedger, DseError> {
    let refs: Vec<&[T]> = queries.iter().map(|q| q.samples()).collect();
    let out = wavefront::run_batch(reference.samples(), &refs, plan, opts.metric, opts.init, None, false)?;
    Ok(out.ledger)
}

fn workload_ledger_typed<T: Sample>(
    workload: &WorkloadSpec,
    device: &DeviceConfig,
    opts: &ExecOptions,
) -> Result<WorkloadLedger, DseError> {
    let plan = mapper::plan(device.columns(), workload.ref_size, workload.num_queries)?;
    let shape = workload.shape();
    let simulate_it = match opts.engine {
        Engine::Simulate => true,
        Engine::Model => false,
        Engine::Auto => column_iterations(shape, &plan) <= SIMULATION_BUDGET,
    };
    if simulate_it {
        let (r, qs) = workload.generate::<T>(opts.seed);
        let ledger = simulate(&r, &qs, &plan, opts)?;
        return Ok(WorkloadLedger {
            ledger,
            simulated: true,
            activity: None,
            plan,
        });
    }
    // calibrate the predicate activity on a small sample of the same data
    let sample = WorkloadSpec {
        id: String::new(),
        ref_size: workload.ref_size.min(256),
        query_size: workload.query_size.min(32),
        num_queries: workload.num_queries.min(8),
        scaled: workload.scaled,
    };
    let cfg = WavefrontConfig::new(T::DTYPE, opts.metric, opts.init)?;
    let key = format!(
        "{}/{}/{}/{:?}/{:?}/{:?}/{}",
        sample.ref_size, sample.query_size, sample.num_queries, opts.metric, opts.dtype, opts.init, opts.seed
    );
    let cached = CALIBRATION.lock().expect("calibration cache").get(&key).copied();
    let activity = match cached {
        Some(a) => a,
        None => {
            let (r, qs) = sample.generate::<T>(opts.seed);
            let sample_plan = mapper::plan(sample.ref_size, sample.ref_size, sample.num_queries)?;
            let sim = simulate(&r, &qs, &sample_plan, opts)?;
            let a = wavefront::calibrate_activity(&sim, sample.shape(), &sample_plan, &cfg);
            CALIBRATION.lock().expect("calibration cache").insert(key, a);
            a
        }
    };
    Ok(WorkloadLedger {
        ledger: wavefront::model_ledger(shape, &plan, &cfg, activity),
        simulated: false,
        activity: Some(activity),
        plan,
    })
}

static CALIBRATION: Mutex<BTreeMap<String, f64>> = Mutex::new(BTreeMap::new());

pub const CSV_HEADER: &str = "workload_id,ref_size,query_size,num_queries,num_crossbars,rd_lat,wr_lat,rd_energy,wr_energy,time_ns,energy_pJ,mean_writes_per_cell,max_writes_per_cell";

/// One report row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub workload_id: String,
    pub ref_size: usize,
    pub query_size: usize,
    pub num_queries: usize,
    pub num_crossbars: usize,
    pub rd_lat: f64,
    pub wr_lat: f64,
    pub rd_energy: f64,
    pub wr_energy: f64,
    pub time_ns: f64,
    pub energy_pj: f64,
    pub mean_writes_per_cell: f64,
    pub max_writes_per_cell: u64,
}

impl CsvRow {
    pub fn new(workload: &WorkloadSpec, device: &DeviceConfig, tech: &TechParams, ledger: &CostLedger) -> Self {
        Self {
            workload_id: workload.id.clone(),
            ref_size: workload.ref_size,
            query_size: workload.query_size,
            num_queries: workload.num_queries,
            num_crossbars: device.num_crossbars,
            rd_lat: tech.rd_lat,
            wr_lat: tech.wr_lat,
            rd_energy: tech.rd_energy,
            wr_energy: tech.wr_energy,
            time_ns: cost::total_time(ledger, tech),
            energy_pj: cost::total_energy(ledger, tech),
            mean_writes_per_cell: ledger.write_bits as f64 / device.cells() as f64,
            max_writes_per_cell: ledger.max_cell_writes,
        }
    }
}

impl fmt::Display for CsvRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.workload_id,
            self.ref_size,
            self.query_size,
            self.num_queries,
            self.num_crossbars,
            self.rd_lat,
            self.wr_lat,
            self.rd_energy,
            self.wr_energy,
            self.time_ns,
            self.energy_pj,
            self.mean_writes_per_cell,
            self.max_writes_per_cell
        )
    }
}

pub fn render_csv(rows: &[CsvRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_string());
        s.push('\n');
    }
    s
}

/// Result of a sweep.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<CsvRow>,
    /// One ledger per (workload, device), in grid order.
    pub ledgers: Vec<(String, usize, WorkloadLedger)>,
}

/// Evaluates every workload on every device once, then every technology
/// point from that ledger. Rows are ordered by grid coordinates.
pub fn cmd_sweep(
    workloads: &[WorkloadSpec],
    techs: &[TechParams],
    devices: &[DeviceConfig],
    opts: &ExecOptions,
) -> Result<SweepOutput, DseError> {
    if workloads.is_empty() || techs.is_empty() || devices.is_empty() {
        return Err(DseError::Usage("sweep grids must be non-empty".into()));
    }
    for t in techs {
        t.validate()?;
    }
    let points: Vec<(usize, usize)> = (0..workloads.len())
        .flat_map(|w| (0..devices.len()).map(move |d| (w, d)))
        .collect();
    let ledgers: Vec<WorkloadLedger> = points
        .par_iter()
        .map(|&(w, d)| workload_ledger(&workloads[w], &devices[d], opts))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity(points.len() * techs.len());
    for (&(w, d), l) in points.iter().zip(&ledgers) {
        for t in techs {
            rows.push(CsvRow::new(&workloads[w], &devices[d], t, &l.ledger));
        }
    }
    Ok(SweepOutput {
        rows,
        ledgers: points
            .iter()
            .zip(ledgers)
            .map(|(&(w, d), l)| (workloads[w].id.clone(), devices[d].num_crossbars, l))
            .collect(),
    })
}

/// Technology grids by name.
pub fn tech_grid(name: &str) -> Result<Vec<TechParams>, DseError> {
    let base = TechParams::baseline();
    match name {
        "full" => Ok(TechParams::full_grid()),
        "latency" => Ok(cost::LATENCY_GRID
            .iter()
            .flat_map(|&r| {
                let base = base.clone();
                cost::LATENCY_GRID.iter().map(move |&w| TechParams {
                    name: format!("rl{r}-wl{w}"),
                    rd_lat: r,
                    wr_lat: w,
                    ..base.clone()
                })
            })
            .collect()),
        "energy" => Ok(cost::READ_ENERGY_GRID
            .iter()
            .flat_map(|&r| {
                let base = base.clone();
                cost::WRITE_ENERGY_GRID.iter().map(move |&w| TechParams {
                    name: format!("re{r}-we{w}"),
                    rd_energy: r,
                    wr_energy: w,
                    ..base.clone()
                })
            })
            .collect()),
        other => TechParams::preset(other).map(|t| vec![t]).map_err(Into::into),
    }
}

/// Where the data of a run comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Synthetic,
    File(PathBuf),
}

/// Everything a single run needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub opts: ExecOptions,
    pub device: DeviceConfig,
    pub tech: TechParams,
    pub threshold: Option<f64>,
    pub reference: Source,
    pub queries: Source,
    /// Synthetic reference length.
    pub ref_size: usize,
    pub query_size: usize,
    pub num_queries: usize,
    /// Window stride when slicing queries from a series (default: query_size).
    pub stride: Option<usize>,
    pub trace: bool,
    pub workload_id: String,
}

impl RunConfig {
    pub fn new(dtype: DType, metric: DistanceMetric) -> Self {
        Self {
            mode: Mode::QueryFiltering,
            opts: ExecOptions {
                metric,
                dtype,
                init: RowZeroInit::Verbatim,
                seed: 0,
                engine: Engine::Simulate,
            },
            device: DeviceConfig::embedded(),
            tech: TechParams::baseline(),
            threshold: None,
            reference: Source::Synthetic,
            queries: Source::Synthetic,
            ref_size: 4096,
            query_size: 256,
            num_queries: 64,
            stride: None,
            trace: false,
            workload_id: "run".into(),
        }
    }
}

/// A distance as printed in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Distance {
    Int(i128),
    Float(f64),
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Int(v) => write!(f, "{v}"),
            Distance::Float(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryOutcome {
    pub index: usize,
    pub oracle: Distance,
    pub crossbar: Option<i64>,
    pub anomaly: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub queries: Vec<QueryOutcome>,
    pub ledger: Option<CostLedger>,
    pub plan: Option<serde_json::Value>,
    pub row: Option<CsvRow>,
    pub sensitivity: Option<SensitivityReport>,
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
    pub notices: Vec<String>,
}

impl RunOutcome {
    /// `query,oracle,crossbar,anomaly` lines.
    pub fn distances_csv(&self) -> String {
        let mut s = String::from("query,oracle,crossbar,anomaly\n");
        for q in &self.queries {
            let xb = q.crossbar.map(|v| v.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{}\n", q.index, q.oracle, xb, q.anomaly));
        }
        s
    }
}

fn to_distance<A: crate::Accumulator>(a: A) -> Distance {
    match a.to_i128() {
        Some(v) if a.to_f64().is_some_and(|f| f.fract() == 0.0) => Distance::Int(v),
        _ => Distance::Float(a.to_f64().unwrap_or(f64::NAN)),
    }
}

fn load_series<T: Sample>(src: &Source, synthetic: impl FnOnce() -> Vec<i64>) -> Result<TimeSeries<T>, DseError> {
    match src {
        Source::File(p) => io::ingest::<T>(p, Some(SeriesFormat::from_path(p))).map_err(|e| match DseError::from(e) {
            DseError::Io(m) => DseError::Io(format!("{}: {m}", p.display())),
            other => other,
        }),
        Source::Synthetic => Ok(TimeSeries::new(cast_all(&synthetic()))?),
    }
}

/// Runs the reference path and, for integer types that fit the crossbar, the
/// crossbar path; any disagreement is an error.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutcome, DseError> {
    match cfg.opts.dtype {
        DType::Int8 => run_typed::<i8>(cfg),
        DType::Int16 => run_typed::<i16>(cfg),
        DType::Int32 => run_typed::<i32>(cfg),
        DType::Int64 => run_typed::<i64>(cfg),
        DType::Fp32 => run_typed::<f32>(cfg),
        DType::Fp64 => run_typed::<f64>(cfg),
    }
}

fn run_typed<T: Sample>(cfg: &RunConfig) -> Result<RunOutcome, DseError> {
    cfg.tech.validate()?;
    let (step, bound) = walk_params(T::DTYPE);
    let seed = cfg.opts.seed;
    let reference: TimeSeries<T> = load_series(&cfg.reference, || random_walk(cfg.ref_size, seed, step, bound))?;
    let threshold: Option<T::Acc> = match cfg.threshold {
        Some(t) => Some(
            <T::Acc as num_traits::NumCast>::from(t)
                .ok_or_else(|| DseError::Usage(format!("threshold {t} does not fit the accumulator")))?,
        ),
        None => None,
    };
    let stride = cfg.stride.unwrap_or(cfg.query_size);
    let mut notices = Vec::new();
    let crossbar_ok = matches!(T::DTYPE, DType::Int8 | DType::Int16 | DType::Int32);
    if !crossbar_ok {
        notices.push(format!("{} runs on the reference path only", T::DTYPE));
    }

    // (queries, references) pairs handed to the crossbar
    let (oracle, jobs): (Vec<SdtwResult<T::Acc>>, Vec<(TimeSeries<T>, Vec<usize>)>) = match cfg.mode {
        Mode::QueryFiltering => {
            let qseries: TimeSeries<T> = load_series(&cfg.queries, || {
                random_walk(
                    cfg.query_size + stride * cfg.num_queries.saturating_sub(1),
                    seed ^ 0x9e37_79b9_7f4a_7c15,
                    step,
                    bound,
                )
            })?;
            let qs = slice_queries(&qseries, cfg.query_size, cfg.num_queries, stride)?;
            let res = sdtw::run_query_filtering(&reference, &qs, cfg.opts.metric, cfg.opts.init, threshold)?;
            (res, vec![(reference.clone(), (0..qs.len()).collect())])
        }
        Mode::SelfJoin => {
            let m = cfg.query_size;
            let res = sdtw::run_self_join(&reference, m, cfg.opts.metric, cfg.opts.init, threshold)?;
            let windows = reference.len() - m + 1;
            let jobs = (0..windows)
                .map(|j| {
                    let partners: Vec<usize> = sdtw::self_join_partners(j, windows, m).collect();
                    Ok((reference.window(j, m)?, partners))
                })
                .collect::<Result<Vec<_>, TsaError>>()?;
            (res, jobs)
        }
    };

    let mut outcome = RunOutcome {
        queries: oracle
            .iter()
            .enumerate()
            .map(|(i, r)| QueryOutcome {
                index: i,
                oracle: to_distance(r.distance),
                crossbar: None,
                anomaly: r.anomaly,
            })
            .collect(),
        ledger: None,
        plan: None,
        row: None,
        sensitivity: None,
        trace: Vec::new(),
        notices,
    };
    if !crossbar_ok {
        return Ok(outcome);
    }

    // crossbar path
    let query_windows: Vec<TimeSeries<T>> = match cfg.mode {
        Mode::QueryFiltering => {
            let qseries: TimeSeries<T> = load_series(&cfg.queries, || {
                random_walk(
                    cfg.query_size + stride * cfg.num_queries.saturating_sub(1),
                    seed ^ 0x9e37_79b9_7f4a_7c15,
                    step,
                    bound,
                )
            })?;
            slice_queries(&qseries, cfg.query_size, cfg.num_queries, stride)?.queries
        }
        Mode::SelfJoin => {
            let m = cfg.query_size;
            (0..reference.len() - m + 1)
                .map(|i| reference.window(i, m))
                .collect::<Result<_, _>>()?
        }
    };
    let mut best: Vec<Option<i64>> = vec![None; outcome.queries.len()];
    let mut ledger = CostLedger::default();
    let mut first_plan = None;
    for (r, ids) in &jobs {
        if ids.is_empty() {
            continue;
        }
        let plan = mapper::plan(cfg.device.columns(), r.len(), ids.len())?;
        let qs: Vec<&[T]> = ids.iter().map(|&i| query_windows[i].samples()).collect();
        let out = wavefront::run_batch(r.samples(), &qs, &plan, cfg.opts.metric, cfg.opts.init, None, cfg.trace)?;
        for (&i, res) in ids.iter().zip(&out.results) {
            best[i] = Some(best[i].map_or(res.distance, |b| b.min(res.distance)));
        }
        ledger.merge(&out.ledger);
        outcome.trace.extend(out.trace);
        first_plan.get_or_insert(plan);
    }
    for (q, b) in outcome.queries.iter_mut().zip(&best) {
        let got = b.unwrap_or(crossbar_max::<T>());
        q.crossbar = Some(got);
        let expected = match q.oracle {
            Distance::Int(v) => v,
            Distance::Float(_) => unreachable!("integer dtype"),
        };
        if expected != got as i128 {
            return Err(DseError::Mismatch {
                query: q.index,
                expected: q.oracle.to_string(),
                got: got.to_string(),
            });
        }
    }
    let workload = WorkloadSpec {
        id: cfg.workload_id.clone(),
        ref_size: reference.len(),
        query_size: cfg.query_size,
        num_queries: outcome.queries.len(),
        scaled: false,
    };
    outcome.row = Some(CsvRow::new(&workload, &cfg.device, &cfg.tech, &ledger));
    outcome.sensitivity = Some(cost::sensitivity_report(&ledger, &cfg.tech, &[cfg.tech.clone()]));
    outcome.plan = first_plan.map(|p| p.summary_json());
    outcome.ledger = Some(ledger);
    Ok(outcome)
}

/// The reference path's "no partner" value, as the crossbar reports it.
fn crossbar_max<T: Sample>() -> i64 {
    use num_traits::{Bounded, ToPrimitive};
    <T::Acc as Bounded>::max_value().to_i64().unwrap_or(i64::MAX)
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, DseError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| DseError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// Directory searched for `NAME.conf` preset files before the built-ins.
pub const PRESET_DIR_ENV: &str = "PUMDTW_PRESET_DIR";

/// Settings of a named preset. A `NAME.conf` file in the preset directory
/// wins over the built-in device presets.
pub fn load_preset(name: &str) -> Result<BTreeMap<String, String>, DseError> {
    if let Some(dir) = std::env::var_os(PRESET_DIR_ENV) {
        let path = PathBuf::from(dir).join(format!("{name}.conf"));
        if path.is_file() {
            let text = std::fs::read_to_string(&path)?;
            return parse_config(&text);
        }
    }
    let device = DeviceConfig::preset(name)?;
    Ok(BTreeMap::from([("crossbars".to_string(), device.num_crossbars.to_string())]))
}

/// Least-squares fit of `y = k * x` through the origin; returns `(k, r2)`
/// with `r2` computed against the mean of `y`.
pub fn fit_through_origin(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let k = sxy / sxx;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - k * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    (k, 1.0 - ss_res / ss_tot)
}
