use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use pumdtw::dse::{self, DseError, Engine, ExecOptions, RunConfig, Source, WorkloadSpec};
use pumdtw::io::{self as tsio, SeriesFormat};
use pumdtw::{DType, DeviceConfig, DistanceMetric, Mode, RowZeroInit, TechParams};

#[derive(Parser, Debug)]
#[command(name = "pumdtw", version, about = "Subsequence DTW on a simulated compute-enabled MRAM crossbar")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run one workload on the reference path and the crossbar.
    Run(RunArgs),
    /// Evaluate a workload x technology x device grid and write the CSV report.
    Sweep(SweepArgs),
    /// Write a synthetic random-walk series.
    Gen(GenArgs),
}

/// Settings shared by `run` and `sweep`. Unset values fall back to the config
/// file, then to the preset, then to built-in defaults.
#[derive(Args, Debug, Default)]
struct Common {
    /// key=value file; keys are the long flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Device preset (embedded|portable|hpc or NAME.conf in $PUMDTW_PRESET_DIR).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    dtype: Option<String>,
    /// verbatim | open_start
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// auto | simulate | model
    #[arg(long)]
    engine: Option<String>,
    #[arg(long)]
    rd_lat: Option<f64>,
    #[arg(long)]
    wr_lat: Option<f64>,
    #[arg(long)]
    rd_energy: Option<f64>,
    #[arg(long)]
    wr_energy: Option<f64>,
    /// Technology preset (baseline|optimistic|conservative).
    #[arg(long)]
    tech: Option<String>,
    /// Output file for the CSV report (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// query_filtering | self_join
    #[arg(long)]
    mode: Option<String>,
    /// Reference series (CSV or TSA1); synthetic when absent.
    #[arg(long = "ref")]
    reference: Option<PathBuf>,
    /// Series the queries are sliced from; synthetic when absent.
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    ref_size: Option<usize>,
    #[arg(long)]
    query_size: Option<usize>,
    #[arg(long)]
    num_queries: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    crossbars: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Per-query distances as CSV.
    #[arg(long)]
    distances: Option<PathBuf>,
    /// Print per-iteration trace records (JSON lines) to stderr.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// scaled (the /64 grid), full, or a single REF:QUERY:NUM triple.
    #[arg(long, default_value = "scaled")]
    workloads: String,
    /// full | latency | energy | a technology preset.
    #[arg(long, default_value = "full")]
    tech_grid: String,
    /// Comma-separated crossbar counts.
    #[arg(long, value_delimiter = ',')]
    crossbars: Vec<usize>,
    /// Write the per-(workload, device) ledgers as JSON.
    #[arg(long)]
    ledgers: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    len: usize,
    #[arg(long, default_value = "int32")]
    dtype: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// .csv or .bin (TSA1)
    #[arg(long)]
    out: PathBuf,
}

/// Resolved key lookups: explicit flag, then config file, then preset.
struct Settings {
    layers: Vec<BTreeMap<String, String>>,
}

impl Settings {
    fn load(common: &Common) -> Result<Self, DseError> {
        let mut layers = Vec::new();
        let config = match &common.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| DseError::Io(format!("{}: {e}", p.display())))?;
                dse::parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        let preset = common.preset.clone().or_else(|| config.get("preset").cloned());
        layers.push(config);
        if let Some(name) = preset {
            layers.push(dse::load_preset(&name)?);
        }
        Ok(Self { layers })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.layers.iter().find_map(|l| l.get(key)).map(String::as_str)
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, DseError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| DseError::Usage(format!("{key}: {e}"))))
            .transpose()
    }

    fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, DseError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }
}

fn exec_options(c: &Common, s: &Settings, default_engine: Engine) -> Result<ExecOptions, DseError> {
    Ok(ExecOptions {
        metric: s.or(c.metric.clone(), "metric", "abs_diff".into())?.parse::<DistanceMetric>().map_err(usage)?,
        dtype: s.or(c.dtype.clone(), "dtype", "int32".into())?.parse::<DType>().map_err(usage)?,
        init: s.or(c.init.clone(), "init", "verbatim".into())?.parse::<RowZeroInit>().map_err(usage)?,
        seed: s.or(c.seed, "seed", 0)?,
        engine: match s.get(c.engine.clone(), "engine")? {
            Some(e) => e.parse::<Engine>().map_err(usage)?,
            None => default_engine,
        },
    })
}

fn tech(c: &Common, s: &Settings) -> Result<TechParams, DseError> {
    let mut t = match s.get(c.tech.clone(), "tech")? {
        Some(name) => TechParams::preset(&name)?,
        None => TechParams::baseline(),
    };
    t.rd_lat = s.or(c.rd_lat, "rd-lat", t.rd_lat)?;
    t.wr_lat = s.or(c.wr_lat, "wr-lat", t.wr_lat)?;
    t.rd_energy = s.or(c.rd_energy, "rd-energy", t.rd_energy)?;
    t.wr_energy = s.or(c.wr_energy, "wr-energy", t.wr_energy)?;
    t.validate()?;
    Ok(t)
}

fn usage<E: std::fmt::Display>(e: E) -> DseError {
    DseError::Usage(e.to_string())
}

fn emit(path: Option<&PathBuf>, text: &str) -> Result<(), DseError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| DseError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(a: RunArgs) -> Result<(), DseError> {
    let s = Settings::load(&a.common)?;
    let opts = exec_options(&a.common, &s, Engine::Simulate)?;
    let mut cfg = RunConfig::new(opts.dtype, opts.metric);
    cfg.opts = opts;
    cfg.mode = s.or(a.mode, "mode", "query_filtering".into())?.parse::<Mode>().map_err(usage)?;
    cfg.tech = tech(&a.common, &s)?;
    let crossbars = s.or(a.crossbars, "crossbars", DeviceConfig::embedded().num_crossbars)?;
    cfg.device = DeviceConfig::new(crossbars)?;
    cfg.threshold = s.get(a.threshold, "threshold")?;
    if let Some(p) = s.get(a.reference, "ref")? {
        cfg.reference = Source::File(p);
    }
    if let Some(p) = s.get(a.queries, "queries")? {
        cfg.queries = Source::File(p);
    }
    cfg.ref_size = s.or(a.ref_size, "ref-size", cfg.ref_size)?;
    cfg.query_size = s.or(a.query_size, "query-size", cfg.query_size)?;
    cfg.num_queries = s.or(a.num_queries, "num-queries", cfg.num_queries)?;
    cfg.stride = s.get(a.stride, "stride")?;
    cfg.trace = a.trace || s.or(None, "trace", false)?;
    if cfg.ref_size == 0 || cfg.query_size == 0 {
        return Err(DseError::Usage("sizes must be positive".into()));
    }

    let outcome = dse::cmd_run(&cfg)?;
    for n in &outcome.notices {
        warn!("{n}");
    }
    if cfg.trace {
        for t in &outcome.trace {
            eprintln!("{}", serde_json::to_string(t).expect("trace serializes"));
        }
    }
    if let Some(p) = &a.distances {
        emit(Some(p), &outcome.distances_csv())?;
    }
    if let Some(plan) = &outcome.plan {
        info!("plan {plan}");
    }
    if let Some(sens) = &outcome.sensitivity {
        info!(
            "rd_lat x10 slowdown {:.3}, wr_lat x10 slowdown {:.3}, read/write energy share {:.3}/{:.3}",
            sens.slowdown_rd_x10, sens.slowdown_wr_x10, sens.read_energy_share, sens.write_energy_share
        );
    }
    match &outcome.row {
        Some(row) => emit(a.common.out.as_ref(), &dse::render_csv(std::slice::from_ref(row))),
        None => {
            if a.distances.is_none() {
                emit(a.common.out.as_ref(), &outcome.distances_csv())?;
            }
            Ok(())
        }
    }
}

fn parse_workloads(spec: &str) -> Result<Vec<WorkloadSpec>, DseError> {
    match spec {
        "scaled" => Ok(WorkloadSpec::scaled_grid()),
        "full" => Ok(WorkloadSpec::grid()),
        triple => {
            let parts: Vec<usize> = triple
                .split(':')
                .map(|p| p.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| DseError::Usage(format!("bad workload `{triple}` (expected REF:QUERY:NUM)")))?;
            match parts[..] {
                [r, q, n] if r > 0 && q > 0 && n > 0 => Ok(vec![WorkloadSpec::new(r, q, n)]),
                _ => Err(DseError::Usage(format!("bad workload `{triple}` (expected REF:QUERY:NUM)"))),
            }
        }
    }
}

fn sweep(a: SweepArgs) -> Result<(), DseError> {
    let s = Settings::load(&a.common)?;
    let opts = exec_options(&a.common, &s, Engine::Auto)?;
    if !opts.dtype.is_integer() || opts.dtype == DType::Int64 {
        return Err(DseError::Usage(format!("{} cannot run on the crossbar", opts.dtype)));
    }
    let workloads = parse_workloads(&a.workloads)?;
    let techs = dse::tech_grid(&a.tech_grid)?;
    let counts = if !a.crossbars.is_empty() {
        a.crossbars
    } else if let Some(v) = s.raw("crossbars") {
        v.split(',')
            .map(|x| x.trim().parse::<usize>().map_err(usage))
            .collect::<Result<_, _>>()?
    } else {
        pumdtw::cost::CROSSBAR_GRID.to_vec()
    };
    let devices = counts
        .into_iter()
        .map(DeviceConfig::new)
        .collect::<Result<Vec<_>, _>>()?;
    info!(
        "sweep: {} workloads x {} devices x {} technology points",
        workloads.len(),
        devices.len(),
        techs.len()
    );
    let out = dse::cmd_sweep(&workloads, &techs, &devices, &opts)?;
    if let Some(p) = &a.ledgers {
        let j: Vec<_> = out
            .ledgers
            .iter()
            .map(|(w, d, l)| serde_json::json!({ "workload": w, "crossbars": d, "result": l }))
            .collect();
        emit(Some(p), &format!("{}\n", serde_json::to_string_pretty(&j).expect("ledger serializes")))?;
    }
    emit(a.common.out.as_ref(), &dse::render_csv(&out.rows))
}

fn gen(a: GenArgs) -> Result<(), DseError> {
    let dtype: DType = a.dtype.parse().map_err(usage)?;
    let (step, bound) = dse::walk_params(dtype);
    let walk = dse::random_walk(a.len, a.seed, step, bound);
    let text: Vec<String> = walk.iter().map(i64::to_string).collect();
    let format = SeriesFormat::from_path(&a.out);
    macro_rules! write_as {
        ($t:ty) => {{
            let series = tsio::parse_csv::<$t>(&text.join("\n"))?;
            tsio::write_series(&a.out, &series, format)?;
        }};
    }
    match dtype {
        DType::Int8 => write_as!(i8),
        DType::Int16 => write_as!(i16),
        DType::Int32 => write_as!(i32),
        DType::Int64 => write_as!(i64),
        DType::Fp32 => write_as!(f32),
        DType::Fp64 => write_as!(f64),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.cmd {
        Cmd::Run(a) => run(a),
        Cmd::Sweep(a) => sweep(a),
        Cmd::Gen(a) => gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
