//! Cost ledger, technology parameters and the time / energy / endurance model.
//!
//! Time charges critical-path activation phases (columns act in parallel);
//! energy charges every bit in every column.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crossbar::{CostSink, COLS, ROWS};

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("technology parameter {name} must be positive and finite, got {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("modeled time is zero; nothing to extrapolate from")]
    ZeroTime,
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("number of crossbars must be at least 1")]
    NoCrossbars,
}

/// Event counts of a simulated (or modeled) run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    /// Cells activated by read phases, summed over columns.
    pub read_bits: u64,
    /// Cells written.
    pub write_bits: u64,
    /// Bits the host pushed into column-0 injection registers.
    pub host_write_bits: u64,
    /// Read phases on the critical path.
    pub read_phases: u64,
    /// Write phases on the critical path.
    pub write_phases: u64,
    /// Wavefront iterations on the critical path.
    pub iterations: u64,
    /// Cells covered by the wear statistics.
    pub cells: u64,
    /// Writes to the most-written cell.
    pub max_cell_writes: u64,
}

impl CostSink for CostLedger {
    #[inline]
    fn read_phase(&mut self, cells: u64) {
        self.read_phases += 1;
        self.read_bits += cells;
    }

    #[inline]
    fn write_phase(&mut self, cells: u64) {
        self.write_phases += 1;
        self.write_bits += cells;
    }

    #[inline]
    fn host_write(&mut self, bits: u64) {
        self.host_write_bits += bits;
    }
}

impl CostLedger {
    /// Component-wise sum (max for the per-cell maximum). Use for work that
    /// runs one after the other on the same critical path.
    pub fn merge(&mut self, other: &CostLedger) {
        self.read_bits += other.read_bits;
        self.write_bits += other.write_bits;
        self.host_write_bits += other.host_write_bits;
        self.read_phases += other.read_phases;
        self.write_phases += other.write_phases;
        self.iterations += other.iterations;
        self.cells += other.cells;
        self.max_cell_writes = self.max_cell_writes.max(other.max_cell_writes);
    }

    /// Merge of work running concurrently on disjoint hardware: bit counts
    /// add, the critical path is the longer of the two.
    pub fn merge_parallel(&mut self, other: &CostLedger) {
        self.read_bits += other.read_bits;
        self.write_bits += other.write_bits;
        self.host_write_bits += other.host_write_bits;
        self.cells += other.cells;
        self.max_cell_writes = self.max_cell_writes.max(other.max_cell_writes);
        let key = |l: &CostLedger| {
            (l.read_phases + l.write_phases, l.read_phases, l.write_phases, l.iterations)
        };
        // phases of one replica move together; keep the longer critical path whole
        let (_, r, w, i) = key(self).max(key(other));
        self.read_phases = r;
        self.write_phases = w;
        self.iterations = i;
    }

    /// Mean writes over the cells covered by this ledger.
    pub fn mean_cell_writes(&self) -> f64 {
        if self.cells == 0 {
            0.0
        } else {
            self.write_bits as f64 / self.cells as f64
        }
    }

    pub fn total_phases(&self) -> u64 {
        self.read_phases + self.write_phases
    }
}

/// Per-bit latency (ns) and energy (pJ) of the memory cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechParams {
    pub name: String,
    pub rd_lat: f64,
    pub wr_lat: f64,
    pub rd_energy: f64,
    pub wr_energy: f64,
}

/// Latency grid explored for both reads and writes (ns).
pub const LATENCY_GRID: [f64; 5] = [1.0, 3.0, 5.0, 10.0, 20.0];
/// Read energy grid (pJ per bit).
pub const READ_ENERGY_GRID: [f64; 3] = [20.0, 50.0, 100.0];
/// Write energy grid (pJ per bit).
pub const WRITE_ENERGY_GRID: [f64; 3] = [30.0, 70.0, 400.0];
/// Crossbar counts explored.
pub const CROSSBAR_GRID: [usize; 6] = [128, 256, 512, 1024, 2048, 4096];

impl TechParams {
    pub fn new(
        name: impl Into<String>,
        rd_lat: f64,
        wr_lat: f64,
        rd_energy: f64,
        wr_energy: f64,
    ) -> Result<Self, CostError> {
        let t = TechParams {
            name: name.into(),
            rd_lat,
            wr_lat,
            rd_energy,
            wr_energy,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), CostError> {
        for (name, value) in [
            ("rd_lat", self.rd_lat),
            ("wr_lat", self.wr_lat),
            ("rd_energy", self.rd_energy),
            ("wr_energy", self.wr_energy),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(CostError::BadParameter { name, value });
            }
        }
        Ok(())
    }

    /// The default operating point: 5 ns reads, 10 ns writes, 50 / 70 pJ.
    pub fn baseline() -> Self {
        Self::new("baseline", 5.0, 10.0, 50.0, 70.0).expect("valid preset")
    }

    /// Fastest, cheapest corner of the grid.
    pub fn optimistic() -> Self {
        Self::new("optimistic", 1.0, 1.0, 20.0, 30.0).expect("valid preset")
    }

    /// Slowest, most expensive corner of the grid.
    pub fn conservative() -> Self {
        Self::new("conservative", 20.0, 20.0, 100.0, 400.0).expect("valid preset")
    }

    pub fn preset(name: &str) -> Result<Self, CostError> {
        match name {
            "baseline" => Ok(Self::baseline()),
            "optimistic" => Ok(Self::optimistic()),
            "conservative" => Ok(Self::conservative()),
            other => Err(CostError::UnknownPreset(other.to_string())),
        }
    }

    /// The full latency x energy cross product.
    pub fn full_grid() -> Vec<TechParams> {
        let mut out = Vec::new();
        for &rl in &LATENCY_GRID {
            for &wl in &LATENCY_GRID {
                for &re in &READ_ENERGY_GRID {
                    for &we in &WRITE_ENERGY_GRID {
                        out.push(
                            Self::new(format!("rl{rl}-wl{wl}-re{re}-we{we}"), rl, wl, re, we)
                                .expect("grid values are positive"),
                        );
                    }
                }
            }
        }
        out
    }

    fn with(&self, name: &str, f: impl FnOnce(&mut TechParams)) -> TechParams {
        let mut t = self.clone();
        t.name = name.to_string();
        f(&mut t);
        t
    }
}

/// A device: a number of 256x256 compute-enabled crossbars.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub name: String,
    pub num_crossbars: usize,
}

impl DeviceConfig {
    pub fn new(num_crossbars: usize) -> Result<Self, CostError> {
        if num_crossbars == 0 {
            return Err(CostError::NoCrossbars);
        }
        Ok(Self {
            name: format!("{num_crossbars}x"),
            num_crossbars,
        })
    }

    pub fn embedded() -> Self {
        Self::named("embedded", 128)
    }

    pub fn portable() -> Self {
        Self::named("portable", 1024)
    }

    pub fn hpc() -> Self {
        Self::named("hpc", 4096)
    }

    fn named(name: &str, n: usize) -> Self {
        Self {
            name: name.to_string(),
            num_crossbars: n,
        }
    }

    pub fn preset(name: &str) -> Result<Self, CostError> {
        match name {
            "embedded" => Ok(Self::embedded()),
            "portable" => Ok(Self::portable()),
            "hpc" => Ok(Self::hpc()),
            other => Err(CostError::UnknownPreset(other.to_string())),
        }
    }

    pub fn columns(&self) -> usize {
        self.num_crossbars * COLS
    }

    pub fn cells(&self) -> u64 {
        (self.num_crossbars * ROWS * COLS) as u64
    }
}

/// Execution time in ns.
pub fn total_time(ledger: &CostLedger, tech: &TechParams) -> f64 {
    ledger.read_phases as f64 * tech.rd_lat + ledger.write_phases as f64 * tech.wr_lat
}

/// Read and write contributions to energy, in pJ.
pub fn energy_parts(ledger: &CostLedger, tech: &TechParams) -> (f64, f64) {
    (
        ledger.read_bits as f64 * tech.rd_energy,
        (ledger.write_bits + ledger.host_write_bits) as f64 * tech.wr_energy,
    )
}

/// Energy in pJ.
pub fn total_energy(ledger: &CostLedger, tech: &TechParams) -> f64 {
    let (r, w) = energy_parts(ledger, tech);
    r + w
}

/// Writes per cell after `duration_s` seconds of back-to-back repetitions of
/// the ledger's workload.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Endurance {
    pub mean_writes_per_cell: f64,
    pub max_writes_per_cell: f64,
}

pub const TEN_YEARS_S: f64 = 10.0 * 365.25 * 24.0 * 3600.0;

/// Extrapolates the ledger's wear to continuous operation. The mean is taken
/// over every cell of `device`.
pub fn endurance_estimate(
    ledger: &CostLedger,
    modeled_time_ns: f64,
    duration_s: f64,
    device: &DeviceConfig,
) -> Result<Endurance, CostError> {
    if duration_s == 0.0 {
        return Ok(Endurance {
            mean_writes_per_cell: 0.0,
            max_writes_per_cell: 0.0,
        });
    }
    if modeled_time_ns <= 0.0 {
        return Err(CostError::ZeroTime);
    }
    let reps = duration_s * 1e9 / modeled_time_ns;
    Ok(Endurance {
        mean_writes_per_cell: ledger.write_bits as f64 / device.cells() as f64 * reps,
        max_writes_per_cell: ledger.max_cell_writes as f64 * reps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityRow {
    pub tech: TechParams,
    pub time_ns: f64,
    pub energy_pj: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport {
    pub baseline: TechParams,
    pub rows: Vec<SensitivityRow>,
    /// time(rd_lat x10) / time(baseline)
    pub slowdown_rd_x10: f64,
    /// time(wr_lat x10) / time(baseline)
    pub slowdown_wr_x10: f64,
    pub read_energy_share: f64,
    pub write_energy_share: f64,
    /// write energy / read energy at the baseline
    pub write_over_read_energy: f64,
}

/// Time and energy of one ledger over `grid`, plus the derived ratios taken
/// around `baseline`.
pub fn sensitivity_report(
    ledger: &CostLedger,
    baseline: &TechParams,
    grid: &[TechParams],
) -> SensitivityReport {
    let rows = grid
        .iter()
        .map(|t| SensitivityRow {
            tech: t.clone(),
            time_ns: total_time(ledger, t),
            energy_pj: total_energy(ledger, t),
        })
        .collect();
    let base = total_time(ledger, baseline);
    let rd10 = baseline.with("rd_x10", |t| t.rd_lat *= 10.0);
    let wr10 = baseline.with("wr_x10", |t| t.wr_lat *= 10.0);
    let (re, we) = energy_parts(ledger, baseline);
    let total = re + we;
    SensitivityReport {
        baseline: baseline.clone(),
        rows,
        slowdown_rd_x10: total_time(ledger, &rd10) / base,
        slowdown_wr_x10: total_time(ledger, &wr10) / base,
        read_energy_share: if total > 0.0 { re / total } else { 0.0 },
        write_energy_share: if total > 0.0 { we / total } else { 0.0 },
        write_over_read_energy: if re > 0.0 { we / re } else { 0.0 },
    }
}
