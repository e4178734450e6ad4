//! Bit-exact model of compute-enabled memory subarrays.
//!
//! A [`Subarray`] is 256 rows by 256 columns of single-bit cells plus one
//! reconfigurable sense amplifier per column. A [`Crossbar`] drives one or
//! more subarrays in lock-step as a single wide row of columns; diagonal
//! copies pass through the subarray boundaries.
//!
//! Cost accounting: every row activation is one *phase*. A read phase costs
//! one read latency on the critical path and one read-bit per activated cell;
//! a write phase costs one write latency and one write-bit per written cell.

mod arith;
mod bits;
mod layout;
mod subarray;

pub use arith::phases;
pub use bits::BitRow;
pub use layout::{ColumnLayout, Slice};
pub use subarray::{SenseAmpState, Subarray};

use thiserror::Error;

pub const ROWS: usize = 256;
pub const COLS: usize = 256;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CrossbarError {
    #[error("row {0} out of range")]
    RowOutOfRange(usize),
    #[error("{mode:?} senses {expected} rows, got {got}")]
    Arity {
        mode: SenseMode,
        expected: usize,
        got: usize,
    },
    #[error("row copy source and destination are both row {0}")]
    SameRow(usize),
    #[error("unsupported word width {0}")]
    UnsupportedWidth(usize),
    #[error("operand slices overlap illegally")]
    Aliasing,
}

/// Threshold configuration of the sense amplifiers for one activation.
///
/// `Read`, `Nor2`, `Maj3` and `Xor2` are pure functions of the activated
/// cells. The adder modes fold in the SA latch, which holds the running
/// carry during bit-serial arithmetic; `invert*` senses the complemented
/// operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SenseMode {
    Read,
    Nor2,
    Maj3,
    Xor2,
    AddSum { invert_b: bool },
    AddCarry { invert_b: bool },
    IncSum { invert: bool },
    IncCarry { invert: bool },
}

impl SenseMode {
    pub fn arity(self) -> usize {
        match self {
            SenseMode::Read | SenseMode::IncSum { .. } | SenseMode::IncCarry { .. } => 1,
            SenseMode::Nor2 | SenseMode::Xor2 => 2,
            SenseMode::AddSum { .. } | SenseMode::AddCarry { .. } => 2,
            SenseMode::Maj3 => 3,
        }
    }
}

/// Receives cost events from crossbar operations.
pub trait CostSink {
    /// One activation phase on the critical path touching `cells` cells.
    fn read_phase(&mut self, cells: u64);
    /// One write phase writing `cells` cells.
    fn write_phase(&mut self, cells: u64);
    /// Bits the host pushes into injection registers (no cell write).
    fn host_write(&mut self, bits: u64);
}

/// Discards all events.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl CostSink for NullSink {
    fn read_phase(&mut self, _: u64) {}
    fn write_phase(&mut self, _: u64) {}
    fn host_write(&mut self, _: u64) {}
}

/// One bit per column across all subarrays of a [`Crossbar`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ColumnBits(pub Vec<BitRow>);

impl ColumnBits {
    pub fn zeros(columns: usize) -> Self {
        ColumnBits(vec![BitRow::ZERO; columns.div_ceil(COLS).max(1)])
    }

    /// Columns `0..n` set, sized for `columns`.
    pub fn first(columns: usize, n: usize) -> Self {
        let mut b = Self::zeros(columns);
        for (s, row) in b.0.iter_mut().enumerate() {
            *row = BitRow::first(n.saturating_sub(s * COLS).min(COLS));
        }
        b
    }

    pub fn from_fn(columns: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut b = Self::zeros(columns);
        for c in 0..columns {
            b.set(c, f(c));
        }
        b
    }

    pub fn get(&self, col: usize) -> bool {
        self.0[col / COLS].get(col % COLS)
    }

    pub fn set(&mut self, col: usize, v: bool) {
        self.0[col / COLS].set(col % COLS, v);
    }

    pub fn count(&self) -> u64 {
        self.0.iter().map(|r| r.count() as u64).sum()
    }

    pub fn and(&self, other: &ColumnBits) -> ColumnBits {
        ColumnBits(self.0.iter().zip(&other.0).map(|(a, b)| *a & *b).collect())
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(s, r)| r.ones().map(move |c| s * COLS + c))
    }
}

/// Which columns a write-back reaches, on top of the active mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Gate {
    All,
    Predicate,
    Overflow,
}

/// Lock-step group of subarrays presenting `columns` compute columns.
#[derive(Debug, Clone)]
pub struct Crossbar {
    subarrays: Vec<Subarray>,
    columns: usize,
    discard_row: usize,
    overflow_row: usize,
}

impl Crossbar {
    /// `columns` compute columns using the discard / overflow cells of `layout`.
    pub fn new(columns: usize, layout: &ColumnLayout) -> Self {
        Self::with_flag_rows(columns, layout.discard, layout.overflow)
    }

    pub fn with_flag_rows(columns: usize, discard_row: usize, overflow_row: usize) -> Self {
        assert!(columns >= 1, "a crossbar needs at least one column");
        Self {
            subarrays: (0..columns.div_ceil(COLS)).map(|_| Subarray::new()).collect(),
            columns,
            discard_row,
            overflow_row,
        }
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn subarrays(&self) -> &[Subarray] {
        &self.subarrays
    }

    pub fn overflow_row(&self) -> usize {
        self.overflow_row
    }

    /// Mask of every column of this crossbar.
    pub fn full_mask(&self) -> ColumnBits {
        ColumnBits::first(self.columns, self.columns)
    }

    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.subarrays[col / COLS].cell(row, col % COLS)
    }

    pub fn sense_amp(&self, col: usize) -> SenseAmpState {
        self.subarrays[col / COLS].sense_amp(col % COLS)
    }

    pub fn write_count(&self, row: usize, col: usize) -> u64 {
        self.subarrays[col / COLS].write_count(row, col % COLS)
    }

    pub fn total_writes(&self) -> u64 {
        self.subarrays.iter().map(Subarray::total_writes).sum()
    }

    pub fn max_cell_writes(&self) -> u64 {
        self.subarrays.iter().map(Subarray::max_cell_writes).max().unwrap_or(0)
    }

    /// Cells physically present (whole subarrays).
    pub fn cell_count(&self) -> u64 {
        (self.subarrays.len() * ROWS * COLS) as u64
    }

    pub fn cell_digest(&self) -> u64 {
        self.subarrays
            .iter()
            .fold(0u64, |h, s| h.rotate_left(7) ^ s.cell_digest())
    }

    /// Text dump of `rows` for every subarray, headed `# subarray <i>`.
    pub fn dump(&self, rows: std::ops::Range<usize>) -> String {
        let mut out = String::new();
        for (i, s) in self.subarrays.iter().enumerate() {
            let cols = (self.columns - i * COLS).min(COLS);
            out.push_str(&format!("# subarray {i}\n"));
            out.push_str(&s.dump(rows.clone(), cols));
        }
        out
    }

    fn check_row(row: usize) -> Result<(), CrossbarError> {
        if row >= ROWS {
            Err(CrossbarError::RowOutOfRange(row))
        } else {
            Ok(())
        }
    }

    // ---- phase primitives -------------------------------------------------

    /// One activation: SA `out` register takes the sensed value on masked columns.
    #[inline]
    pub(crate) fn phase_sense(
        &mut self,
        rows: &[usize],
        mode: SenseMode,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) {
        for (s, m) in self.subarrays.iter_mut().zip(&mask.0) {
            let v = s.sense_unchecked(rows, mode);
            s.sa.out = v.select(m, &s.sa.out);
        }
        sink.read_phase(rows.len() as u64 * mask.count());
    }

    /// Writes the SA `out` register into `row`.
    #[inline]
    pub(crate) fn phase_write_out(
        &mut self,
        row: usize,
        gate: Gate,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) {
        let mut n = 0u64;
        for (s, m) in self.subarrays.iter_mut().zip(&mask.0) {
            let g = gated(s, m, gate);
            let out = s.sa.out;
            n += s.drive(row, &out, &g) as u64;
        }
        sink.write_phase(n);
    }

    #[inline]
    pub(crate) fn phase_write_const(
        &mut self,
        row: usize,
        value: bool,
        gate: Gate,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) {
        let data = if value { BitRow::ONES } else { BitRow::ZERO };
        let mut n = 0u64;
        for (s, m) in self.subarrays.iter_mut().zip(&mask.0) {
            let g = gated(s, m, gate);
            n += s.drive(row, &data, &g) as u64;
        }
        sink.write_phase(n);
    }

    /// Latch := `value` on masked columns (controller action, no phase).
    pub(crate) fn set_latch(&mut self, value: bool, mask: &ColumnBits) {
        let v = if value { BitRow::ONES } else { BitRow::ZERO };
        for (s, m) in self.subarrays.iter_mut().zip(&mask.0) {
            s.sa.latch = v.select(m, &s.sa.latch);
        }
    }

    /// Predicate := `out` on masked columns.
    pub(crate) fn predicate_from_out(&mut self, mask: &ColumnBits) {
        for (s, m) in self.subarrays.iter_mut().zip(&mask.0) {
            s.sa.predicate = s.sa.out.select(m, &s.sa.predicate);
        }
    }

    pub(crate) fn clear_ovf(&mut self) {
        for s in &mut self.subarrays {
            s.sa.ovf = BitRow::ZERO;
        }
    }

    pub(crate) fn update_ovf(&mut self, f: impl Fn(&subarray::SenseAmps) -> BitRow, mask: &ColumnBits) {
        for (s, m) in self.subarrays.iter_mut().zip(&mask.0) {
            let v = f(&s.sa);
            s.sa.ovf = s.sa.ovf | (v & *m);
        }
    }

    /// Sets the predicate directly (controller action, no phase).
    pub fn set_predicate(&mut self, pred: &ColumnBits) {
        for (s, p) in self.subarrays.iter_mut().zip(&pred.0) {
            s.sa.predicate = *p;
        }
    }

    pub fn predicate(&self) -> ColumnBits {
        ColumnBits(self.subarrays.iter().map(|s| s.sa.predicate).collect())
    }

    // ---- column-parallel operations ---------------------------------------

    /// Writes `data` into `row` on masked columns.
    pub fn write_row(
        &mut self,
        row: usize,
        data: &ColumnBits,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<(), CrossbarError> {
        Self::check_row(row)?;
        let mut n = 0u64;
        for ((s, d), m) in self.subarrays.iter_mut().zip(&data.0).zip(&mask.0) {
            n += s.drive(row, d, m) as u64;
        }
        sink.write_phase(n);
        Ok(())
    }

    /// Multi-row sense. Returns the per-column result (zero outside `mask`);
    /// cell contents are untouched.
    pub fn sense(
        &mut self,
        rows: &[usize],
        mode: SenseMode,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<ColumnBits, CrossbarError> {
        let mut out = Vec::with_capacity(self.subarrays.len());
        for (s, m) in self.subarrays.iter().zip(&mask.0) {
            out.push(s.sense(rows, mode)? & *m);
        }
        sink.read_phase(rows.len() as u64 * mask.count());
        Ok(ColumnBits(out))
    }

    /// Reads `src` and writes it into `dst` within one cycle.
    pub fn row_copy(
        &mut self,
        src: usize,
        dst: usize,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<(), CrossbarError> {
        Self::check_row(src)?;
        Self::check_row(dst)?;
        if src == dst {
            return Err(CrossbarError::SameRow(src));
        }
        self.phase_sense(&[src], SenseMode::Read, mask, sink);
        self.phase_write_out(dst, Gate::All, mask, sink);
        Ok(())
    }

    /// Each SA reads `src` in its own column, then writes its left neighbour's
    /// value into `dst`. Column 0 takes `boundary`.
    pub fn diagonal_row_copy(
        &mut self,
        src: usize,
        dst: usize,
        boundary: bool,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<(), CrossbarError> {
        Self::check_row(src)?;
        Self::check_row(dst)?;
        self.diag_copy_unchecked(src, dst, boundary, mask, sink);
        Ok(())
    }

    pub(crate) fn diag_copy_unchecked(
        &mut self,
        src: usize,
        dst: usize,
        boundary: bool,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) {
        self.phase_sense(&[src], SenseMode::Read, mask, sink);
        // SA-to-SA relay, chained through the pass gates between subarrays
        let mut carry = boundary;
        for s in &mut self.subarrays {
            let (shifted, out) = s.sa.out.shift_right_columns(carry);
            s.sa.shift_in = shifted;
            carry = out;
        }
        let mut n = 0u64;
        for (s, m) in self.subarrays.iter_mut().zip(&mask.0) {
            let v = s.sa.shift_in;
            n += s.drive(dst, &v, m) as u64;
        }
        sink.write_phase(n);
    }

    // ---- host access ------------------------------------------------------

    /// Reads a word without charging any cost (debug / test inspection).
    pub fn peek_word(&self, slice: Slice, col: usize) -> i64 {
        let mut v: u64 = 0;
        for k in 0..slice.width {
            if self.cell(slice.base + k, col) {
                v |= 1 << k;
            }
        }
        sign_extend(v, slice.width)
    }

    /// Writes one word per column (values truncated to the slice width),
    /// one write phase per bit-row.
    pub fn load_words(
        &mut self,
        slice: Slice,
        values: &[i64],
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) {
        for k in 0..slice.width {
            let data = ColumnBits::from_fn(self.columns, |c| {
                values.get(c).is_some_and(|v| (v >> k) & 1 == 1)
            });
            let mut n = 0u64;
            for ((s, d), m) in self.subarrays.iter_mut().zip(&data.0).zip(&mask.0) {
                n += s.drive(slice.base + k, d, m) as u64;
            }
            sink.write_phase(n);
        }
    }

    /// Host read of `slice` in the given columns: one read phase per bit-row,
    /// one read-bit per column read.
    pub fn host_read_words(
        &mut self,
        slice: Slice,
        cols: &[usize],
        sink: &mut dyn CostSink,
    ) -> Vec<i64> {
        for _ in 0..slice.width {
            sink.read_phase(cols.len() as u64);
        }
        cols.iter().map(|&c| self.peek_word(slice, c)).collect()
    }

    /// Writes `value` into every bit-row of `slice`.
    pub fn fill_slice(
        &mut self,
        slice: Slice,
        value: bool,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) {
        for row in slice.rows() {
            self.phase_write_const(row, value, Gate::All, mask, sink);
        }
    }

    /// Columns whose sticky overflow flag is set (no cost).
    pub fn overflow_flags(&self) -> ColumnBits {
        ColumnBits(self.subarrays.iter().map(|s| *s.row(self.overflow_row)).collect())
    }
}

#[inline]
fn gated(s: &Subarray, m: &BitRow, gate: Gate) -> BitRow {
    match gate {
        Gate::All => *m,
        Gate::Predicate => *m & s.sa.predicate,
        Gate::Overflow => *m & s.sa.ovf,
    }
}

pub(crate) fn sign_extend(v: u64, width: usize) -> i64 {
    if width >= 64 {
        v as i64
    } else {
        let shift = 64 - width;
        ((v << shift) as i64) >> shift
    }
}
