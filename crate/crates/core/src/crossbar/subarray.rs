use std::fmt::Write as _;

use super::bits::{maj, BitRow};
use super::{CrossbarError, SenseMode, COLS, ROWS};

/// State of one column's reconfigurable sense amplifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SenseAmpState {
    /// Carry / temporary bit, reused by addition and the diagonal copy.
    pub latch: bool,
    /// Value received from the left neighbour during a diagonal copy.
    pub shift_in: bool,
    /// Gates write-back for predicated operations.
    pub predicate: bool,
}

/// Sense-amplifier registers of a whole subarray, one bit per column.
#[derive(Debug, Clone, Default)]
pub(crate) struct SenseAmps {
    pub latch: BitRow,
    pub shift_in: BitRow,
    pub predicate: BitRow,
    /// Output of the last sense; drives write-back.
    pub out: BitRow,
    /// Per-operation overflow detector, flushed to the sticky flag cell.
    pub ovf: BitRow,
}

/// Per-cell write counters.
///
/// Consecutive writes to a row with the same column mask are batched and
/// flushed into the per-cell table only when the mask changes.
#[derive(Debug, Clone)]
struct WriteCounters {
    cells: Vec<u32>,
    pending_mask: Vec<BitRow>,
    pending_count: Vec<u32>,
    total: u64,
}

impl WriteCounters {
    fn new() -> Self {
        Self {
            cells: vec![0; ROWS * COLS],
            pending_mask: vec![BitRow::ZERO; ROWS],
            pending_count: vec![0; ROWS],
            total: 0,
        }
    }

    #[inline]
    fn record(&mut self, row: usize, mask: &BitRow) -> u32 {
        let n = mask.count();
        if n == 0 {
            return 0;
        }
        self.total += n as u64;
        if self.pending_mask[row] == *mask {
            self.pending_count[row] += 1;
        } else {
            self.flush(row);
            self.pending_mask[row] = *mask;
            self.pending_count[row] = 1;
        }
        n
    }

    fn flush(&mut self, row: usize) {
        let k = self.pending_count[row];
        if k > 0 {
            let base = row * COLS;
            for c in self.pending_mask[row].ones() {
                self.cells[base + c] += k;
            }
        }
        self.pending_count[row] = 0;
    }

    fn get(&self, row: usize, col: usize) -> u64 {
        let pending = if self.pending_mask[row].get(col) {
            self.pending_count[row]
        } else {
            0
        };
        (self.cells[row * COLS + col] + pending) as u64
    }
}

/// A 256 x 256 grid of single-bit cells with one sense amplifier per column.
///
/// Methods here are raw device actions with no cost accounting; the
/// [`Crossbar`](super::Crossbar) wrapper charges phases and bits.
#[derive(Debug, Clone)]
pub struct Subarray {
    cells: Vec<BitRow>,
    pub(crate) sa: SenseAmps,
    writes: WriteCounters,
}

impl Default for Subarray {
    fn default() -> Self {
        Self::new()
    }
}

impl Subarray {
    pub fn new() -> Self {
        Self {
            cells: vec![BitRow::ZERO; ROWS],
            sa: SenseAmps::default(),
            writes: WriteCounters::new(),
        }
    }

    #[inline]
    pub fn row(&self, row: usize) -> &BitRow {
        &self.cells[row]
    }

    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.cells[row].get(col)
    }

    pub fn sense_amp(&self, col: usize) -> SenseAmpState {
        SenseAmpState {
            latch: self.sa.latch.get(col),
            shift_in: self.sa.shift_in.get(col),
            predicate: self.sa.predicate.get(col),
        }
    }

    /// Evaluates a multi-row activation. Cells are never modified.
    pub fn sense(&self, rows: &[usize], mode: SenseMode) -> Result<BitRow, CrossbarError> {
        if rows.len() != mode.arity() {
            return Err(CrossbarError::Arity {
                mode,
                expected: mode.arity(),
                got: rows.len(),
            });
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= ROWS) {
            return Err(CrossbarError::RowOutOfRange(r));
        }
        Ok(self.sense_unchecked(rows, mode))
    }

    #[inline]
    pub(crate) fn sense_unchecked(&self, rows: &[usize], mode: SenseMode) -> BitRow {
        let r = |i: usize| self.cells[rows[i]];
        let inv = |x: BitRow, yes: bool| if yes { !x } else { x };
        let latch = self.sa.latch;
        match mode {
            SenseMode::Read => r(0),
            SenseMode::Nor2 => !(r(0) | r(1)),
            SenseMode::Maj3 => maj(r(0), r(1), r(2)),
            SenseMode::Xor2 => r(0) ^ r(1),
            SenseMode::AddSum { invert_b } => r(0) ^ inv(r(1), invert_b) ^ latch,
            SenseMode::AddCarry { invert_b } => maj(r(0), inv(r(1), invert_b), latch),
            SenseMode::IncSum { invert } => inv(r(0), invert) ^ latch,
            SenseMode::IncCarry { invert } => inv(r(0), invert) & latch,
        }
    }

    /// Writes `data` into `row` on the columns in `mask`. Returns cells written.
    #[inline]
    pub(crate) fn drive(&mut self, row: usize, data: &BitRow, mask: &BitRow) -> u32 {
        self.cells[row] = data.select(mask, &self.cells[row]);
        self.writes.record(row, mask)
    }

    pub fn write_count(&self, row: usize, col: usize) -> u64 {
        self.writes.get(row, col)
    }

    pub fn total_writes(&self) -> u64 {
        self.writes.total
    }

    pub fn max_cell_writes(&self) -> u64 {
        let mut m = 0;
        for r in 0..ROWS {
            for c in 0..COLS {
                m = m.max(self.writes.get(r, c));
            }
        }
        m
    }

    /// 64-bit digest of the cell grid, for side-effect checks.
    pub fn cell_digest(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.cells.hash(&mut h);
        h.finish()
    }

    /// Text dump: one line per row, `0`/`1` per column, rows `rows`.
    pub fn dump(&self, rows: std::ops::Range<usize>, cols: usize) -> String {
        let mut s = String::with_capacity(rows.len() * (cols + 8));
        for r in rows {
            let _ = write!(s, "{r:3} ");
            for c in 0..cols {
                s.push(if self.cells[r].get(c) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_tables() {
        let mut sa = Subarray::new();
        // columns 0..4 encode (a, b) = 00, 01, 10, 11; c = 0101
        let a = BitRow::from_fn(|c| c == 2 || c == 3);
        let b = BitRow::from_fn(|c| c == 1 || c == 3);
        let cc = BitRow::from_fn(|c| c == 1 || c == 3);
        sa.drive(0, &a, &BitRow::ONES);
        sa.drive(1, &b, &BitRow::ONES);
        sa.drive(2, &cc, &BitRow::ONES);
        let nor = sa.sense(&[0, 1], SenseMode::Nor2).unwrap();
        assert_eq!((0..4).map(|c| nor.get(c)).collect::<Vec<_>>(), [true, false, false, false]);
        let m = sa.sense(&[0, 1, 2], SenseMode::Maj3).unwrap();
        assert_eq!((0..4).map(|c| m.get(c)).collect::<Vec<_>>(), [false, true, false, true]);
        let x = sa.sense(&[0, 1], SenseMode::Xor2).unwrap();
        assert_eq!((0..4).map(|c| x.get(c)).collect::<Vec<_>>(), [false, true, true, false]);
    }

    #[test]
    fn arity_and_range_checked() {
        let sa = Subarray::new();
        assert!(matches!(
            sa.sense(&[0, 1], SenseMode::Read),
            Err(CrossbarError::Arity { .. })
        ));
        assert!(matches!(
            sa.sense(&[0, 1], SenseMode::Maj3),
            Err(CrossbarError::Arity { .. })
        ));
        assert!(matches!(
            sa.sense(&[300], SenseMode::Read),
            Err(CrossbarError::RowOutOfRange(300))
        ));
    }

    #[test]
    fn write_counters_batch_and_flush() {
        let mut sa = Subarray::new();
        let m1 = BitRow::first(10);
        let m2 = BitRow::from_fn(|c| c == 3 || c == 200);
        for _ in 0..5 {
            sa.drive(7, &BitRow::ONES, &m1);
        }
        sa.drive(7, &BitRow::ZERO, &m2);
        sa.drive(7, &BitRow::ZERO, &m2);
        assert_eq!(sa.write_count(7, 0), 5);
        assert_eq!(sa.write_count(7, 3), 7);
        assert_eq!(sa.write_count(7, 200), 2);
        assert_eq!(sa.write_count(7, 11), 0);
        assert_eq!(sa.total_writes(), 54);
        assert_eq!(sa.max_cell_writes(), 7);
    }
}
