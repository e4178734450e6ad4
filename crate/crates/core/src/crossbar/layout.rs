use serde::Serialize;

use super::{CrossbarError, ROWS};

/// A contiguous run of cells in a column holding one two's complement word,
/// least significant bit at `base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Slice {
    pub base: usize,
    pub width: usize,
}

impl Slice {
    pub const fn new(base: usize, width: usize) -> Slice {
        Slice { base, width }
    }

    /// Row holding bit `k`; bits past the width re-read the sign row.
    #[inline]
    pub fn row(&self, k: usize) -> usize {
        self.base + k.min(self.width - 1)
    }

    pub fn end(&self) -> usize {
        self.base + self.width
    }

    pub fn msb(&self) -> usize {
        self.base + self.width - 1
    }

    pub fn overlaps(&self, other: &Slice) -> bool {
        self.base < other.end() && other.base < self.end()
    }

    pub fn rows(&self) -> std::ops::Range<usize> {
        self.base..self.end()
    }
}

/// Fixed slicing of a 256-cell column.
///
/// With 32-bit samples: `R[0..32) Q[32..64) S_cur[64..96) S_diag[96..128)
/// S_up[128..160) S_left[160..192) AUX[192..256)`. Narrower samples shrink the
/// R and Q slices (and the score slices to twice the sample width) and grow AUX.
///
/// Inside AUX: the distance partial result `P1` (score width), the discard
/// cell that absorbs comparison differences, the sticky overflow flag, and the
/// first-row flag that travels with the query stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ColumnLayout {
    pub data_width: usize,
    pub acc_width: usize,
    pub r: Slice,
    pub q: Slice,
    pub s_cur: Slice,
    pub s_diag: Slice,
    pub s_up: Slice,
    pub s_left: Slice,
    pub aux: Slice,
    pub p1: Slice,
    pub discard: usize,
    pub overflow: usize,
    pub first_row: usize,
}

impl ColumnLayout {
    pub const SUPPORTED_WIDTHS: [usize; 3] = [8, 16, 32];

    pub fn for_data_width(data_width: usize) -> Result<ColumnLayout, CrossbarError> {
        if !Self::SUPPORTED_WIDTHS.contains(&data_width) {
            return Err(CrossbarError::UnsupportedWidth(data_width));
        }
        let acc = (2 * data_width).min(32);
        let r = Slice::new(0, data_width);
        let q = Slice::new(r.end(), data_width);
        let s_cur = Slice::new(q.end(), acc);
        let s_diag = Slice::new(s_cur.end(), acc);
        let s_up = Slice::new(s_diag.end(), acc);
        let s_left = Slice::new(s_up.end(), acc);
        let aux = Slice::new(s_left.end(), ROWS - s_left.end());
        let p1 = Slice::new(aux.base, acc);
        let layout = ColumnLayout {
            data_width,
            acc_width: acc,
            r,
            q,
            s_cur,
            s_diag,
            s_up,
            s_left,
            aux,
            p1,
            discard: p1.end(),
            overflow: p1.end() + 1,
            first_row: p1.end() + 2,
        };
        debug_assert!(layout.first_row < ROWS);
        Ok(layout)
    }

    /// The seven top-level slices in column order.
    pub fn slices(&self) -> [(&'static str, Slice); 7] {
        [
            ("R", self.r),
            ("Q", self.q),
            ("S_cur", self.s_cur),
            ("S_diag", self.s_diag),
            ("S_up", self.s_up),
            ("S_left", self.s_left),
            ("AUX", self.aux),
        ]
    }

    /// Largest score value the wavefront keeps: the min-of-three comparison
    /// needs the sign bit free.
    pub fn score_limit(&self) -> i64 {
        (1i64 << (self.acc_width - 1)) - 1
    }
}
