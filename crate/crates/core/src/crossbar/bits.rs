use std::fmt;
use std::ops::{BitAnd, BitOr, BitXor, Not};

use super::COLS;

const WORDS: usize = COLS / 64;

/// One bit per column of a subarray; column `c` lives in word `c / 64`, bit `c % 64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BitRow(pub [u64; WORDS]);

impl BitRow {
    pub const ZERO: BitRow = BitRow([0; WORDS]);
    pub const ONES: BitRow = BitRow([u64::MAX; WORDS]);

    /// Columns `0..n` set.
    pub fn first(n: usize) -> BitRow {
        let mut r = BitRow::ZERO;
        for (w, word) in r.0.iter_mut().enumerate() {
            let lo = w * 64;
            if n >= lo + 64 {
                *word = u64::MAX;
            } else if n > lo {
                *word = (1u64 << (n - lo)) - 1;
            }
        }
        r
    }

    pub fn from_fn(mut f: impl FnMut(usize) -> bool) -> BitRow {
        let mut r = BitRow::ZERO;
        for c in 0..COLS {
            r.set(c, f(c));
        }
        r
    }

    #[inline]
    pub fn get(&self, col: usize) -> bool {
        self.0[col / 64] >> (col % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, col: usize, v: bool) {
        let bit = 1u64 << (col % 64);
        if v {
            self.0[col / 64] |= bit;
        } else {
            self.0[col / 64] &= !bit;
        }
    }

    #[inline]
    pub fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    #[inline]
    pub fn any(&self) -> bool {
        self.0.iter().any(|&w| w != 0)
    }

    /// Column `c` takes column `c - 1`; column 0 takes `carry_in`.
    /// Returns the bit shifted out of the last column.
    #[inline]
    pub fn shift_right_columns(&self, carry_in: bool) -> (BitRow, bool) {
        let mut out = BitRow::ZERO;
        let mut carry = carry_in as u64;
        for w in 0..WORDS {
            out.0[w] = (self.0[w] << 1) | carry;
            carry = self.0[w] >> 63;
        }
        (out, carry == 1)
    }

    /// `self` where `mask` is set, `other` elsewhere.
    #[inline]
    pub fn select(&self, mask: &BitRow, other: &BitRow) -> BitRow {
        (*self & *mask) | (*other & !*mask)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + t)
            })
        })
    }
}

#[inline]
pub fn maj(a: BitRow, b: BitRow, c: BitRow) -> BitRow {
    (a & b) | (a & c) | (b & c)
}

macro_rules! bitop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr for BitRow {
            type Output = BitRow;
            #[inline]
            fn $f(self, rhs: BitRow) -> BitRow {
                let mut o = self;
                for (a, b) in o.0.iter_mut().zip(rhs.0) {
                    *a = *a $op b;
                }
                o
            }
        }
    };
}

bitop!(BitAnd, bitand, &);
bitop!(BitOr, bitor, |);
bitop!(BitXor, bitxor, ^);

impl Not for BitRow {
    type Output = BitRow;
    #[inline]
    fn not(self) -> BitRow {
        BitRow(self.0.map(|w| !w))
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitRow(")?;
        for c in 0..COLS {
            f.write_str(if self.get(c) { "1" } else { "0" })?;
        }
        write!(f, ")")
    }
}
