//! Bit-serial, column-parallel arithmetic on two's complement slices.
//!
//! Every operation works one bit-row at a time across all masked columns.
//! Operands narrower than the result are sign-extended by re-reading their
//! sign row. Operations that can overflow finish with one write phase that
//! sets the sticky overflow cell of every column that overflowed.

use super::{ColumnBits, CostSink, Crossbar, CrossbarError, Gate, SenseMode, Slice, ROWS};

fn check_slices(out: Slice, inputs: &[Slice], may_alias: bool) -> Result<(), CrossbarError> {
    for s in inputs.iter().chain(std::iter::once(&out)) {
        if s.width == 0 || s.end() > ROWS {
            return Err(CrossbarError::RowOutOfRange(s.end()));
        }
    }
    for s in inputs {
        let same = *s == out && may_alias;
        if s.overlaps(&out) && !same {
            return Err(CrossbarError::Aliasing);
        }
    }
    Ok(())
}

impl Crossbar {
    /// Carry-style sense: the result lands in the latch. With `msb` set the
    /// column's overflow detector records carry-in xor carry-out.
    #[inline]
    fn phase_carry(
        &mut self,
        rows: &[usize],
        mode: SenseMode,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
        msb: bool,
    ) {
        for (s, m) in self.subarrays.iter_mut().zip(&mask.0) {
            let c = s.sense_unchecked(rows, mode);
            if msb {
                s.sa.ovf = s.sa.ovf | ((s.sa.latch ^ c) & *m);
            }
            s.sa.latch = c.select(m, &s.sa.latch);
        }
        sink.read_phase(rows.len() as u64 * mask.count());
    }

    /// Sets the sticky overflow cell where this operation overflowed.
    pub(crate) fn flush_overflow(&mut self, mask: &ColumnBits, sink: &mut dyn CostSink) {
        let row = self.overflow_row;
        self.phase_write_const(row, true, Gate::Overflow, mask, sink);
        self.clear_ovf();
    }

    /// `out = a + b`. `out` may be `a` or `b` itself.
    pub fn add(
        &mut self,
        a: Slice,
        b: Slice,
        out: Slice,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<(), CrossbarError> {
        self.add_sub(a, b, out, false, mask, sink)
    }

    /// `out = a - b`, computed as `a + !b + 1`.
    pub fn sub(
        &mut self,
        a: Slice,
        b: Slice,
        out: Slice,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<(), CrossbarError> {
        self.add_sub(a, b, out, true, mask, sink)
    }

    fn add_sub(
        &mut self,
        a: Slice,
        b: Slice,
        out: Slice,
        sub: bool,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<(), CrossbarError> {
        check_slices(out, &[a, b], true)?;
        let w = out.width;
        self.set_latch(sub, mask);
        for k in 0..w {
            let rows = [a.row(k), b.row(k)];
            self.phase_sense(&rows, SenseMode::AddSum { invert_b: sub }, mask, sink);
            self.phase_carry(&rows, SenseMode::AddCarry { invert_b: sub }, mask, sink, k == w - 1);
            self.phase_write_out(out.row(k), Gate::All, mask, sink);
        }
        self.flush_overflow(mask, sink);
        Ok(())
    }

    /// `out = |a|`, in place when `out == a`. Negating the most negative
    /// value overflows.
    pub fn abs(
        &mut self,
        a: Slice,
        out: Slice,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<(), CrossbarError> {
        check_slices(out, &[a], true)?;
        if a != out {
            self.copy(a, out, mask, sink)?;
        }
        let w = out.width;
        self.phase_sense(&[out.msb()], SenseMode::Read, mask, sink);
        self.predicate_from_out(mask);
        // two's complement negation: invert and increment, negative columns only
        self.set_latch(true, mask);
        for k in 0..w {
            let row = [out.row(k)];
            self.phase_sense(&row, SenseMode::IncSum { invert: true }, mask, sink);
            self.phase_carry(&row, SenseMode::IncCarry { invert: true }, mask, sink, false);
            self.phase_write_out(out.row(k), Gate::Predicate, mask, sink);
        }
        self.update_ovf(|sa| sa.predicate & sa.out, mask);
        self.flush_overflow(mask, sink);
        Ok(())
    }

    /// Predicate := `a < b` (signed). Only the carry chain is sensed below
    /// the sign; the extended sign of `a - b` goes through the discard cell.
    pub fn compare_lt(
        &mut self,
        a: Slice,
        b: Slice,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<(), CrossbarError> {
        check_slices(a, &[b], true)?;
        let w = a.width.max(b.width);
        self.set_latch(true, mask);
        for k in 0..w {
            let rows = [a.row(k), b.row(k)];
            self.phase_carry(&rows, SenseMode::AddCarry { invert_b: true }, mask, sink, false);
        }
        let sign = [a.row(w), b.row(w)];
        self.phase_sense(&sign, SenseMode::AddSum { invert_b: true }, mask, sink);
        let d = self.discard_row;
        self.phase_write_out(d, Gate::All, mask, sink);
        self.phase_sense(&[d], SenseMode::Read, mask, sink);
        self.predicate_from_out(mask);
        Ok(())
    }

    /// Bit-row copy `src -> dst`, sign-extending when `dst` is wider.
    pub fn copy(
        &mut self,
        src: Slice,
        dst: Slice,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<(), CrossbarError> {
        self.copy_gated(src, dst, Gate::All, mask, sink)
    }

    /// Copies `src -> dst` only in columns whose predicate is set.
    pub fn predicated_copy(
        &mut self,
        src: Slice,
        dst: Slice,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<(), CrossbarError> {
        self.copy_gated(src, dst, Gate::Predicate, mask, sink)
    }

    fn copy_gated(
        &mut self,
        src: Slice,
        dst: Slice,
        gate: Gate,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<(), CrossbarError> {
        check_slices(dst, &[src], false)?;
        for k in 0..dst.width {
            self.phase_sense(&[src.row(k)], SenseMode::Read, mask, sink);
            self.phase_write_out(dst.row(k), gate, mask, sink);
        }
        Ok(())
    }

    /// Writes `value` into every bit of `dst` in predicated columns.
    pub fn predicated_fill(
        &mut self,
        dst: Slice,
        value: bool,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) {
        for row in dst.rows() {
            self.phase_write_const(row, value, Gate::Predicate, mask, sink);
        }
    }

    /// `out = min(a, b, c)`; `out` must not overlap any operand.
    pub fn min3(
        &mut self,
        a: Slice,
        b: Slice,
        c: Slice,
        out: Slice,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<(), CrossbarError> {
        check_slices(out, &[a, b, c], false)?;
        self.compare_lt(a, b, mask, sink)?;
        self.copy(b, out, mask, sink)?;
        self.predicated_copy(a, out, mask, sink)?;
        self.compare_lt(c, out, mask, sink)?;
        self.predicated_copy(c, out, mask, sink)?;
        Ok(())
    }

    /// `out = a * a` by shift-and-add for non-negative `a`. Flags overflow
    /// when `a` has any bit set in the upper half of the result width
    /// (including a negative sign) or the square reaches the sign bit.
    pub fn square(
        &mut self,
        a: Slice,
        out: Slice,
        mask: &ColumnBits,
        sink: &mut dyn CostSink,
    ) -> Result<(), CrossbarError> {
        check_slices(out, &[a], false)?;
        let w = out.width;
        let half = w / 2;
        self.fill_slice(out, false, mask, sink);
        for j in half..w {
            self.phase_sense(&[a.row(j)], SenseMode::Read, mask, sink);
            self.update_ovf(|sa| sa.out, mask);
        }
        for k in 0..half {
            self.phase_sense(&[a.row(k)], SenseMode::Read, mask, sink);
            self.predicate_from_out(mask);
            self.set_latch(false, mask);
            for j in 0..w - k {
                let rows = [out.row(k + j), a.row(j)];
                self.phase_sense(&rows, SenseMode::AddSum { invert_b: false }, mask, sink);
                self.phase_carry(&rows, SenseMode::AddCarry { invert_b: false }, mask, sink, false);
                self.phase_write_out(out.row(k + j), Gate::Predicate, mask, sink);
            }
        }
        self.phase_sense(&[out.msb()], SenseMode::Read, mask, sink);
        self.update_ovf(|sa| sa.out, mask);
        self.flush_overflow(mask, sink);
        Ok(())
    }
}

/// Phase counts of the primitives above, for the analytic cost model.
/// `(read_phases, write_phases)`.
pub mod phases {
    pub const fn add(w: u64) -> (u64, u64) {
        (2 * w, w + 1)
    }

    pub const fn copy(w: u64) -> (u64, u64) {
        (w, w)
    }

    pub const fn abs_in_place(w: u64) -> (u64, u64) {
        (2 * w + 1, w + 1)
    }

    pub const fn compare_lt(w: u64) -> (u64, u64) {
        (w + 2, 1)
    }

    pub const fn min3(w: u64) -> (u64, u64) {
        let c = compare_lt(w);
        let m = copy(w);
        (2 * c.0 + 3 * m.0, 2 * c.1 + 3 * m.1)
    }

    pub const fn square(w: u64) -> (u64, u64) {
        let half = w / 2;
        // sum over k < half of (w - k)
        let adds = half * w - half * (half - 1) / 2;
        let r = (w - half) + half + 2 * adds + 1;
        let wr = w + adds + 1;
        (r, wr)
    }
}
