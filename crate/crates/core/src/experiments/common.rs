use rug::Integer;

use crate::error::{Error, Result};
use crate::matseq::MarkoffSequence;
use crate::realfield::{frac_nearest, Enclosure, GrowthFit};

/// Bits added on top of the accuracy a quantity needs.
pub const EXTRA_BITS: f64 = 64.0;

/// Predicts working precision without materializing terms.
pub(crate) struct Planner<'a> {
    seq: &'a MarkoffSequence,
    fit: GrowthFit,
    guard: u32,
}

impl<'a> Planner<'a> {
    pub fn new(seq: &'a MarkoffSequence, guard: u32) -> Result<Self> {
        Ok(Planner {
            seq,
            fit: GrowthFit::from_sequence(seq)?,
            guard,
        })
    }

    pub fn log2_x(&self, k: usize) -> f64 {
        self.fit.log2_norm(&self.seq.current(), k)
    }

    /// Bits an `xi` enclosure with radius below `2^-accuracy` costs, or
    /// `None` beyond the cap.
    pub fn bits_for(&self, accuracy: f64) -> Option<u32> {
        let start = self.seq.seed().first_valid_index + 2;
        (start..self.seq.cap())
            .find(|&k| self.log2_x(k) >= accuracy)
            .map(|k| self.log2_x(k).ceil() as u32 + self.guard)
    }
}

/// `e - round(e)` together with the rounding, `None` if ambiguous.
pub(crate) fn reduce(e: &Enclosure) -> Option<(Enclosure, Integer)> {
    let fr = frac_nearest(e).ok()?;
    let n = fr.nearest?;
    let d = e.sub(&Enclosure::exact_integer(&n, e.bits()));
    Some((d.with_bits(e.bits().min(d.bits())), n))
}

/// Nearest integer to an enclosure, failing when undecided.
pub(crate) fn nearest_integer(e: &Enclosure, what: &str) -> Result<Integer> {
    reduce(e)
        .map(|(_, n)| n)
        .ok_or_else(|| Error::PrecisionExhausted(format!("nearest integer to {what} is undecided")))
}

/// `log2` of the upper end of `|e|`.
pub(crate) fn log2_upper(e: &Enclosure) -> f64 {
    let u = e.abs_upper();
    if u.is_zero() {
        f64::NEG_INFINITY
    } else {
        let (m, x) = u.to_f64_exp();
        m.abs().log2() + x as f64
    }
}
