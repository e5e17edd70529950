use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rug::{Float, Integer, Rational};
use serde::Serialize;

use super::enclosure::{rad_up, Enclosure, RAD_PREC};
use crate::error::{Error, Result};
use crate::matseq::{log2_abs, MarkoffSequence, TermsView};
use crate::GOLDEN_RATIO;

pub const DEFAULT_GUARD_BITS: u32 = 256;

/// Working precision for a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrecisionPolicy {
    pub bits: u32,
    pub guard_bits: u32,
    /// Largest sequence index the policy was sized for.
    pub k_max: usize,
}

impl PrecisionPolicy {
    pub fn with_bits(bits: u32) -> Self {
        PrecisionPolicy {
            bits,
            guard_bits: DEFAULT_GUARD_BITS,
            k_max: 0,
        }
    }

    /// `8 log2 X_{k_max+6} + guard`, with `log2 X` predicted from the growth
    /// fit when the term is not materialized.
    pub fn schedule(seq: &MarkoffSequence, k_max: usize, guard_bits: u32) -> Result<Self> {
        let fit = GrowthFit::from_sequence(seq)?;
        let top = fit.log2_norm(&seq.current(), k_max + 6);
        let bits = (8.0 * top).ceil() as u64 + guard_bits as u64;
        let bits = u32::try_from(bits).map_err(|_| {
            Error::PrecisionExhausted(format!("schedule for k_max = {k_max} needs {bits} bits"))
        })?;
        Ok(PrecisionPolicy {
            bits,
            guard_bits,
            k_max,
        })
    }

    /// Whether `bits` meets the schedule for `k_max`.
    pub fn meets_schedule(&self, seq: &MarkoffSequence) -> Result<bool> {
        Ok(self.bits >= Self::schedule(seq, self.k_max, self.guard_bits)?.bits)
    }
}

/// `log2 X_k ~ beta * gamma^k`, fitted on materialized terms.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GrowthFit {
    pub beta: f64,
    pub fitted_from: usize,
}

impl GrowthFit {
    pub fn from_sequence(seq: &MarkoffSequence) -> Result<Self> {
        let want = (seq.seed().first_valid_index + 10).min(seq.cap());
        let v = seq.view(want)?;
        let k = v.len();
        let beta = log2_abs(v.norm(k)) / GOLDEN_RATIO.powi(k as i32);
        Ok(GrowthFit {
            beta,
            fitted_from: k,
        })
    }

    /// Exact bit count when materialized, the fit otherwise.
    pub fn log2_norm(&self, v: &TermsView, k: usize) -> f64 {
        match v.get(k) {
            Some(t) => log2_abs(t.norm()),
            None => self.beta * GOLDEN_RATIO.powi(k as i32),
        }
    }
}

fn check_ref_index(seq: &MarkoffSequence, k_ref: usize) -> Result<()> {
    let min = seq.seed().first_valid_index + 2;
    if k_ref < min {
        return Err(Error::IndexOutOfRange(format!(
            "k_ref = {k_ref} is below first_valid_index + 2 = {min}"
        )));
    }
    Ok(())
}

/// `x_{k,1}/x_{k,0}` rounded at `bits`, radius `1/X_k` plus rounding.
fn ratio_enclosure(v: &TermsView, k: usize, bits: u32) -> Enclosure {
    let q = Rational::from((v.x(k, 1).clone(), v.x(k, 0).clone()));
    let e = Enclosure::from_rational(&q, bits);
    e.inflate(&rad_up(&Rational::from((Integer::from(1), v.norm(k).clone()))))
}

/// Exact check that the `k` and `k+1` enclosures intersect and that the
/// second is strictly narrower.
fn consistent(v: &TermsView, k: usize) -> bool {
    let (a, b) = (v.mat(k), v.mat(k + 1));
    if a.x0 == 0 || b.x0 == 0 {
        return false;
    }
    // |a1/a0 - b1/b0| <= 1/Xa + 1/Xb  <=>  |a1 b0 - b1 a0| Xa Xb <= (Xa + Xb)|a0 b0|
    let cross = (Integer::from(&a.x1 * &b.x0) - Integer::from(&b.x1 * &a.x0)).abs();
    let lhs = cross * a.norm() * b.norm();
    let rhs = Integer::from(a.norm() + b.norm()) * Integer::from(&a.x0 * &b.x0).abs();
    lhs <= rhs && b.norm() > a.norm()
}

/// Enclosure of `xi` from the term `x_{k_ref}`, cross-validated against
/// `x_{k_ref+1}`.
pub fn xi_enclosure(
    seq: &MarkoffSequence,
    k_ref: usize,
    policy: &PrecisionPolicy,
) -> Result<Enclosure> {
    check_ref_index(seq, k_ref)?;
    let v = seq.view(k_ref + 1)?;
    let need = log2_abs(v.norm(k_ref)).ceil() as u64 + policy.guard_bits as u64;
    if (policy.bits as u64) < need {
        return Err(Error::PrecisionExhausted(format!(
            "{} bits requested for k_ref = {k_ref}, at least {need} required",
            policy.bits
        )));
    }
    if !consistent(&v, k_ref) {
        return Err(Error::ConsistencyFailure(format!(
            "xi enclosures from terms {k_ref} and {} disagree",
            k_ref + 1
        )));
    }
    Ok(ratio_enclosure(&v, k_ref, policy.bits))
}

/// Caching source of `xi` enclosures and their powers, keyed by the
/// accuracy requested. Safe to share between threads.
pub struct XiSource<'a> {
    seq: &'a MarkoffSequence,
    guard_bits: u32,
    cache: Mutex<HashMap<usize, Arc<Vec<Enclosure>>>>,
}

impl<'a> XiSource<'a> {
    pub fn new(seq: &'a MarkoffSequence, guard_bits: u32) -> Self {
        XiSource {
            seq,
            guard_bits,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn seq(&self) -> &'a MarkoffSequence {
        self.seq
    }

    /// Smallest admissible reference index giving radius below `2^-accuracy`.
    pub fn k_ref_for(&self, accuracy_bits: f64) -> Result<usize> {
        let start = self.seq.seed().first_valid_index + 2;
        let mut k = start;
        loop {
            if k + 1 > self.seq.cap() {
                return Err(Error::PrecisionExhausted(format!(
                    "accuracy 2^-{accuracy_bits:.0} needs a reference term beyond the cap {}",
                    self.seq.cap()
                )));
            }
            let v = self.seq.view(k)?;
            if log2_abs(v.norm(k)) >= accuracy_bits {
                return Ok(k);
            }
            k += 1;
        }
    }

    /// Powers `xi^0 .. xi^max_pow` with absolute radius about `2^-accuracy`.
    pub fn powers(&self, accuracy_bits: f64, max_pow: u32) -> Result<Arc<Vec<Enclosure>>> {
        let k_ref = self.k_ref_for(accuracy_bits + max_pow as f64 + 4.0)?;
        if let Some(hit) = self.cache.lock().expect("xi cache").get(&k_ref) {
            if hit.len() > max_pow as usize {
                return Ok(hit.clone());
            }
        }
        let v = self.seq.view(k_ref)?;
        let bits = log2_abs(v.norm(k_ref)).ceil() as u32 + self.guard_bits;
        let policy = PrecisionPolicy {
            bits,
            guard_bits: self.guard_bits,
            k_max: k_ref,
        };
        let xi = xi_enclosure(self.seq, k_ref, &policy)?;
        let mut pows = vec![Enclosure::from_integer(&Integer::from(1), bits)];
        for _ in 0..max_pow.max(6) {
            let next = pows.last().expect("nonempty").mul(&xi);
            pows.push(next);
        }
        let pows = Arc::new(pows);
        self.cache
            .lock()
            .expect("xi cache")
            .insert(k_ref, pows.clone());
        Ok(pows)
    }

    pub fn xi(&self, accuracy_bits: f64) -> Result<Enclosure> {
        Ok(self.powers(accuracy_bits, 1)?[1].clone())
    }
}

/// `2^-n` as a radius.
pub fn pow2_neg(n: u32) -> Float {
    Float::with_val(RAD_PREC, 1) >> n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi_at_seven() {
        let seq = MarkoffSequence::canonical();
        let e = xi_enclosure(&seq, 7, &PrecisionPolicy::with_bits(512)).unwrap();
        assert!((e.to_f64() - 0.5866033).abs() < 1e-6);
        assert!(e.radius_f64() <= 1.0 / 37666.0 * 1.000001);
    }

    #[test]
    fn enclosures_at_five_and_seven_intersect() {
        let seq = MarkoffSequence::canonical();
        let p = PrecisionPolicy::with_bits(512);
        let a = xi_enclosure(&seq, 5, &p).unwrap();
        let b = xi_enclosure(&seq, 7, &p).unwrap();
        assert!(a.intersects(&b));
        assert!(b.radius() < a.radius());
    }

    #[test]
    fn too_few_bits() {
        let seq = MarkoffSequence::canonical();
        let err = xi_enclosure(&seq, 20, &PrecisionPolicy::with_bits(300)).unwrap_err();
        assert_eq!(err.name(), "PrecisionExhausted");
    }

    #[test]
    fn reference_index_floor() {
        let seq = MarkoffSequence::canonical();
        let err = xi_enclosure(&seq, 4, &PrecisionPolicy::with_bits(512)).unwrap_err();
        assert_eq!(err.name(), "IndexOutOfRange");
    }

    #[test]
    fn schedule_grows_with_k_max() {
        let seq = MarkoffSequence::canonical();
        let a = PrecisionPolicy::schedule(&seq, 10, 256).unwrap();
        let b = PrecisionPolicy::schedule(&seq, 14, 256).unwrap();
        assert!(b.bits > a.bits && a.bits > 256);
        assert!(b.meets_schedule(&seq).unwrap());
    }

    #[test]
    fn source_reaches_requested_accuracy() {
        let seq = MarkoffSequence::canonical();
        let src = XiSource::new(&seq, 64);
        let xi = src.xi(1000.0).unwrap();
        assert!(xi.radius_log2() < -1000.0);
        let again = src.powers(1000.0, 3).unwrap();
        assert_eq!(again[1].center(), xi.center());
    }
}
