use rug::{Float, Integer};

use super::enclosure::{rad_up, Enclosure, RAD_PREC};
use super::policy::PrecisionPolicy;
use crate::error::{Error, Result};
use crate::matseq::IntPoly;

/// Newton iterations allowed before giving up.
pub const NEWTON_BUDGET: usize = 64;

/// Interval Horner evaluation of an integer polynomial.
///
/// The working precision is raised by the coefficient size so cancellation
/// among large terms does not eat into the requested accuracy.
pub fn eval_int_poly(p: &IntPoly, e: &Enclosure) -> Enclosure {
    if p.is_zero() {
        return Enclosure::zero(e.bits());
    }
    let work = e.bits() + p.norm().significant_bits() + 8;
    let x = e.with_bits(work);
    let mut acc = Enclosure::from_integer(p.leading(), work);
    for c in p.coeffs().iter().rev().skip(1) {
        acc = acc.mul(&x).add(&Enclosure::from_integer(c, work));
    }
    acc
}

/// Value at an exact float point, used inside Newton steps.
fn eval_at(p: &IntPoly, x: &Float, bits: u32) -> Enclosure {
    eval_int_poly(p, &Enclosure::new(Float::with_val(bits, x), Float::new(RAD_PREC)))
}

/// Refines a simple root of `p` near `start` and certifies it with an
/// interval Newton step.
pub fn refine_root(p: &IntPoly, start: &Enclosure, policy: &PrecisionPolicy) -> Result<Enclosure> {
    if p.is_zero() {
        return Err(Error::InvariantViolation("cannot refine a root of the zero polynomial".into()));
    }
    let dp = p.derivative();
    if eval_int_poly(&dp, start).contains_zero() {
        return Err(Error::DerivativeVanishes);
    }
    let bits = policy.bits.max(64);
    let stop = Float::with_val(RAD_PREC, 1) >> (bits / 2);
    let mut x = Float::with_val(bits, start.center());
    let mut last_step = None;
    let mut converged = false;
    for _ in 0..NEWTON_BUDGET {
        let fx = eval_at(p, &x, bits);
        let dfx = eval_at(&dp, &x, bits);
        let Some(step) = fx.div(&dfx) else {
            return Err(Error::DerivativeVanishes);
        };
        x = Float::with_val(bits, &x - step.center());
        let size = step.center().as_abs().clone();
        let small = size <= stop || step.center().is_zero();
        last_step = Some(size);
        if small {
            // one more step doubles the number of correct bits
            let fx = eval_at(p, &x, bits);
            let dfx = eval_at(&dp, &x, bits);
            if let Some(step) = fx.div(&dfx) {
                x = Float::with_val(bits, &x - step.center());
                last_step = Some(step.center().as_abs().clone());
            }
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(NEWTON_BUDGET));
    }
    let floor = Float::with_val(RAD_PREC, 1) >> (bits.saturating_sub(16));
    let mut rho = rad_up(last_step.unwrap_or_else(|| Float::new(RAD_PREC)) * 4u32);
    let scale = rad_up(x.as_abs().clone().max(&Float::with_val(RAD_PREC, 1)));
    let floor = rad_up(&floor * &scale);
    if rho < floor {
        rho = floor;
    }
    for _ in 0..12 {
        let cand = Enclosure::new(x.clone(), rho.clone());
        let dcand = eval_int_poly(&dp, &cand);
        if dcand.contains_zero() {
            return Err(Error::DerivativeVanishes);
        }
        let fx = eval_at(p, &x, bits);
        let newton = fx
            .div(&dcand)
            .map(|q| Enclosure::new(x.clone(), Float::new(RAD_PREC)).sub(&q))
            .ok_or(Error::DerivativeVanishes)?;
        if newton.is_subset_of(&cand) {
            return Ok(newton.with_bits(bits));
        }
        rho = rad_up(&rho * 16u32);
    }
    Err(Error::NoConvergence(NEWTON_BUDGET))
}

/// Exact sign of `p` at an integer point, used by callers that bracket roots.
pub fn sign_at_integer(p: &IntPoly, t: &Integer) -> std::cmp::Ordering {
    p.eval_integer(t).cmp0()
}
