use std::cmp::Ordering;

use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use super::enclosure::{Enclosure, RAD_PREC};
use crate::error::{Error, Result};

/// Distance to the nearest integer, `{x}` in the multiplicative notation.
#[derive(Clone, Debug, Serialize)]
pub struct FracResult {
    pub frac: Enclosure,
    /// `None` when the enclosure straddles a half-integer.
    #[serde(serialize_with = "ser_opt_int")]
    pub nearest: Option<Integer>,
}

fn ser_opt_int<S: serde::Serializer>(n: &Option<Integer>, s: S) -> Result<S::Ok, S::Error> {
    match n {
        Some(n) => s.serialize_some(&n.to_string()),
        None => s.serialize_none(),
    }
}

impl FracResult {
    pub fn is_ambiguous(&self) -> bool {
        self.nearest.is_none()
    }
}

/// Encloses the distance from the enclosed real to the nearest integer.
pub fn frac_nearest(e: &Enclosure) -> Result<FracResult> {
    let quarter = Float::with_val(RAD_PREC, 0.25);
    if *e.radius() >= quarter {
        return Err(Error::RadiusTooLarge(format!("radius {}", e.radius_f64())));
    }
    let n = e
        .center()
        .to_integer()
        .expect("finite center rounds to an integer");
    // exact: |d| <= 1/2 and d has no bits below the center's last bit
    let d = Float::with_val(e.bits() + 2, e.center() - &n);
    let r = e.radius();
    let half = Float::with_val(RAD_PREC, 0.5);
    let hi = Float::with_val_round(e.bits() + 2, d.as_abs().clone() + r, Round::Up).0;
    if hi < half {
        let frac = Enclosure::new(Float::with_val(e.bits(), d.as_abs().clone()), r.clone());
        return Ok(FracResult {
            frac,
            nearest: Some(n),
        });
    }
    // the enclosure reaches a half-integer: distance lies in [lo, 1/2]
    let rr = r.to_rational().unwrap_or_default();
    let dq = d.to_rational().unwrap_or_default();
    let dist = |x: Rational| -> Rational {
        let n = Integer::from(x.round_ref());
        Rational::from(&x - &n).abs()
    };
    let lo = dist(Rational::from(&dq - &rr)).min(dist(Rational::from(&dq + &rr)));
    let half_q = Rational::from((1, 2));
    let mid = Rational::from(&lo + &half_q) / 2;
    let rad = Rational::from(&half_q - &lo) / 2;
    let frac = Enclosure::from_rational_radius(&mid, &rad, e.bits());
    Ok(FracResult {
        frac,
        nearest: None,
    })
}

/// `{x}` for an exact rational.
pub fn frac_rational(x: &Rational) -> (Rational, Integer) {
    let n = Integer::from(x.round_ref());
    let f = Rational::from(x - &n).abs();
    (f, n)
}

/// Lower bound of the fractional distance, as `f64` rounded down.
pub fn frac_lower_f64(f: &FracResult) -> f64 {
    let lo = f.frac.lo_rational();
    if lo.cmp0() == Ordering::Less {
        0.0
    } else {
        lo.to_f64()
    }
}
