use std::cmp::Ordering;
use std::fmt;

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Precision of radii. Radii only need a few correct bits, but their exponent
/// range must be MPFR's.
pub const RAD_PREC: u32 = 64;

/// Smallest precision accepted for centers.
pub const MIN_PREC: u32 = 64;

pub(crate) fn rad_up<T>(val: T) -> Float
where
    Float: rug::Assign<T> + rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(RAD_PREC, val, Round::Up).0
}

fn rad_add(a: &Float, b: &Float) -> Float {
    rad_up(a + b)
}

fn rad_mul(a: &Float, b: &Float) -> Float {
    rad_up(a * b)
}

fn abs_up(x: &Float) -> Float {
    rad_up(x.as_abs().clone())
}

fn abs_down(x: &Float) -> Float {
    Float::with_val_round(RAD_PREC, x.as_abs().clone(), Round::Down).0
}

/// Bound on the rounding error of a center rounded to nearest at `prec`.
fn ulp(c: &Float, prec: u32) -> Float {
    match c.get_exp() {
        Some(e) => Float::with_val(RAD_PREC, 1) << (e - prec as i32),
        None => Float::with_val(RAD_PREC, 0),
    }
}

/// A real number known to lie in `[center - radius, center + radius]`.
///
/// Centers are rounded to nearest at the working precision; radii are
/// rounded up and absorb every center rounding error, so no operation can
/// lose the represented value.
#[derive(Clone, PartialEq)]
pub struct Enclosure {
    center: Float,
    radius: Float,
    bits: u32,
}

impl Enclosure {
    /// Builds an enclosure from parts. The center keeps its own precision.
    pub fn new(center: Float, radius: Float) -> Self {
        let bits = center.prec();
        let radius = abs_up(&radius);
        Enclosure {
            center,
            radius,
            bits,
        }
    }

    pub fn zero(bits: u32) -> Self {
        Self::new(Float::new(bits.max(MIN_PREC)), Float::new(RAD_PREC))
    }

    /// Encloses an integer; exact when it fits in `bits`.
    pub fn from_integer(n: &Integer, bits: u32) -> Self {
        let bits = bits.max(MIN_PREC);
        let (center, ord) = Float::with_val_round(bits, n, Round::Nearest);
        let radius = if ord == Ordering::Equal {
            Float::new(RAD_PREC)
        } else {
            ulp(&center, bits)
        };
        Enclosure {
            center,
            radius,
            bits,
        }
    }

    /// Encloses an integer exactly, widening the precision as needed.
    pub fn exact_integer(n: &Integer, bits: u32) -> Self {
        let need = n.significant_bits().max(bits).max(MIN_PREC);
        Self::from_integer(n, need)
    }

    pub fn from_rational(q: &Rational, bits: u32) -> Self {
        let bits = bits.max(MIN_PREC);
        let (center, ord) = Float::with_val_round(bits, q, Round::Nearest);
        let radius = if ord == Ordering::Equal {
            Float::new(RAD_PREC)
        } else {
            ulp(&center, bits)
        };
        Enclosure {
            center,
            radius,
            bits,
        }
    }

    pub fn from_f64(x: f64, radius: f64, bits: u32) -> Self {
        let bits = bits.max(MIN_PREC);
        Self::new(Float::with_val(bits, x), rad_up(radius))
    }

    /// Rational `q` widened by a rational radius `r`.
    pub fn from_rational_radius(q: &Rational, r: &Rational, bits: u32) -> Self {
        let mut e = Self::from_rational(q, bits);
        e.radius = rad_add(&e.radius, &rad_up(r));
        e
    }

    pub fn center(&self) -> &Float {
        &self.center
    }

    pub fn radius(&self) -> &Float {
        &self.radius
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Same enclosure with extra radius.
    pub fn inflate(&self, extra: &Float) -> Self {
        let mut out = self.clone();
        out.radius = rad_add(&out.radius, &abs_up(extra));
        out
    }

    /// Lower endpoint as an exact rational.
    pub fn lo_rational(&self) -> Rational {
        self.center.to_rational().unwrap_or_default()
            - self.radius.to_rational().unwrap_or_default()
    }

    /// Upper endpoint as an exact rational.
    pub fn hi_rational(&self) -> Rational {
        self.center.to_rational().unwrap_or_default()
            + self.radius.to_rational().unwrap_or_default()
    }

    pub fn contains_rational(&self, q: &Rational) -> bool {
        let d = q - self.center.to_rational().unwrap_or_default() ;
        d.abs() <= self.radius.to_rational().unwrap_or_default()
    }

    pub fn contains_zero(&self) -> bool {
        abs_down(&self.center) <= self.radius
    }

    /// Whether every point is strictly positive (or negative).
    pub fn sign(&self) -> Option<Ordering> {
        if self.contains_zero() {
            None
        } else if self.center.is_sign_positive() {
            Some(Ordering::Greater)
        } else {
            Some(Ordering::Less)
        }
    }

    pub fn intersects(&self, other: &Enclosure) -> bool {
        let gap = (self.center.to_rational().unwrap_or_default() - other.center.to_rational().unwrap_or_default())
        .abs();
        gap <= self.radius.to_rational().unwrap_or_default()
            + other.radius.to_rational().unwrap_or_default()
    }

    pub fn is_subset_of(&self, other: &Enclosure) -> bool {
        self.lo_rational() >= other.lo_rational() && self.hi_rational() <= other.hi_rational()
    }

    /// Upper bound on `|x|` over the enclosure.
    pub fn abs_upper(&self) -> Float {
        rad_add(&abs_up(&self.center), &self.radius)
    }

    /// Lower bound on `|x|` (zero when the enclosure contains zero).
    pub fn abs_lower(&self) -> Float {
        let c = abs_down(&self.center);
        if c <= self.radius {
            Float::new(RAD_PREC)
        } else {
            Float::with_val_round(RAD_PREC, &c - &self.radius, Round::Down).0
        }
    }

    /// `log2` of the radius (`-inf` for exact values).
    pub fn radius_log2(&self) -> f64 {
        if self.radius.is_zero() {
            f64::NEG_INFINITY
        } else {
            let (m, e) = self.radius.to_f64_exp();
            m.log2() + e as f64
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.center.to_f64()
    }

    pub fn radius_f64(&self) -> f64 {
        self.radius.to_f64_round(Round::Up)
    }

    /// Rounds the center to `bits`, absorbing the error into the radius.
    pub fn with_bits(&self, bits: u32) -> Self {
        let bits = bits.max(MIN_PREC);
        let (center, ord) = Float::with_val_round(bits, &self.center, Round::Nearest);
        let mut radius = self.radius.clone();
        if ord != Ordering::Equal {
            radius = rad_add(&radius, &ulp(&center, bits));
        }
        Enclosure {
            center,
            radius,
            bits,
        }
    }

    fn finish(center: Float, radius: Float, bits: u32, exact: bool) -> Self {
        let radius = if exact {
            radius
        } else {
            rad_add(&radius, &ulp(&center, bits))
        };
        Enclosure {
            center,
            radius,
            bits,
        }
    }

    pub fn add(&self, rhs: &Enclosure) -> Self {
        let bits = self.bits.max(rhs.bits);
        let (c, ord) = Float::with_val_round(bits, &self.center + &rhs.center, Round::Nearest);
        Self::finish(c, rad_add(&self.radius, &rhs.radius), bits, ord == Ordering::Equal)
    }

    pub fn sub(&self, rhs: &Enclosure) -> Self {
        let bits = self.bits.max(rhs.bits);
        let (c, ord) = Float::with_val_round(bits, &self.center - &rhs.center, Round::Nearest);
        Self::finish(c, rad_add(&self.radius, &rhs.radius), bits, ord == Ordering::Equal)
    }

    pub fn neg(&self) -> Self {
        Enclosure {
            center: Float::with_val(self.bits, -&self.center),
            radius: self.radius.clone(),
            bits: self.bits,
        }
    }

    pub fn abs(&self) -> Self {
        if self.center.is_sign_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn mul(&self, rhs: &Enclosure) -> Self {
        let bits = self.bits.max(rhs.bits);
        let (c, ord) = Float::with_val_round(bits, &self.center * &rhs.center, Round::Nearest);
        let r = rad_add(
            &rad_add(
                &rad_mul(&abs_up(&self.center), &rhs.radius),
                &rad_mul(&abs_up(&rhs.center), &self.radius),
            ),
            &rad_mul(&self.radius, &rhs.radius),
        );
        Self::finish(c, r, bits, ord == Ordering::Equal)
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::from_integer(&Integer::from(1), self.bits);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Division; `None` when the divisor may vanish.
    pub fn div(&self, rhs: &Enclosure) -> Option<Self> {
        let denom_lo = rhs.abs_lower();
        if denom_lo.is_zero() {
            return None;
        }
        let bits = self.bits.max(rhs.bits);
        let (c, ord) = Float::with_val_round(bits, &self.center / &rhs.center, Round::Nearest);
        // |a/b - ca/cb| <= (ra + |ca/cb| rb) / (|cb| - rb)
        let num = rad_add(&self.radius, &rad_mul(&abs_up(&c), &rhs.radius));
        let num = rad_add(&num, &rad_mul(&ulp(&c, bits), &rhs.abs_upper()));
        let r = rad_up(&num / &denom_lo);
        Some(Self::finish(c, r, bits, ord == Ordering::Equal))
    }

    /// Multiplication by an exact integer.
    pub fn mul_int(&self, n: &Integer) -> Self {
        let (c, ord) = Float::with_val_round(self.bits, &self.center * n, Round::Nearest);
        let r = rad_mul(&self.radius, &rad_up(n.as_abs().clone()));
        Self::finish(c, r, self.bits, ord == Ordering::Equal)
    }

    /// Multiplication by an exact integer at a precision raised by the
    /// integer's size, so relative accuracy is kept.
    pub fn mul_int_widen(&self, n: &Integer) -> Self {
        let bits = self.bits + n.significant_bits();
        self.with_bits(bits).mul_int(n)
    }

    /// Addition of an exact integer, widening precision so the shift is exact
    /// relative to the fractional part.
    pub fn add_int(&self, n: &Integer) -> Self {
        let bits = self.bits + n.significant_bits();
        let (c, ord) = Float::with_val_round(bits, &self.center + n, Round::Nearest);
        Self::finish(c, self.radius.clone(), bits, ord == Ordering::Equal)
    }

    /// Division by an exact nonzero integer.
    pub fn div_int(&self, n: &Integer) -> Self {
        assert!(*n != 0, "division by zero");
        let (c, ord) = Float::with_val_round(self.bits, &self.center / n, Round::Nearest);
        let r = rad_up(&self.radius / &Float::with_val_round(RAD_PREC, n.as_abs().clone(), Round::Down).0);
        Self::finish(c, r, self.bits, ord == Ordering::Equal)
    }

    /// Smallest enclosure containing both.
    pub fn hull(&self, other: &Enclosure) -> Self {
        let bits = self.bits.max(other.bits);
        let lo = self.lo_rational().min(other.lo_rational());
        let hi = self.hi_rational().max(other.hi_rational());
        let mid = Rational::from(&lo + &hi) / 2;
        let half = Rational::from(&hi - &lo) / 2;
        Self::from_rational_radius(&mid, &half, bits)
    }

    /// Decimal rendering with enough digits to reflect the radius.
    pub fn decimal_center(&self) -> String {
        self.center
            .to_string_radix(10, Some(self.display_digits()))
    }

    /// Radius after accounting for the truncation in [`Self::decimal_center`].
    pub fn decimal_radius(&self) -> String {
        let digits = self.display_digits();
        let trunc = match self.center.get_exp() {
            Some(e) => {
                let exp10 = ((e as f64) * std::f64::consts::LOG10_2).ceil() as i32 + 1;
                Float::with_val(RAD_PREC, 10).pow(exp10 - digits as i32)
            }
            None => Float::new(RAD_PREC),
        };
        let r = rad_add(&self.radius, &trunc);
        r.to_string_radix_round(10, Some(6), Round::Up)
    }

    fn display_digits(&self) -> usize {
        let c_log = match self.center.get_exp() {
            Some(e) => e as f64 * std::f64::consts::LOG10_2,
            None => 0.0,
        };
        let r_log = self.radius_log2() * std::f64::consts::LOG10_2;
        let want = if r_log.is_finite() { c_log - r_log + 3.0 } else { 40.0 };
        want.clamp(17.0, 60.0) as usize
    }
}

impl fmt::Debug for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ± {} [{} bits]",
            self.center.to_string_radix(10, Some(20)),
            self.radius.to_string_radix_round(10, Some(3), Round::Up),
            self.bits
        )
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {}", self.decimal_center(), self.decimal_radius())
    }
}

impl Serialize for Enclosure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Enclosure", 3)?;
        st.serialize_field("center", &self.decimal_center())?;
        st.serialize_field("radius", &self.decimal_radius())?;
        st.serialize_field("bits", &self.bits)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn rational_round_trip_contains() {
        let e = Enclosure::from_rational(&q(1, 3), 80);
        assert!(e.contains_rational(&q(1, 3)));
        assert!(!e.radius().is_zero());
        let e = Enclosure::from_rational(&q(3, 4), 80);
        assert!(e.radius().is_zero());
    }

    #[test]
    fn arithmetic_contains_exact_results() {
        let a = Enclosure::from_rational(&q(1, 3), 70);
        let b = Enclosure::from_rational(&q(-2, 7), 70);
        assert!(a.add(&b).contains_rational(&(q(1, 3) + q(-2, 7))));
        assert!(a.sub(&b).contains_rational(&(q(1, 3) - q(-2, 7))));
        assert!(a.mul(&b).contains_rational(&(q(1, 3) * q(-2, 7))));
        assert!(a.div(&b).unwrap().contains_rational(&(q(1, 3) / q(-2, 7))));
        assert!(a.pow(5).contains_rational(&q(1, 243)));
        let n = Integer::from(10).pow(40);
        let big = a.mul_int(&n);
        assert!(big.contains_rational(&(q(1, 3) * Rational::from(&n))));
        assert!(a.div_int(&Integer::from(7)).contains_rational(&q(1, 21)));
    }

    #[test]
    fn division_by_interval_containing_zero() {
        let a = Enclosure::from_f64(1.0, 0.0, 64);
        let b = Enclosure::from_f64(0.001, 0.01, 64);
        assert!(b.contains_zero());
        assert!(a.div(&b).is_none());
    }

    #[test]
    fn hull_and_subset() {
        let a = Enclosure::from_f64(1.0, 0.1, 64);
        let b = Enclosure::from_f64(1.5, 0.1, 64);
        let h = a.hull(&b);
        assert!(a.is_subset_of(&h) && b.is_subset_of(&h));
        assert!(!a.intersects(&b));
    }

    #[test]
    fn decimal_output_keeps_containment() {
        let e = Enclosure::from_rational(&q(22095, 37666), 200).inflate(&Float::with_val(64, 1e-30));
        let c = Float::with_val(400, Float::parse(e.decimal_center()).unwrap())
            .to_rational()
            .unwrap();
        let r = Float::with_val(64, Float::parse(e.decimal_radius()).unwrap())
            .to_rational()
            .unwrap();
        let gap = (c - q(22095, 37666)).abs();
        assert!(gap <= r);
    }
}
