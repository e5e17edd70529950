use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};
use serde::{Serialize, Serializer};

use super::sequence::{MarkoffSequence, TermsView};
use crate::error::{Error, Result};
use crate::parity_sign;

static ZERO: Integer = Integer::ZERO;

/// Integer polynomial with ascending coefficients, trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct IntPoly {
    coeffs: Vec<Integer>,
    norm: Integer,
    content: Integer,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        let mut norm = Integer::new();
        let mut content = Integer::new();
        for c in &coeffs {
            if c.as_abs().cmp(&norm).is_gt() {
                norm = c.as_abs().clone();
            }
            content.gcd_mut(c);
        }
        IntPoly {
            coeffs,
            norm,
            content,
        }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Integer::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn constant(c: impl Into<Integer>) -> Self {
        Self::new(vec![c.into()])
    }

    /// `c T^deg`
    pub fn monomial(deg: usize, c: impl Into<Integer>) -> Self {
        let mut coeffs = vec![Integer::new(); deg + 1];
        coeffs[deg] = c.into();
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    /// Coefficient of `T^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> &Integer {
        self.coeffs.get(i).unwrap_or(&ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> &Integer {
        self.coeffs.last().unwrap_or(&ZERO)
    }

    /// Largest absolute coefficient.
    pub fn norm(&self) -> &Integer {
        &self.norm
    }

    /// Gcd of the coefficients; zero only for the zero polynomial.
    pub fn content(&self) -> &Integer {
        &self.content
    }

    /// `P / cont(P)`, made to have a positive leading coefficient.
    pub fn primitive(&self) -> IntPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content.clone();
        if *self.leading() < 0 {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| Integer::from(c.div_exact_ref(&g))).collect())
    }

    pub fn add(&self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new((0..n).map(|i| Integer::from(self.coeff(i) + rhs.coeff(i))).collect())
    }

    pub fn sub(&self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new((0..n).map(|i| Integer::from(self.coeff(i) - rhs.coeff(i))).collect())
    }

    pub fn scale(&self, s: &Integer) -> IntPoly {
        Self::new(self.coeffs.iter().map(|c| Integer::from(c * s)).collect())
    }

    pub fn mul(&self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Integer::new(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn derivative(&self) -> IntPoly {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Integer::from(c * i as u32))
                .collect(),
        )
    }

    /// Exact value at a rational point (Horner).
    pub fn eval_rational(&self, t: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= t;
            acc += c;
        }
        acc
    }

    pub fn eval_integer(&self, t: &Integer) -> Integer {
        let mut acc = Integer::new();
        for c in self.coeffs.iter().rev() {
            acc *= t;
            acc += c;
        }
        acc
    }

    /// Whether `divisor` divides `self` in `Q[T]`, i.e. up to integer factors.
    pub fn divisible_by(&self, divisor: &IntPoly) -> bool {
        let Some(dd) = divisor.degree() else {
            return self.is_zero();
        };
        let mut rem: Vec<Rational> = self.coeffs.iter().map(Rational::from).collect();
        let lead = Rational::from(divisor.leading());
        while rem.len() > dd {
            let top = rem.pop().expect("nonempty");
            if top == 0 {
                continue;
            }
            let q = top / &lead;
            let shift = rem.len() - dd;
            for (i, c) in divisor.coeffs.iter().take(dd).enumerate() {
                rem[shift + i] -= Rational::from(&q * c);
            }
        }
        rem.iter().all(|c| *c == 0)
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let neg = *c < 0;
            let abs = c.as_abs();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let unit = *abs == 1 && i > 0;
            if !unit {
                write!(f, "{}", *abs)?;
            }
            match i {
                0 => {}
                1 => write!(f, "T")?,
                _ => write!(f, "T^{i}")?,
            }
        }
        Ok(())
    }
}

/// Parses the display form, e.g. `-2T^2 + 8T - 4`; `x` and `*` are accepted.
impl FromStr for IntPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Config(format!("cannot parse polynomial `{s}`: {why}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace() && *c != '*').collect();
        if compact.is_empty() {
            return Err(bad("empty"));
        }
        let mut coeffs: Vec<Integer> = Vec::new();
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, c) in compact.char_indices() {
            if (c == '+' || c == '-') && i > start && !compact[..i].ends_with('^') {
                terms.push(&compact[start..i]);
                start = i;
            }
        }
        terms.push(&compact[start..]);
        for term in terms {
            let (neg, body) = match term.as_bytes().first() {
                Some(b'-') => (true, &term[1..]),
                Some(b'+') => (false, &term[1..]),
                _ => (false, term),
            };
            let var = body.find(['T', 't', 'x', 'X']);
            let (coef, deg) = match var {
                None => (body, 0usize),
                Some(at) => {
                    let rest = &body[at + 1..];
                    let deg = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^')
                            .and_then(|d| d.parse().ok())
                            .ok_or_else(|| bad("bad exponent"))?
                    };
                    (&body[..at], deg)
                }
            };
            let mut c = if coef.is_empty() {
                if var.is_none() {
                    return Err(bad("empty term"));
                }
                Integer::from(1)
            } else {
                coef.parse::<Integer>().map_err(|_| bad("bad coefficient"))?
            };
            if neg {
                c = -c;
            }
            if coeffs.len() <= deg {
                coeffs.resize(deg + 1, Integer::new());
            }
            coeffs[deg] += c;
        }
        Ok(IntPoly::new(coeffs))
    }
}

impl Serialize for IntPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::serde_int::vec::serialize(&self.coeffs, s)
    }
}

/// `Q_k(T) = det((1, T, T^2); x_k; x_{k+1})`.
pub fn q_polynomial(seq: &MarkoffSequence, k: usize) -> Result<IntPoly> {
    if k == 0 {
        return Err(Error::IndexOutOfRange("Q_k needs k >= 1".into()));
    }
    let v = seq.view(k + 1)?;
    let (a, b) = (v.mat(k), v.mat(k + 1));
    let minor = |i: usize, j: usize| {
        Integer::from(a.entry(i) * b.entry(j)) - Integer::from(a.entry(j) * b.entry(i))
    };
    Ok(IntPoly::new(vec![minor(1, 2), -minor(0, 2), minor(0, 1)]))
}

/// `lead(Q_k) - (-1)^{k-1} x_{k-1,0}`, zero when the leading-coefficient
/// formula holds.
pub fn q_lead_residual(seq: &MarkoffSequence, k: usize) -> Result<Integer> {
    if k < 2 {
        return Err(Error::IndexOutOfRange("leading coefficient check needs k >= 2".into()));
    }
    let v = seq.view(k + 1)?;
    let lead = Integer::from(v.x(k, 0) * v.x(k + 1, 1)) - Integer::from(v.x(k, 1) * v.x(k + 1, 0));
    Ok(lead + v.x(k - 1, 0) * parity_sign(k))
}

/// `x_{k-1,0} Q_k - x_{k,0} Q_{k+1} + x_{k+1,0} Q_{k-1}`, expected to be the
/// constant `-2(-1)^k`.
pub fn three_term_residual(seq: &MarkoffSequence, k: usize) -> Result<IntPoly> {
    if k < 2 {
        return Err(Error::IndexOutOfRange("three-term relation needs k >= 2".into()));
    }
    let v = seq.view(k + 2)?;
    let (qm, q, qp) = (
        q_polynomial(seq, k - 1)?,
        q_polynomial(seq, k)?,
        q_polynomial(seq, k + 1)?,
    );
    Ok(three_term_combination(&v, k, [&qm, &q, &qp]))
}

/// The three-term combination from precomputed `Q_{k-1}, Q_k, Q_{k+1}`.
pub fn three_term_combination(v: &TermsView, k: usize, q: [&IntPoly; 3]) -> IntPoly {
    let [qm, q, qp] = q;
    q.scale(v.x(k - 1, 0))
        .sub(&qp.scale(v.x(k, 0)))
        .add(&qm.scale(v.x(k + 1, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_and_measures() {
        let p = IntPoly::from_i64(&[-4, 8, -2, 0, 0]);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(*p.norm(), 8);
        assert_eq!(*p.content(), 2);
        assert_eq!(p.primitive(), IntPoly::from_i64(&[2, -4, 1]));
        assert!(IntPoly::from_i64(&[0, 0]).is_zero());
        assert_eq!(*IntPoly::zero().content(), 0);
    }

    #[test]
    fn display() {
        assert_eq!(IntPoly::from_i64(&[-7, 9, 5]).to_string(), "5T^2 + 9T - 7");
        assert_eq!(IntPoly::from_i64(&[-1, 3, -1]).to_string(), "-T^2 + 3T - 1");
        assert_eq!(IntPoly::zero().to_string(), "0");
    }

    #[test]
    fn arithmetic() {
        let p = IntPoly::from_i64(&[-1, 1]);
        let q = IntPoly::from_i64(&[1, 1]);
        assert_eq!(p.mul(&q), IntPoly::from_i64(&[-1, 0, 1]));
        assert_eq!(p.mul(&q).derivative(), IntPoly::from_i64(&[0, 2]));
        assert!(p.mul(&q).divisible_by(&p.scale(&Integer::from(3))));
        assert!(!IntPoly::from_i64(&[1, 0, 1]).divisible_by(&p));
        let half = Rational::from((1, 2));
        assert_eq!(p.mul(&q).eval_rational(&half), Rational::from((-3, 4)));
    }

    #[test]
    fn canonical_q_polynomials() {
        let seq = MarkoffSequence::canonical();
        let cases: [(usize, [i64; 3]); 4] = [
            (2, [-1, 3, -1]),
            (3, [-1, 1, 1]),
            (4, [-4, 8, -2]),
            (5, [-7, 9, 5]),
        ];
        for (k, c) in cases {
            assert_eq!(q_polynomial(&seq, k).unwrap(), IntPoly::from_i64(&c), "Q_{k}");
        }
        assert_eq!(*q_polynomial(&seq, 4).unwrap().content(), 2);
    }

    #[test]
    fn three_term_at_three() {
        let seq = MarkoffSequence::canonical();
        assert_eq!(three_term_residual(&seq, 3).unwrap(), IntPoly::constant(2));
        assert_eq!(q_lead_residual(&seq, 5).unwrap(), 0);
    }

    #[test]
    fn parses_display_form() {
        for c in [&[-4, 8, -2][..], &[0, 0, 0, 1], &[-7, 9, 5], &[1, -1], &[0]] {
            let p = IntPoly::from_i64(c);
            assert_eq!(p.to_string().parse::<IntPoly>().unwrap(), p);
        }
        assert_eq!("2*x^3 - x".parse::<IntPoly>().unwrap(), IntPoly::from_i64(&[0, -1, 0, 2]));
        assert!("T^".parse::<IntPoly>().is_err());
        assert!("3y".parse::<IntPoly>().is_err());
    }
}
