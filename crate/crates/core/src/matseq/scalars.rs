use rug::Integer;
use serde::Serialize;

use super::poly::q_polynomial;
use super::sequence::{MarkoffSequence, TermsView};
use crate::error::{Error, Result};
use crate::parity_sign;

/// The integers `A_k .. F_k` approximated by `xi`-multiples of sequence entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedScalars {
    pub k: usize,
    #[serde(with = "crate::serde_int")]
    pub a: Integer,
    #[serde(with = "crate::serde_int")]
    pub b: Integer,
    #[serde(with = "crate::serde_int")]
    pub c: Integer,
    #[serde(with = "crate::serde_int")]
    pub d: Integer,
    #[serde(with = "crate::serde_int")]
    pub e: Integer,
    #[serde(with = "crate::serde_int")]
    pub f: Integer,
}

fn prod(a: &Integer, b: &Integer) -> Integer {
    Integer::from(a * b)
}

/// `A_k = x_{k,1}x_{k+2,2} - (-1)^k x_{k+1,2}`
pub fn a_k(v: &TermsView, k: usize) -> Integer {
    prod(v.x(k, 1), v.x(k + 2, 2)) - v.x(k + 1, 2) * parity_sign(k)
}

/// `B_k = x_{k,2}x_{k+2,2} - 3x_{k+1,2}`
pub fn b_k(v: &TermsView, k: usize) -> Integer {
    prod(v.x(k, 2), v.x(k + 2, 2)) - v.x(k + 1, 2) * 3
}

/// `C_k = x_{k,1}x_{k+1,2} - (-1)^k x_{k-1,2}`
pub fn c_k(v: &TermsView, k: usize) -> Integer {
    prod(v.x(k, 1), v.x(k + 1, 2)) - v.x(k - 1, 2) * parity_sign(k)
}

/// `D_k = x_{k,2}x_{k+1,2} - 3x_{k-1,2}`
pub fn d_k(v: &TermsView, k: usize) -> Integer {
    prod(v.x(k, 2), v.x(k + 1, 2)) - v.x(k - 1, 2) * 3
}

/// `E_k = x_{k,1}x_{k+4,2} - 3(-1)^k x_{k+1,0}x_{k+3,2} - (-1)^k x_{k+2,2}`
pub fn e_k(v: &TermsView, k: usize) -> Integer {
    let s = parity_sign(k);
    prod(v.x(k, 1), v.x(k + 4, 2)) - prod(v.x(k + 1, 0), v.x(k + 3, 2)) * (3 * s)
        - v.x(k + 2, 2) * s
}

/// `F_k = x_{k,2}x_{k+4,2} - 3(3x_{k+1,0} + (-1)^k x_{k+1,1})x_{k+3,2}`
pub fn f_k(v: &TermsView, k: usize) -> Integer {
    let inner = Integer::from(v.x(k + 1, 0) * 3) + v.x(k + 1, 1) * parity_sign(k);
    prod(v.x(k, 2), v.x(k + 4, 2)) - prod(&inner, v.x(k + 3, 2)) * 3
}

pub fn derived_scalars(seq: &MarkoffSequence, k: usize) -> Result<DerivedScalars> {
    if k < 2 {
        return Err(Error::IndexOutOfRange(format!(
            "derived scalars need k >= 2, got {k}"
        )));
    }
    let v = seq.view(k + 4)?;
    Ok(DerivedScalars {
        k,
        a: a_k(&v, k),
        b: b_k(&v, k),
        c: c_k(&v, k),
        d: d_k(&v, k),
        e: e_k(&v, k),
        f: f_k(&v, k),
    })
}

/// The three quantities equated by the gcd/content theorem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GcdReport {
    pub k: usize,
    #[serde(with = "crate::serde_int")]
    pub g_a: Integer,
    #[serde(with = "crate::serde_int")]
    pub g_e: Integer,
    #[serde(with = "crate::serde_int")]
    pub content_q: Integer,
    pub all_equal: bool,
    pub in_range: bool,
}

/// `gcd(x_{k,0}, A_k)`, `gcd(x_{k,0}, E_k)` and `cont(Q_{k+1})`.
pub fn gcd_content_check(seq: &MarkoffSequence, k: usize) -> Result<GcdReport> {
    let sc = derived_scalars(seq, k)?;
    let x0 = seq.view(k)?.x(k, 0).clone();
    let g_a = x0.clone().gcd(&sc.a);
    let g_e = x0.gcd(&sc.e);
    let content_q = q_polynomial(seq, k + 1)?.content().clone();
    let all_equal = g_a == g_e && g_e == content_q;
    let in_range = [&g_a, &g_e, &content_q].iter().all(|g| **g == 1 || **g == 2);
    Ok(GcdReport {
        k,
        g_a,
        g_e,
        content_q,
        all_equal,
        in_range,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars_at_three() {
        let seq = MarkoffSequence::canonical();
        let s = derived_scalars(&seq, 3).unwrap();
        let got: Vec<i64> = [&s.a, &s.b, &s.c, &s.d, &s.e, &s.f]
            .iter()
            .map(|n| n.to_i64().unwrap())
            .collect();
        assert_eq!(got, [12, 4, 4, -4, 15206, 7597]);
        assert_eq!(derived_scalars(&seq, 2).unwrap().a, 1);
    }

    #[test]
    fn gcd_at_two_and_three() {
        let seq = MarkoffSequence::canonical();
        let r = gcd_content_check(&seq, 3).unwrap();
        assert!(r.all_equal && r.in_range);
        assert_eq!(r.g_a, 2);
        let r = gcd_content_check(&seq, 2).unwrap();
        assert!(r.all_equal);
        assert_eq!(r.content_q, 1);
    }
}
