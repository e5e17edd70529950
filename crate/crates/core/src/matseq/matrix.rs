use std::fmt;

use rug::Integer;
use serde::Serialize;

use crate::error::{Error, Result};

/// A general 2x2 integer matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat2(pub [Integer; 4]);

impl Mat2 {
    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2([a.into(), b.into(), c.into(), d.into()])
    }

    pub fn identity() -> Self {
        Self::from_i64(1, 0, 0, 1)
    }

    /// `J = [[0, 1], [-1, 0]]`
    pub fn j() -> Self {
        Self::from_i64(0, 1, -1, 0)
    }

    /// `P = [[3, 0], [0, 0]]`
    pub fn p() -> Self {
        Self::from_i64(3, 0, 0, 0)
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let [a, b, c, d] = &self.0;
        let [e, f, g, h] = &rhs.0;
        Mat2([
            Integer::from(a * e) + Integer::from(b * g),
            Integer::from(a * f) + Integer::from(b * h),
            Integer::from(c * e) + Integer::from(d * g),
            Integer::from(c * f) + Integer::from(d * h),
        ])
    }

    pub fn sub(&self, rhs: &Mat2) -> Mat2 {
        let mut out = self.clone();
        for (o, r) in out.0.iter_mut().zip(rhs.0.iter()) {
            *o -= r;
        }
        out
    }

    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        let mut out = self.clone();
        for (o, r) in out.0.iter_mut().zip(rhs.0.iter()) {
            *o += r;
        }
        out
    }

    pub fn scale(&self, s: &Integer) -> Mat2 {
        Mat2(self.0.clone().map(|e| e * s))
    }

    pub fn neg(&self) -> Mat2 {
        Mat2(self.0.clone().map(|e| -e))
    }

    pub fn det(&self) -> Integer {
        let [a, b, c, d] = &self.0;
        Integer::from(a * d) - Integer::from(b * c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|e| *e == 0)
    }
}

impl From<&SymMat2> for Mat2 {
    fn from(m: &SymMat2) -> Self {
        Mat2([m.x0.clone(), m.x1.clone(), m.x1.clone(), m.x2.clone()])
    }
}

/// Symmetric integer matrix `[[x0, x1], [x1, x2]]` of determinant one.
#[derive(Clone, PartialEq, Eq, Serialize)]
pub struct SymMat2 {
    #[serde(with = "crate::serde_int")]
    pub x0: Integer,
    #[serde(with = "crate::serde_int")]
    pub x1: Integer,
    #[serde(with = "crate::serde_int")]
    pub x2: Integer,
    #[serde(skip)]
    norm: Integer,
}

impl SymMat2 {
    /// Builds the matrix, rejecting anything whose determinant is not one.
    pub fn new(x0: Integer, x1: Integer, x2: Integer) -> Result<Self> {
        let det = Integer::from(&x0 * &x2) - Integer::from(x1.square_ref());
        if det != 1 {
            return Err(Error::InvariantViolation(format!(
                "determinant of [[{x0}, {x1}], [{x1}, {x2}]] is {det}, expected 1"
            )));
        }
        Ok(Self::new_unchecked(x0, x1, x2))
    }

    pub(crate) fn new_unchecked(x0: Integer, x1: Integer, x2: Integer) -> Self {
        let norm = x0
            .as_abs()
            .clone()
            .max(x1.as_abs().clone())
            .max(x2.as_abs().clone());
        SymMat2 { x0, x1, x2, norm }
    }

    pub fn from_i64(x0: i64, x1: i64, x2: i64) -> Result<Self> {
        Self::new(x0.into(), x1.into(), x2.into())
    }

    pub fn identity() -> Self {
        Self::new_unchecked(1.into(), 0.into(), 1.into())
    }

    /// Entry `x_j` for `j` in `0..3`.
    pub fn entry(&self, j: usize) -> &Integer {
        match j {
            0 => &self.x0,
            1 => &self.x1,
            2 => &self.x2,
            _ => panic!("symmetric matrix entry index {j} out of range"),
        }
    }

    pub fn entries(&self) -> [&Integer; 3] {
        [&self.x0, &self.x1, &self.x2]
    }

    /// `max(|x0|, |x1|, |x2|)`
    pub fn norm(&self) -> &Integer {
        &self.norm
    }

    pub fn det(&self) -> Integer {
        Integer::from(&self.x0 * &self.x2) - Integer::from(self.x1.square_ref())
    }

    /// Converts a general matrix, checking symmetry and determinant.
    pub fn try_from_mat(m: Mat2) -> Result<Self> {
        let [a, b, c, d] = m.0;
        if b != c {
            return Err(Error::InvariantViolation(format!(
                "generated matrix is not symmetric (off-diagonal entries differ by {})",
                Integer::from(&b - &c)
            )));
        }
        Self::new(a, b, d)
    }
}

impl fmt::Debug for SymMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.x0, self.x1, self.x1, self.x2)
    }
}

impl fmt::Display for SymMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The alternating matrix `M_k = P + (-1)^k J`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompanionMatrix {
    pub k_parity: u8,
}

impl CompanionMatrix {
    pub fn for_index(k: usize) -> Self {
        CompanionMatrix {
            k_parity: (k % 2) as u8,
        }
    }

    /// `(-1)^k`
    pub fn sign(&self) -> i64 {
        if self.k_parity == 0 {
            1
        } else {
            -1
        }
    }

    /// `[[3, 1], [-1, 0]]` for even `k`, `[[3, -1], [1, 0]]` for odd `k`.
    pub fn entries(&self) -> [i64; 4] {
        let s = self.sign();
        [3, s, -s, 0]
    }

    pub fn to_mat(&self) -> Mat2 {
        let [a, b, c, d] = self.entries();
        Mat2::from_i64(a, b, c, d)
    }

    /// `x * M` without general multiplication (the companion entries are tiny).
    pub fn right_mul(&self, x: &SymMat2) -> Mat2 {
        let s = self.sign();
        let three_x0 = Integer::from(&x.x0 * 3);
        let three_x1 = Integer::from(&x.x1 * 3);
        Mat2([
            three_x0 - Integer::from(&x.x1 * s),
            Integer::from(&x.x0 * s),
            three_x1 - Integer::from(&x.x2 * s),
            Integer::from(&x.x1 * s),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn companion_entries_alternate() {
        assert_eq!(CompanionMatrix::for_index(2).entries(), [3, 1, -1, 0]);
        assert_eq!(CompanionMatrix::for_index(1).entries(), [3, -1, 1, 0]);
        let m = CompanionMatrix::for_index(4).to_mat();
        assert_eq!(m, Mat2::p().add(&Mat2::j()));
        let m = CompanionMatrix::for_index(7).to_mat();
        assert_eq!(m, Mat2::p().sub(&Mat2::j()));
    }

    #[test]
    fn right_mul_matches_general_product() {
        let x = SymMat2::from_i64(29, 17, 10).unwrap();
        for k in 1..=2 {
            let c = CompanionMatrix::for_index(k);
            assert_eq!(c.right_mul(&x), Mat2::from(&x).mul(&c.to_mat()));
        }
    }

    #[test]
    fn rejects_wrong_determinant() {
        let err = SymMat2::from_i64(2, 1, 7).unwrap_err();
        assert_eq!(err.name(), "InvariantViolation");
        assert!(SymMat2::from_i64(5, 3, 2).is_ok());
    }

    #[test]
    fn norm_is_max_abs_entry() {
        let x = SymMat2::from_i64(2, -3, 5).unwrap();
        assert_eq!(*x.norm(), 5);
        let x = SymMat2::from_i64(-10, -7, -5).unwrap_or_else(|_| {
            SymMat2::new_unchecked((-10).into(), (-7).into(), (-5).into())
        });
        assert_eq!(*x.norm(), 10);
    }

    #[test]
    fn asymmetric_product_is_rejected() {
        let err = SymMat2::try_from_mat(Mat2::from_i64(1, 1, 0, 1)).unwrap_err();
        assert_eq!(err.name(), "InvariantViolation");
    }
}
