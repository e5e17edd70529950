//! Oracles written independently of the library: terms come from the plain
//! matrix product `x_{k+2} = x_k M_k x_{k+1}`.
#![allow(dead_code)]

use rug::{Integer, Rational};

pub type Mat = [[Integer; 2]; 2];

fn mul(a: &Mat, b: &Mat) -> Mat {
    let e = |i: usize, j: usize| Integer::from(&a[i][0] * &b[0][j]) + Integer::from(&a[i][1] * &b[1][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn m(k: usize) -> Mat {
    let s: i32 = if k.is_multiple_of(2) { 1 } else { -1 };
    [[Integer::from(3), Integer::from(s)], [Integer::from(-s), Integer::from(0)]]
}

/// `x_1 .. x_n` as full matrices, canonical seed.
pub fn terms(n: usize) -> Vec<Mat> {
    let i = |v: i32| Integer::from(v);
    let mut t: Vec<Mat> = vec![[[i(1), i(0)], [i(0), i(1)]], [[i(1), i(1)], [i(1), i(2)]]];
    while t.len() < n {
        let k = t.len() - 1;
        let next = mul(&mul(&t[k - 1], &m(k)), &t[k]);
        t.push(next);
    }
    t
}

/// `x_{k,1} / x_{k,0}`, within `X_k^-2` of xi.
pub fn xi_rational(k: usize) -> Rational {
    let t = terms(k);
    Rational::from((t[k - 1][0][1].clone(), t[k - 1][0][0].clone()))
}

pub fn xi_f64() -> f64 {
    xi_rational(12).to_f64()
}

/// Distance to the nearest integer.
pub fn dist(x: f64) -> f64 {
    (x - x.round()).abs()
}
