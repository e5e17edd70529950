use rug::Integer;
use serde::Serialize;

use super::matrix::{CompanionMatrix, Mat2};
use super::poly::{q_lead_residual, three_term_residual, IntPoly};
use super::sequence::{MarkoffSequence, TermsView};
use crate::error::{Error, Result};
use crate::parity_sign;

/// Shape of an identity's residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualKind {
    Scalar,
    Matrix,
    Poly,
}

/// Registry entry for an exact identity.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IdentityFamily {
    pub id: &'static str,
    pub description: &'static str,
    /// Smallest admissible `k`.
    pub min_k: usize,
    /// Largest offset beyond `k` read by the identity.
    pub footprint: usize,
    pub kind: ResidualKind,
}

const fn fam(
    id: &'static str,
    description: &'static str,
    min_k: usize,
    footprint: usize,
    kind: ResidualKind,
) -> IdentityFamily {
    IdentityFamily {
        id,
        description,
        min_k,
        footprint,
        kind,
    }
}

use ResidualKind::{Matrix, Poly, Scalar};

pub const FAMILIES: &[IdentityFamily] = &[
    fam("rec3", "x_{k+2} = 3 x_{k,0} x_{k+1} - x_{k-1}", 2, 2, Matrix),
    fam("c2.5", "x_{k,0}x_{k+1,1} = x_{k,1}x_{k+1,0} - (-1)^k x_{k-1,0}", 2, 1, Scalar),
    fam("c2.6", "x_{k,0}x_{k+1,2} = x_{k,1}x_{k+1,1} - (-1)^k x_{k-1,1}", 2, 1, Scalar),
    fam(
        "c2.7",
        "x_{k,1}x_{k+1,2} = x_{k,2}x_{k+1,1} - 3x_{k-1,1} - (-1)^k x_{k-1,2}",
        2,
        1,
        Scalar,
    ),
    fam("c2.8", "x_{k,0}x_{k+2,1} = x_{k,1}x_{k+2,0} - (-1)^k x_{k+1,0}", 1, 2, Scalar),
    fam("c2.9", "x_{k,0}x_{k+2,2} = x_{k,1}x_{k+2,1} - (-1)^k x_{k+1,1}", 1, 2, Scalar),
    fam(
        "c2.10",
        "x_{k,1}x_{k+2,2} = x_{k,2}x_{k+2,1} - 3x_{k+1,1} - (-1)^k x_{k+1,2}",
        1,
        2,
        Scalar,
    ),
    fam(
        "c2.11",
        "x_{k,0}x_{k+4,1} = x_{k,1}x_{k+4,0} - 3(-1)^k x_{k+1,0}x_{k+3,0} - (-1)^k x_{k+2,0}",
        1,
        4,
        Scalar,
    ),
    fam(
        "c2.12",
        "x_{k,0}x_{k+4,2} = x_{k,1}x_{k+4,1} - 3(-1)^k x_{k+1,0}x_{k+3,1} - (-1)^k x_{k+2,1}",
        1,
        4,
        Scalar,
    ),
    fam(
        "c2.13",
        "x_{k,1}x_{k+4,2} = x_{k,2}x_{k+4,1} - 3(3x_{k+1,0} + (-1)^k x_{k+1,1})x_{k+3,1} - (-1)^k x_{k+2,2}",
        1,
        4,
        Scalar,
    ),
    fam("mat2.2.ii", "x_k J x_{k+1} = J M_k x_{k-1}", 2, 1, Matrix),
    fam("mat2.2.iii", "x_k J x_{k+2} = J M_k x_{k+1}", 1, 2, Matrix),
    fam(
        "mat2.2.iv",
        "x_k J x_{k+4} = J M_k x_{k+1} P x_{k+3} - (-1)^k x_{k+2}",
        1,
        4,
        Matrix,
    ),
    fam(
        "L7.2.i",
        "x_{k,0}x_{k+3,1} = x_{k,1}x_{k+3,0} - 3(-1)^k x_{k+1,0}^2",
        1,
        3,
        Scalar,
    ),
    fam(
        "L7.2.ii",
        "x_{k,0}x_{k+3,2} = x_{k,2}x_{k+3,0} - 3x_{k+1,0}(3x_{k+1,0} + 2(-1)^k x_{k+1,1})",
        1,
        3,
        Scalar,
    ),
    fam(
        "L7.2.iii",
        "x_{k,1}x_{k+3,2} = x_{k,2}x_{k+3,1} - 3x_{k+1,0}(3x_{k+1,1} + (-1)^k x_{k+1,2})",
        1,
        3,
        Scalar,
    ),
    fam("q.lead", "leading coefficient of Q_k is (-1)^{k-1} x_{k-1,0}", 2, 1, Scalar),
    fam(
        "q.3term",
        "x_{k-1,0}Q_k - x_{k,0}Q_{k+1} + x_{k+1,0}Q_{k-1} = -2(-1)^k",
        2,
        2,
        Poly,
    ),
];

pub fn family(id: &str) -> Result<&'static IdentityFamily> {
    FAMILIES
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| Error::UnknownFamily(id.to_string()))
}

/// LHS - RHS of an identity, in its natural shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Residual {
    Scalar(Integer),
    Matrix(Mat2),
    Poly(IntPoly),
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        match self {
            Residual::Scalar(n) => *n == 0,
            Residual::Matrix(m) => m.is_zero(),
            Residual::Poly(p) => p.is_zero(),
        }
    }
}

impl std::fmt::Display for Residual {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Residual::Scalar(n) => write!(f, "{n}"),
            Residual::Matrix(m) => {
                let [a, b, c, d] = &m.0;
                write!(f, "[[{a}, {b}], [{c}, {d}]]")
            }
            Residual::Poly(p) => write!(f, "{p}"),
        }
    }
}

/// Evaluates `LHS - RHS` of family `family_id` at index `k` exactly.
pub fn verify_exact_identity(
    seq: &MarkoffSequence,
    family_id: &str,
    k: usize,
) -> Result<Residual> {
    let fam = family(family_id)?;
    if k < fam.min_k {
        return Err(Error::IndexOutOfRange(format!(
            "{family_id} needs k >= {}, got {k}",
            fam.min_k
        )));
    }
    let v = seq.view(k + fam.footprint)?;
    Ok(match family_id {
        "q.lead" => Residual::Scalar(q_lead_residual(seq, k)?),
        "q.3term" => {
            let r = three_term_residual(seq, k)?;
            Residual::Poly(r.sub(&IntPoly::constant(-2 * parity_sign(k))))
        }
        _ => evaluate(&v, family_id, k),
    })
}

fn evaluate(v: &TermsView, id: &str, k: usize) -> Residual {
    let x = |i: usize, j: usize| v.x(i, j);
    let s = parity_sign(k);
    let prod = |a: &Integer, b: &Integer| Integer::from(a * b);
    let scalar = |n: Integer| Residual::Scalar(n);
    match id {
        "rec3" => {
            let rhs = Mat2::from(v.mat(k + 1))
                .scale(&Integer::from(x(k, 0) * 3))
                .sub(&Mat2::from(v.mat(k - 1)));
            Residual::Matrix(Mat2::from(v.mat(k + 2)).sub(&rhs))
        }
        "c2.5" => scalar(
            prod(x(k, 0), x(k + 1, 1)) - prod(x(k, 1), x(k + 1, 0)) + x(k - 1, 0) * s,
        ),
        "c2.6" => scalar(
            prod(x(k, 0), x(k + 1, 2)) - prod(x(k, 1), x(k + 1, 1)) + x(k - 1, 1) * s,
        ),
        "c2.7" => scalar(
            prod(x(k, 1), x(k + 1, 2)) - prod(x(k, 2), x(k + 1, 1))
                + x(k - 1, 1) * 3
                + x(k - 1, 2) * s,
        ),
        "c2.8" => scalar(
            prod(x(k, 0), x(k + 2, 1)) - prod(x(k, 1), x(k + 2, 0)) + x(k + 1, 0) * s,
        ),
        "c2.9" => scalar(
            prod(x(k, 0), x(k + 2, 2)) - prod(x(k, 1), x(k + 2, 1)) + x(k + 1, 1) * s,
        ),
        "c2.10" => scalar(
            prod(x(k, 1), x(k + 2, 2)) - prod(x(k, 2), x(k + 2, 1))
                + x(k + 1, 1) * 3
                + x(k + 1, 2) * s,
        ),
        "c2.11" => scalar(
            prod(x(k, 0), x(k + 4, 1)) - prod(x(k, 1), x(k + 4, 0))
                + prod(x(k + 1, 0), x(k + 3, 0)) * (3 * s)
                + x(k + 2, 0) * s,
        ),
        "c2.12" => scalar(
            prod(x(k, 0), x(k + 4, 2)) - prod(x(k, 1), x(k + 4, 1))
                + prod(x(k + 1, 0), x(k + 3, 1)) * (3 * s)
                + x(k + 2, 1) * s,
        ),
        "c2.13" => {
            let inner = Integer::from(x(k + 1, 0) * 3) + x(k + 1, 1) * s;
            scalar(
                prod(x(k, 1), x(k + 4, 2)) - prod(x(k, 2), x(k + 4, 1))
                    + prod(&inner, x(k + 3, 1)) * 3
                    + x(k + 2, 2) * s,
            )
        }
        "mat2.2.ii" | "mat2.2.iii" | "mat2.2.iv" => {
            let jm = Mat2::j().mul(&CompanionMatrix::for_index(k).to_mat());
            let xk_j = Mat2::from(v.mat(k)).mul(&Mat2::j());
            let (lhs, rhs) = match id {
                "mat2.2.ii" => (
                    xk_j.mul(&Mat2::from(v.mat(k + 1))),
                    jm.mul(&Mat2::from(v.mat(k - 1))),
                ),
                "mat2.2.iii" => (
                    xk_j.mul(&Mat2::from(v.mat(k + 2))),
                    jm.mul(&Mat2::from(v.mat(k + 1))),
                ),
                _ => (
                    xk_j.mul(&Mat2::from(v.mat(k + 4))),
                    jm.mul(&Mat2::from(v.mat(k + 1)))
                        .mul(&Mat2::p())
                        .mul(&Mat2::from(v.mat(k + 3)))
                        .sub(&Mat2::from(v.mat(k + 2)).scale(&Integer::from(s))),
                ),
            };
            Residual::Matrix(lhs.sub(&rhs))
        }
        "L7.2.i" => scalar(
            prod(x(k, 0), x(k + 3, 1)) - prod(x(k, 1), x(k + 3, 0))
                + Integer::from(x(k + 1, 0).square_ref()) * (3 * s),
        ),
        "L7.2.ii" => {
            let inner = Integer::from(x(k + 1, 0) * 3) + x(k + 1, 1) * (2 * s);
            scalar(
                prod(x(k, 0), x(k + 3, 2)) - prod(x(k, 2), x(k + 3, 0))
                    + prod(x(k + 1, 0), &inner) * 3,
            )
        }
        "L7.2.iii" => {
            let inner = Integer::from(x(k + 1, 1) * 3) + x(k + 1, 2) * s;
            scalar(
                prod(x(k, 1), x(k + 3, 2)) - prod(x(k, 2), x(k + 3, 1))
                    + prod(x(k + 1, 0), &inner) * 3,
            )
        }
        other => unreachable!("family {other} is registered but has no evaluator"),
    }
}
