use std::sync::OnceLock;

use rug::{Integer, Rational};
use serde::Serialize;

use super::form::{Recipe, ResidualExpr, XiForm};
use crate::error::{Error, Result};
use crate::matseq::{a_k, b_k, c_k, d_k, e_k, f_k, IntPoly, TermsView};
use crate::parity_sign;

/// `m_j` of the mixed-product condition, `j = 1..6`.
pub const M_J: [i64; 6] = [2, 6, 20, 80, 360, 1840];

/// Estimate families; parameters select the member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Kind {
    L23(char),
    L24(u8),
    L31i(usize),
    L31ii(usize),
    P32,
    Q41Val,
    Q41Norm,
    Q41Deriv,
    L51a,
    L51b,
    C61(usize),
    L71(u8),
    L73(u8),
    P74Sigma,
    C75Delta,
    P76i,
    P76ii,
    L79i,
    L79ii,
}

/// Registry entry for an asymptotic estimate.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateSpec {
    pub id: String,
    pub description: String,
    /// Power product of norms multiplying the error.
    pub normalizer: &'static str,
    pub mod_one: bool,
    /// Smallest admissible `k`.
    pub min_k: usize,
    /// Largest offset beyond `k` read.
    pub index_footprint: usize,
    /// Whether the estimate takes a free polynomial `R`.
    pub takes_poly: bool,
    #[serde(skip)]
    pub kind: Kind,
}

fn spec(
    id: impl Into<String>,
    description: impl Into<String>,
    normalizer: &'static str,
    mod_one: bool,
    min_k: usize,
    index_footprint: usize,
    kind: Kind,
) -> EstimateSpec {
    let takes_poly = matches!(kind, Kind::P32 | Kind::L51a | Kind::L51b);
    EstimateSpec {
        id: id.into(),
        description: description.into(),
        normalizer,
        mod_one,
        min_k,
        index_footprint,
        takes_poly,
        kind,
    }
}

fn build_registry() -> Vec<EstimateSpec> {
    let mut r = vec![
        spec("L2.3a", "x_{k,0}x_{k+2,2}xi = A_k + O(1/X_{k+1})", "X_{k+1}", false, 2, 2, Kind::L23('a')),
        spec(
            "L2.3b",
            "x_{k,1}x_{k+2,2}xi = B_k - (-1)^k x_{k+1,2}xi + O(1/X_{k+1})",
            "X_{k+1}",
            false,
            2,
            2,
            Kind::L23('b'),
        ),
        spec("L2.3c", "x_{k,0}x_{k+1,2}xi = C_k + O(1/X_{k-1})", "X_{k-1}", false, 2, 1, Kind::L23('c')),
        spec(
            "L2.3d",
            "x_{k,1}x_{k+1,2}xi = D_k - (-1)^k x_{k-1,2}xi + O(1/X_{k-1})",
            "X_{k-1}",
            false,
            2,
            1,
            Kind::L23('d'),
        ),
        spec("L2.3e", "x_{k,0}x_{k+4,2}xi = E_k + O(1/X_{k+2})", "X_{k+2}", false, 2, 4, Kind::L23('e')),
        spec(
            "L2.3f",
            "x_{k,1}x_{k+4,2}xi = F_k - (-1)^k x_{k+2,2}xi + O(1/X_{k+2})",
            "X_{k+2}",
            false,
            2,
            4,
            Kind::L23('f'),
        ),
        spec(
            "L2.4i",
            "x_{k,0}x_{k+2,0}xi^4 = B_k - 2(-1)^k x_{k+1,2}xi + O(1/X_{k+1})",
            "X_{k+1}",
            false,
            2,
            2,
            Kind::L24(1),
        ),
        spec(
            "L2.4ii",
            "x_{k,0}x_{k+1,0}x_{k+3,0}xi^5 = -6x_{k+1,2}xi + O(1/X_{k+1}) mod Z",
            "X_{k+1}",
            true,
            2,
            3,
            Kind::L24(2),
        ),
        spec(
            "L2.4iii",
            "x_{k,0}x_{k+1,2}x_{k+3,2}xi = -2x_{k+1,2}xi + O(1/X_{k+1}) mod Z",
            "X_{k+1}",
            true,
            2,
            3,
            Kind::L24(3),
        ),
    ];
    for j in 0..=3 {
        r.push(spec(
            format!("L3.1i.j{j}"),
            format!("{{(x_{{k+3,0}} + x_{{k,0}}) xi^{j}}} = O(1/X_k)"),
            "X_k",
            true,
            1,
            3,
            Kind::L31i(j),
        ));
    }
    for j in 0..=5 {
        r.push(spec(
            format!("L3.1ii.j{j}"),
            format!("{{(x_{{k+6,0}} - x_{{k,0}}) xi^{j}}} = O(1/X_k)"),
            "X_k",
            true,
            1,
            6,
            Kind::L31ii(j),
        ));
    }
    r.extend([
        spec(
            "P3.2",
            "|delta_k(R(xi)) - {x_{k,0}R(xi)}| = O(|R|/X_k), limit replaced by index k+6",
            "X_k/|R|",
            true,
            1,
            6,
            Kind::P32,
        ),
        spec("Q4.1.val", "|Q_k(xi)| = O(1/X_{k+2})", "X_{k+2}", false, 1, 2, Kind::Q41Val),
        spec("Q4.1.norm", "|Q_k| = O(X_{k-1})", "1/X_{k-1}", false, 2, 1, Kind::Q41Norm),
        spec("Q4.1.deriv", "|Q_k'(xi)| = O(X_{k-1})", "1/X_{k-1}", false, 2, 1, Kind::Q41Deriv),
        spec(
            "L5.1a",
            "x_{k,0}x_{k+2,0}R(xi) = r_3 A_k + x_{k,0}p_{k+2} + O(|R|/X_{k+1})",
            "X_{k+1}/|R|",
            false,
            2,
            2,
            Kind::L51a,
        ),
        spec(
            "L5.1b",
            "x_{k,0}x_{k+4,0}R(xi) = r_3 E_k + x_{k,0}p_{k+4} + O(|R|/X_{k+2})",
            "X_{k+2}/|R|",
            false,
            2,
            4,
            Kind::L51b,
        ),
    ]);
    for j in 1..=6 {
        r.push(spec(
            format!("C6.1.j{j}"),
            format!(
                "min over sign of {{x_{{k,0}}..x_{{k+{},0}} x_{{k+{},0}} xi^{} +- {} x_{{k+1,0}} xi^3}} = O(1/X_{{k+1}})",
                j - 1,
                j + 1,
                j + 3,
                M_J[j - 1]
            ),
            "X_{k+1}",
            true,
            1,
            j + 1,
            Kind::C61(j),
        ));
    }
    let l71 = [
        "x_{k,0}^2 xi = x_{k,0}x_{k,1} - (-1)^k/3 + O(1/X_k^2)",
        "x_{k,0}x_{k,1} xi = x_{k,1}^2 - (-1)^k xi/3 + O(1/X_k^2)",
        "x_{k,0}x_{k,2} xi = x_{k,1}x_{k,2} - (-1)^k xi^2/3 + O(1/X_k^2)",
        "x_{k,1}^2 xi = x_{k,1}x_{k,2} - xi - (-1)^k xi^2/3 + O(1/X_k^2)",
        "x_{k,1}x_{k,2} xi = x_{k,2}^2 - xi^2 - (-1)^k xi^3/3 + O(1/X_k^2)",
    ];
    for (i, d) in l71.iter().enumerate() {
        let roman = ["i", "ii", "iii", "iv", "v"][i];
        r.push(spec(format!("L7.1{roman}"), *d, "X_k^2", false, 1, 0, Kind::L71(i as u8 + 1)));
    }
    let l73 = [
        "x_{k,0}x_{k+3,2} xi = -2xi + O(1/X_{k+1}^2) mod Z",
        "x_{k,0}x_{k+3,2} xi^2 = -4xi^2 + O(1/X_{k+1}^2) mod Z",
        "x_{k,1}x_{k+3,2} xi = -3(-1)^k xi - xi^2 + O(1/X_{k+1}^2) mod Z",
    ];
    for (i, d) in l73.iter().enumerate() {
        let roman = ["i", "ii", "iii"][i];
        r.push(spec(format!("L7.3{roman}"), *d, "X_{k+1}^2", true, 1, 3, Kind::L73(i as u8 + 1)));
    }
    r.extend([
        spec(
            "P7.4.sigma",
            "sigma_k = -18(-1)^k(2D_{k+1}xi + 12x_{k,0}xi^3 + (-1)^k x_{k+3,0}xi^4) + O(1/X_k) mod Z",
            "X_k",
            true,
            1,
            6,
            Kind::P74Sigma,
        ),
        spec("C7.5.delta", "{sigma_k - sigma_{k+6}} = O(1/X_k)", "X_k", true, 1, 12, Kind::C75Delta),
        spec(
            "P7.6.i",
            "x_{k-2,0} sigma_k = -36(-1)^k x_{k-1,2}xi + O(1/X_{k-1}) mod Z",
            "X_{k-1}",
            true,
            3,
            6,
            Kind::P76i,
        ),
        spec(
            "P7.6.ii",
            "x_{k-3,0} sigma_k = O(1/X_{k-2}^2) mod Z",
            "X_{k-2}^2",
            true,
            4,
            6,
            Kind::P76ii,
        ),
        spec(
            "L7.9i",
            "x_{k,0}x_{k+1,0}x_{k+2,2}x_{k+4,2} xi^2 = 8(-1)^k x_{k+1,2}xi + O(1/X_{k+1}) mod Z",
            "X_{k+1}",
            true,
            1,
            4,
            Kind::L79i,
        ),
        spec(
            "L7.9ii",
            "x_{k,0}x_{k+1,0}x_{k+2,0}x_{k+4,0} xi^6 = 20(-1)^k x_{k+1,2}xi + O(1/X_{k+1}) mod Z",
            "X_{k+1}",
            true,
            1,
            4,
            Kind::L79ii,
        ),
    ]);
    r
}

/// Every registered estimate, in a fixed order.
pub fn registry() -> &'static [EstimateSpec] {
    static REG: OnceLock<Vec<EstimateSpec>> = OnceLock::new();
    REG.get_or_init(build_registry)
}

pub fn lookup(id: &str) -> Result<&'static EstimateSpec> {
    registry()
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownEstimate(id.to_string()))
}

/// Default free polynomial of degree 5 for the accumulation-point estimate.
pub fn default_r5() -> IntPoly {
    IntPoly::from_i64(&[1, -2, 1, 3, -1, 2])
}

/// Default free polynomial of degree 3 for the lower-bound lemma.
pub fn default_r3() -> IntPoly {
    IntPoly::from_i64(&[1, -3, 2, 1])
}

fn int(n: i64) -> Integer {
    Integer::from(n)
}

fn mul(a: &Integer, b: &Integer) -> Integer {
    Integer::from(a * b)
}

fn norm_of(v: &TermsView, k: usize) -> Rational {
    Rational::from(v.norm(k))
}

/// `p_j = r_2 x_{j,2} + r_1 x_{j,1} + r_0 x_{j,0}`
fn p_j(v: &TermsView, r: &IntPoly, j: usize) -> Integer {
    mul(r.coeff(2), v.x(j, 2)) + mul(r.coeff(1), v.x(j, 1)) + mul(r.coeff(0), v.x(j, 0))
}

/// `sigma_k = (x_{k+6,0} - x_{k,0}) xi^6` as a form.
fn sigma_coeff(v: &TermsView, k: usize) -> Integer {
    Integer::from(v.x(k + 6, 0) - v.x(k, 0))
}

/// Builds the recipe of `spec` at index `k`. The caller guarantees the
/// terms `k - 1 .. k + footprint` are materialized.
pub fn recipe(spec: &EstimateSpec, v: &TermsView, k: usize, r_poly: &IntPoly) -> Result<Recipe> {
    let x = |i: usize, j: usize| v.x(i, j);
    let s = parity_sign(k);
    let si = int(s);
    let abs = |f: XiForm, n: Rational| Recipe {
        residual: ResidualExpr::Abs(f),
        normalizer: n,
    };
    let modone = |f: XiForm, n: Rational| Recipe {
        residual: ResidualExpr::ModOne(f),
        normalizer: n,
    };
    let rnorm = || Rational::from(r_poly.norm());
    Ok(match spec.kind {
        Kind::L23(c) => {
            let (f, n) = match c {
                'a' => (
                    XiForm::new(vec![-a_k(v, k), mul(x(k, 0), x(k + 2, 2))]),
                    norm_of(v, k + 1),
                ),
                'b' => (
                    XiForm::new(vec![-b_k(v, k), mul(x(k, 1), x(k + 2, 2)) + x(k + 1, 2) * s]),
                    norm_of(v, k + 1),
                ),
                'c' => (
                    XiForm::new(vec![-c_k(v, k), mul(x(k, 0), x(k + 1, 2))]),
                    norm_of(v, k - 1),
                ),
                'd' => (
                    XiForm::new(vec![-d_k(v, k), mul(x(k, 1), x(k + 1, 2)) + x(k - 1, 2) * s]),
                    norm_of(v, k - 1),
                ),
                'e' => (
                    XiForm::new(vec![-e_k(v, k), mul(x(k, 0), x(k + 4, 2))]),
                    norm_of(v, k + 2),
                ),
                _ => (
                    XiForm::new(vec![-f_k(v, k), mul(x(k, 1), x(k + 4, 2)) + x(k + 2, 2) * s]),
                    norm_of(v, k + 2),
                ),
            };
            abs(f, n)
        }
        Kind::L24(1) => abs(
            XiForm::new(vec![-b_k(v, k), Integer::from(x(k + 1, 2) * (2 * s))])
                .plus(4, mul(x(k, 0), x(k + 2, 0))),
            norm_of(v, k + 1),
        ),
        Kind::L24(2) => modone(
            XiForm::monomial(1, Integer::from(x(k + 1, 2) * 6))
                .plus(5, mul(x(k, 0), x(k + 1, 0)) * x(k + 3, 0)),
            norm_of(v, k + 1),
        ),
        Kind::L24(_) => modone(
            XiForm::monomial(
                1,
                mul(x(k, 0), x(k + 1, 2)) * x(k + 3, 2) + Integer::from(x(k + 1, 2) * 2),
            ),
            norm_of(v, k + 1),
        ),
        Kind::L31i(j) => modone(
            XiForm::monomial(j, Integer::from(x(k + 3, 0) + x(k, 0))),
            norm_of(v, k),
        ),
        Kind::L31ii(j) => modone(XiForm::monomial(j, sigma_coeff(v, k)), norm_of(v, k)),
        Kind::P32 => {
            let near = XiForm::from_poly(&r_poly.scale(x(k, 0)));
            let far = XiForm::from_poly(&r_poly.scale(x(k + 6, 0)));
            Recipe {
                residual: ResidualExpr::DistDiff(far, near),
                normalizer: norm_of(v, k) / rnorm(),
            }
        }
        Kind::Q41Val => abs(XiForm::from_poly(&q_from_view(v, k)), norm_of(v, k + 2)),
        Kind::Q41Norm => Recipe {
            residual: ResidualExpr::Exact(Rational::from(q_from_view(v, k).norm())),
            normalizer: norm_of(v, k - 1).recip(),
        },
        Kind::Q41Deriv => abs(
            XiForm::from_poly(&q_from_view(v, k).derivative()),
            norm_of(v, k - 1).recip(),
        ),
        Kind::L51a | Kind::L51b => {
            let (far, scalar, n) = if spec.kind == Kind::L51a {
                (k + 2, a_k(v, k), norm_of(v, k + 1))
            } else {
                (k + 4, e_k(v, k), norm_of(v, k + 2))
            };
            let lead = mul(x(k, 0), x(far, 0));
            let f = XiForm::from_poly(&r_poly.scale(&lead))
                .plus(0, -(mul(r_poly.coeff(3), &scalar) + mul(x(k, 0), &p_j(v, r_poly, far))));
            abs(f, n / rnorm())
        }
        Kind::C61(j) => {
            let mut q = Integer::from(1);
            for i in k..k + j {
                q *= x(i, 0);
            }
            q *= x(k + j + 1, 0);
            let m = Integer::from(x(k + 1, 0) * M_J[j - 1]);
            let plus = XiForm::monomial(j + 3, q.clone()).plus(3, m.clone());
            let minus = XiForm::monomial(j + 3, q).plus(3, -m);
            Recipe {
                residual: ResidualExpr::ModOneMin(vec![plus, minus]),
                normalizer: norm_of(v, k + 1),
            }
        }
        Kind::L71(i) => {
            let (x0, x1, x2) = (x(k, 0), x(k, 1), x(k, 2));
            let f = match i {
                1 => XiForm::thirds(vec![mul(x0, x1) * -3 + &si, mul(x0, x0) * 3]),
                2 => XiForm::thirds(vec![mul(x1, x1) * -3, mul(x0, x1) * 3 + &si]),
                3 => XiForm::thirds(vec![mul(x1, x2) * -3, mul(x0, x2) * 3, si.clone()]),
                4 => XiForm::thirds(vec![mul(x1, x2) * -3, mul(x1, x1) * 3 + 3, si.clone()]),
                _ => XiForm::thirds(vec![mul(x2, x2) * -3, mul(x1, x2) * 3, int(3), si.clone()]),
            };
            let n = norm_of(v, k);
            abs(f, Rational::from(n.square_ref()))
        }
        Kind::L73(i) => {
            let f = match i {
                1 => XiForm::monomial(1, mul(x(k, 0), x(k + 3, 2)) + 2),
                2 => XiForm::monomial(2, mul(x(k, 0), x(k + 3, 2)) + 4),
                _ => XiForm::monomial(1, mul(x(k, 1), x(k + 3, 2)) + 3 * s).plus(2, int(1)),
            };
            let n = norm_of(v, k + 1);
            modone(f, Rational::from(n.square_ref()))
        }
        Kind::P74Sigma => {
            let f = XiForm::monomial(6, sigma_coeff(v, k))
                .plus(1, d_k(v, k + 1) * (36 * s))
                .plus(3, Integer::from(x(k, 0) * (216 * s)))
                .plus(4, Integer::from(x(k + 3, 0) * 18));
            modone(f, norm_of(v, k))
        }
        Kind::C75Delta => modone(
            XiForm::monomial(6, sigma_coeff(v, k) - sigma_coeff(v, k + 6)),
            norm_of(v, k),
        ),
        Kind::P76i => modone(
            XiForm::monomial(6, mul(x(k - 2, 0), &sigma_coeff(v, k)))
                .plus(1, Integer::from(x(k - 1, 2) * (36 * s))),
            norm_of(v, k - 1),
        ),
        Kind::P76ii => {
            let n = norm_of(v, k - 2);
            modone(
                XiForm::monomial(6, mul(x(k - 3, 0), &sigma_coeff(v, k))),
                Rational::from(n.square_ref()),
            )
        }
        Kind::L79i => modone(
            XiForm::monomial(2, mul(x(k, 0), x(k + 1, 0)) * x(k + 2, 2) * x(k + 4, 2))
                .plus(1, Integer::from(x(k + 1, 2) * (-8 * s))),
            norm_of(v, k + 1),
        ),
        Kind::L79ii => modone(
            XiForm::monomial(6, mul(x(k, 0), x(k + 1, 0)) * x(k + 2, 0) * x(k + 4, 0))
                .plus(1, Integer::from(x(k + 1, 2) * (-20 * s))),
            norm_of(v, k + 1),
        ),
    })
}

/// `Q_k` from a snapshot holding `x_k` and `x_{k+1}`.
pub fn q_from_view(v: &TermsView, k: usize) -> IntPoly {
    let (a, b) = (v.mat(k), v.mat(k + 1));
    let minor = |i: usize, j: usize| mul(a.entry(i), b.entry(j)) - mul(a.entry(j), b.entry(i));
    IntPoly::new(vec![minor(1, 2), -minor(0, 2), minor(0, 1)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_unique_and_complete() {
        let ids: Vec<&str> = registry().iter().map(|s| s.id.as_str()).collect();
        for (i, a) in ids.iter().enumerate() {
            assert!(!ids[i + 1..].contains(a), "duplicate {a}");
        }
        for want in ["L2.3a", "L3.1ii.j5", "C6.1.j6", "L7.1v", "L7.9ii", "Q4.1.deriv"] {
            assert!(ids.contains(&want), "{want}");
        }
        assert_eq!(ids.len(), 45);
    }

    #[test]
    fn unknown_id() {
        assert_eq!(lookup("L9.9").unwrap_err().name(), "UnknownEstimate");
    }
}
