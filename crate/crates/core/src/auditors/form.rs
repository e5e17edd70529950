use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::matseq::{log2_abs, IntPoly};
use crate::realfield::{frac_nearest, Enclosure, XiSource};

/// Extra accuracy, in bits, beyond what the normalizer consumes.
pub const ACCURACY_GUARD: f64 = 64.0;

/// Precision of reported normalized errors.
pub const REPORT_BITS: u32 = 128;

/// `(sum_j c_j xi^j) / denom` with integer `c_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XiForm {
    pub coeffs: Vec<Integer>,
    pub denom: u32,
}

impl XiForm {
    pub fn new(coeffs: Vec<Integer>) -> Self {
        XiForm { coeffs, denom: 1 }
    }

    pub fn thirds(coeffs: Vec<Integer>) -> Self {
        XiForm { coeffs, denom: 3 }
    }

    /// Form with a single term `c xi^j`.
    pub fn monomial(j: usize, c: Integer) -> Self {
        Self::new(vec![]).plus(j, c)
    }

    pub fn from_poly(p: &IntPoly) -> Self {
        Self::new(p.coeffs().to_vec())
    }

    /// Adds `c xi^j`.
    pub fn plus(mut self, j: usize, c: Integer) -> Self {
        if self.coeffs.len() <= j {
            self.coeffs.resize(j + 1, Integer::new());
        }
        self.coeffs[j] += c;
        self
    }

    pub fn max_pow(&self) -> u32 {
        self.coeffs.len().saturating_sub(1) as u32
    }

    /// `log2` of the largest coefficient (0 for tiny ones).
    pub fn coeff_log2(&self) -> f64 {
        self.coeffs
            .iter()
            .filter(|c| **c != 0)
            .map(log2_abs)
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, pows: &[Enclosure]) -> Enclosure {
        let bits = pows[0].bits();
        let mut acc = Enclosure::zero(bits);
        for (j, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let term = if j == 0 {
                Enclosure::exact_integer(c, bits)
            } else {
                pows[j].mul_int(c)
            };
            acc = acc.add(&term);
        }
        if self.denom != 1 {
            acc = acc.div_int(&Integer::from(self.denom));
        }
        acc
    }
}

/// How `LHS - RHS` is turned into a nonnegative error.
#[derive(Clone, Debug)]
pub enum ResidualExpr {
    /// `|form|`
    Abs(XiForm),
    /// `{form}`
    ModOne(XiForm),
    /// `min_i {form_i}`
    ModOneMin(Vec<XiForm>),
    /// `|{a} - {b}|`
    DistDiff(XiForm, XiForm),
    /// No real arithmetic involved.
    Exact(Rational),
}

impl ResidualExpr {
    fn forms(&self) -> Vec<&XiForm> {
        match self {
            ResidualExpr::Abs(f) | ResidualExpr::ModOne(f) => vec![f],
            ResidualExpr::ModOneMin(fs) => fs.iter().collect(),
            ResidualExpr::DistDiff(a, b) => vec![a, b],
            ResidualExpr::Exact(_) => vec![],
        }
    }
}

/// One row's computation: residual times `normalizer`.
#[derive(Clone, Debug)]
pub struct Recipe {
    pub residual: ResidualExpr,
    pub normalizer: Rational,
}

/// Outcome of evaluating a recipe.
#[derive(Clone, Debug)]
pub enum Evaluation {
    Value {
        normalized: Enclosure,
        bits: u32,
        k_ref: Option<usize>,
    },
    Skipped(String),
}

fn rational_log2(q: &Rational) -> f64 {
    log2_abs(q.numer()) - log2_abs(q.denom())
}

impl Recipe {
    /// Absolute accuracy (bits) wanted from the `xi` powers.
    pub fn accuracy_bits(&self) -> f64 {
        let forms = self.residual.forms();
        let coeff = forms.iter().map(|f| f.coeff_log2()).fold(0.0, f64::max);
        rational_log2(&self.normalizer).max(0.0) + coeff + ACCURACY_GUARD
    }

    pub fn max_pow(&self) -> u32 {
        self.residual
            .forms()
            .iter()
            .map(|f| f.max_pow())
            .max()
            .unwrap_or(0)
    }

    pub fn evaluate(&self, src: &XiSource<'_>, max_bits: u32) -> Result<Evaluation> {
        let norm = Enclosure::from_rational(&self.normalizer, REPORT_BITS);
        if let ResidualExpr::Exact(q) = &self.residual {
            let v = Enclosure::from_rational(&Rational::from(q.abs_ref()), REPORT_BITS);
            return Ok(Evaluation::Value {
                normalized: v.mul(&norm),
                bits: REPORT_BITS,
                k_ref: None,
            });
        }
        let acc = self.accuracy_bits();
        let k_ref = match src.k_ref_for(acc + self.max_pow() as f64 + 4.0) {
            Ok(k) => k,
            Err(Error::PrecisionExhausted(msg)) => return Ok(Evaluation::Skipped(msg)),
            Err(e) => return Err(e),
        };
        let pows = src.powers(acc, self.max_pow())?;
        let bits = pows[0].bits();
        if bits > max_bits {
            return Ok(Evaluation::Skipped(format!(
                "needs {bits} bits, policy allows {max_bits}"
            )));
        }
        let frac = |f: &XiForm| -> Result<Option<Enclosure>> {
            match frac_nearest(&f.eval(&pows)) {
                Ok(r) if r.is_ambiguous() => Ok(None),
                Ok(r) => Ok(Some(r.frac)),
                Err(Error::RadiusTooLarge(_)) => Ok(None),
                Err(e) => Err(e),
            }
        };
        let undecided = || Evaluation::Skipped("fractional part undecided at this precision".into());
        let value = match &self.residual {
            ResidualExpr::Abs(f) => f.eval(&pows).abs(),
            ResidualExpr::ModOne(f) => match frac(f)? {
                Some(v) => v,
                None => return Ok(undecided()),
            },
            ResidualExpr::ModOneMin(fs) => {
                let mut best: Option<Enclosure> = None;
                for f in fs {
                    let Some(v) = frac(f)? else {
                        return Ok(undecided());
                    };
                    best = Some(match best {
                        None => v,
                        Some(b) => enclosure_min(&b, &v),
                    });
                }
                best.expect("at least one form")
            }
            ResidualExpr::DistDiff(a, b) => match (frac(a)?, frac(b)?) {
                (Some(x), Some(y)) => x.sub(&y).abs(),
                _ => return Ok(undecided()),
            },
            ResidualExpr::Exact(_) => unreachable!(),
        };
        let normalized = value.with_bits(REPORT_BITS).mul(&norm);
        Ok(Evaluation::Value {
            normalized,
            bits,
            k_ref: Some(k_ref),
        })
    }
}

/// Enclosure of `min(a, b)` for `a` in the first and `b` in the second.
pub fn enclosure_min(a: &Enclosure, b: &Enclosure) -> Enclosure {
    if a.hi_rational() <= b.lo_rational() {
        return a.clone();
    }
    if b.hi_rational() <= a.lo_rational() {
        return b.clone();
    }
    let lo = a.lo_rational().min(b.lo_rational());
    let hi = a.hi_rational().min(b.hi_rational());
    let mid = Rational::from(&lo + &hi) / 2;
    let rad = Rational::from(&hi - &lo) / 2;
    Enclosure::from_rational_radius(&mid, &rad, a.bits().max(b.bits()))
}
