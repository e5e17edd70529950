use rug::{Integer, Rational};
use serde::Serialize;

use super::common::{log2_upper, Planner, EXTRA_BITS};
use crate::auditors::{audit_estimate_with, audit_policy, XiForm};
use crate::error::{Error, Result};
use crate::matseq::{IntPoly, MarkoffSequence};
use crate::realfield::enclosure::rad_up;
use crate::realfield::{
    continued_fraction, convergents, frac_nearest, Enclosure, PrecisionPolicy, XiSource,
};

/// Window used to measure the empirical constant of the approach to the
/// accumulation points.
pub const CONSTANT_WINDOW: (usize, usize) = (8, 14);

/// Smallest index used as a surrogate for the limit.
pub const MIN_SURROGATE_INDEX: usize = 8;

/// The six accumulation points `delta_1 .. delta_6` of `{x_{k,0} R(xi)}`.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaSet {
    pub r: IntPoly,
    pub values: Vec<Enclosure>,
    /// Index `k` whose fractional part stands in for each limit.
    pub indices: Vec<usize>,
    /// Empirical constant `c` with `|delta - {x_{k,0}R(xi)}| <= c |R| / X_k`.
    pub constant: f64,
    pub period3: bool,
}

impl DeltaSet {
    /// `delta_ell` for any `ell >= 1`.
    pub fn get(&self, ell: usize) -> &Enclosure {
        &self.values[(ell + 5) % 6]
    }

    /// `log2` of an upper bound for `max_ell |delta_ell - delta_{ell+3}|`.
    pub fn period3_gap_log2(&self) -> f64 {
        (0..3)
            .map(|i| log2_upper(&self.values[i].sub(&self.values[i + 3])))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Empirical constant for the approach of `{x_{k,0} R(xi)}` to its limits.
pub fn approach_constant(seq: &MarkoffSequence, r: &IntPoly) -> Result<f64> {
    if r.degree().unwrap_or(0) == 0 {
        return Ok(0.0);
    }
    let policy = audit_policy(seq, "P3.2", CONSTANT_WINDOW, Some(r))?;
    let rep = audit_estimate_with(seq, "P3.2", CONSTANT_WINDOW, &policy, Some(r))?;
    Ok(rep.summary.max)
}

fn check_degree(r: &IntPoly) -> Result<()> {
    match r.degree() {
        Some(d) if d > 5 => Err(Error::DegreeTooHigh(format!("deg R = {d}, at most 5 allowed"))),
        _ => Ok(()),
    }
}

/// Largest `k >= MIN_SURROGATE_INDEX` with `k = ell (mod step)` whose
/// fractional part fits in `max_bits`.
fn surrogate_index(
    plan: &Planner<'_>,
    r: &IntPoly,
    ell: usize,
    step: usize,
    max_bits: u32,
    cap: usize,
) -> Option<usize> {
    let norm_bits = r.norm().significant_bits() as f64;
    let deg = r.degree().unwrap_or(0) as f64;
    let mut best = None;
    let mut k = MIN_SURROGATE_INDEX + (ell + step - MIN_SURROGATE_INDEX % step) % step;
    while k + 1 < cap {
        let lx = plan.log2_x(k);
        let acc = 2.0 * lx + norm_bits + deg + 4.0 + EXTRA_BITS;
        match plan.bits_for(acc) {
            Some(b) if b <= max_bits => best = Some(k),
            _ => break,
        }
        k += step;
    }
    best
}

/// `{x_{k,0} R(xi)}` inflated by `2 c |R| / X_k`.
fn surrogate(
    seq: &MarkoffSequence,
    src: &XiSource<'_>,
    r: &IntPoly,
    k: usize,
    c: f64,
) -> Result<Enclosure> {
    let v = seq.view(k)?;
    let x0 = v.x(k, 0);
    let form = XiForm::from_poly(&r.scale(x0));
    let lx = crate::matseq::log2_abs(v.norm(k));
    let pows = src.powers(form.coeff_log2() + lx + EXTRA_BITS, form.max_pow())?;
    let fr = frac_nearest(&form.eval(&pows))?;
    let tail = Rational::from_f64(2.0 * c).unwrap_or_default() * Rational::from(r.norm())
        / Rational::from(v.norm(k));
    Ok(fr.frac.inflate(&rad_up(&tail)))
}

pub fn delta_points(seq: &MarkoffSequence, r: &IntPoly, policy: &PrecisionPolicy) -> Result<DeltaSet> {
    let c = approach_constant(seq, r)?;
    delta_points_with(seq, r, policy, c)
}

/// [`delta_points`] with a caller-supplied approach constant.
pub fn delta_points_with(
    seq: &MarkoffSequence,
    r: &IntPoly,
    policy: &PrecisionPolicy,
    c: f64,
) -> Result<DeltaSet> {
    check_degree(r)?;
    let plan = Planner::new(seq, policy.guard_bits)?;
    let src = XiSource::new(seq, policy.guard_bits);
    let mut values = Vec::with_capacity(6);
    let mut indices = Vec::with_capacity(6);
    for ell in 1..=6 {
        if r.is_zero() {
            values.push(Enclosure::zero(policy.bits));
            indices.push(0);
            continue;
        }
        let k = surrogate_index(&plan, r, ell, 6, policy.bits, seq.cap()).ok_or_else(|| {
            Error::PrecisionExhausted(format!(
                "no index = {ell} (mod 6) fits in {} bits",
                policy.bits
            ))
        })?;
        values.push(surrogate(seq, &src, r, k, c)?);
        indices.push(k);
    }
    let period3 = r.degree().unwrap_or(0) <= 3 && (0..3).all(|i| values[i].intersects(&values[i + 3]));
    Ok(DeltaSet {
        r: r.clone(),
        values,
        indices,
        constant: c,
        period3,
    })
}

/// `X_k |{x_{k,0} R(xi)} - delta_k|` at one index.
#[derive(Clone, Debug, Serialize)]
pub struct ApproachRow {
    pub k: usize,
    pub normalized: Enclosure,
    pub value: f64,
}

/// How fast `{x_{k,0} R(xi)}` approaches the accumulation point of its class.
pub fn approach_profile(
    seq: &MarkoffSequence,
    deltas: &DeltaSet,
    k_range: (usize, usize),
    policy: &PrecisionPolicy,
) -> Result<Vec<ApproachRow>> {
    let src = XiSource::new(seq, policy.guard_bits);
    let v = seq.view(k_range.1)?;
    let mut out = Vec::new();
    for k in k_range.0..=k_range.1 {
        let form = XiForm::from_poly(&deltas.r.scale(v.x(k, 0)));
        let lx = crate::matseq::log2_abs(v.norm(k));
        let pows = src.powers(form.coeff_log2() + lx + EXTRA_BITS, form.max_pow())?;
        let fr = frac_nearest(&form.eval(&pows))?;
        let diff = fr.frac.sub(deltas.get(k)).abs();
        let normalized = diff.with_bits(128).mul(&Enclosure::from_integer(v.norm(k), 128));
        out.push(ApproachRow {
            k,
            value: normalized.to_f64(),
            normalized,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DenominatorClass {
    Full,
    Half,
    Other,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergentRow {
    #[serde(with = "crate::serde_int")]
    pub p: Integer,
    #[serde(with = "crate::serde_int")]
    pub q: Integer,
    /// `|q delta - p|`
    pub error: Enclosure,
    /// `q |q delta - p|`
    pub scaled: f64,
    pub designated: bool,
    pub denominator_class: DenominatorClass,
    /// Index `k` with `q = |x_{k,0}|` or `|x_{k,0}|/2`.
    pub k: Option<usize>,
    /// `|x_{k,0} delta - y_k|` times `X_{k+1}` or `X_{k+2}`, by the class of `k`.
    pub normalized: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergentTable {
    pub ell: usize,
    pub k_max: usize,
    pub delta: Enclosure,
    pub surrogate_index: usize,
    pub partial_quotients: Vec<String>,
    pub rows: Vec<ConvergentRow>,
}

impl ConvergentTable {
    /// Designated indices `k` found in the table.
    pub fn designated_indices(&self) -> Vec<usize> {
        self.rows.iter().filter_map(|r| r.k).collect()
    }
}

/// Continued-fraction convergents of `delta_ell(xi^3)` classified against
/// the sequence entries `|x_{k,0}|`, `k != ell (mod 3)`, `k <= k_max + 2`.
pub fn delta_convergent_table(
    seq: &MarkoffSequence,
    ell: usize,
    k_max: usize,
    policy: &PrecisionPolicy,
) -> Result<ConvergentTable> {
    if !(1..=3).contains(&ell) {
        return Err(Error::Config(format!("ell must be 1, 2 or 3, got {ell}")));
    }
    let r = IntPoly::monomial(3, 1);
    let c = approach_constant(seq, &r)?;
    let plan = Planner::new(seq, policy.guard_bits)?;
    let src = XiSource::new(seq, policy.guard_bits);
    // period 3 lets both classes ell and ell + 3 stand in
    let k = surrogate_index(&plan, &r, ell, 3, policy.bits, seq.cap()).ok_or_else(|| {
        Error::PrecisionExhausted(format!("no index = {ell} (mod 3) fits in {} bits", policy.bits))
    })?;
    let delta = surrogate(seq, &src, &r, k, c)?;
    let terms = continued_fraction(&delta, 4096);
    let v = seq.view(k_max + 4)?;
    let rows = convergents(&terms)
        .into_iter()
        .filter(|(_, q)| *q > 0)
        .map(|(p, q)| {
            let err = Enclosure::from_integer(&q, delta.bits())
                .mul(&delta)
                .sub(&Enclosure::exact_integer(&p, delta.bits()))
                .abs();
            let scaled = err.with_bits(128).mul(&Enclosure::from_integer(&q, 128)).to_f64();
            let mut class = DenominatorClass::Other;
            let mut hit = None;
            for j in 1..=k_max + 2 {
                if j % 3 == ell % 3 {
                    continue;
                }
                let x = v.x(j, 0).clone().abs();
                if x == q {
                    class = DenominatorClass::Full;
                } else if x == Integer::from(&q * 2) {
                    class = DenominatorClass::Half;
                } else {
                    continue;
                }
                hit = Some(j);
                break;
            }
            let normalized = hit.map(|j| {
                let lift = Integer::from(v.x(j, 0).abs_ref()) / &q;
                let shift = if j % 3 == (ell + 1) % 3 { 1 } else { 2 };
                err.with_bits(128)
                    .mul(&Enclosure::from_integer(&lift, 128))
                    .mul(&Enclosure::from_integer(v.norm(j + shift), 128))
                    .to_f64()
            });
            ConvergentRow {
                p,
                q,
                error: err,
                scaled,
                designated: hit.is_some(),
                denominator_class: class,
                k: hit,
                normalized,
            }
        })
        .collect();
    Ok(ConvergentTable {
        ell,
        k_max,
        delta,
        surrogate_index: k,
        partial_quotients: terms.iter().map(|t| t.to_string()).collect(),
        rows,
    })
}
