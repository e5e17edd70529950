use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::Serialize;

use super::form::{Evaluation, XiForm, ACCURACY_GUARD};
use super::registry::{default_r3, default_r5, lookup, recipe, EstimateSpec, Kind};
use crate::error::{Error, Result};
use crate::matseq::{log2_abs, IntPoly, MarkoffSequence, SeedPair};
use crate::realfield::{frac_nearest, Enclosure, PrecisionPolicy, XiSource};

/// Ratio bound between the largest and the median normalized error.
pub const BOUNDED_FACTOR: f64 = 10.0;

/// Largest allowed growth between rows `k` and `k + 6`.
pub const GROWTH6_FACTOR: f64 = 4.0;

/// Index from which rows count as asymptotic.
pub const ASYMPTOTIC_FROM: usize = 8;

/// Flag threshold for the one-sided lower bound.
pub const ONE_SIDED_FLOOR: f64 = 0.5;

#[derive(Clone, Debug, Serialize)]
pub struct AuditRow {
    pub k: usize,
    #[serde(skip)]
    pub enclosure: Option<Enclosure>,
    /// Decimal center of the normalized error.
    pub normalized_error: Option<String>,
    pub radius: Option<String>,
    #[serde(skip)]
    pub value: Option<f64>,
    pub bits: u32,
    pub k_ref: Option<usize>,
    pub skipped: bool,
    pub reason: Option<String>,
}

impl AuditRow {
    fn computed(k: usize, e: Enclosure, bits: u32, k_ref: Option<usize>) -> Self {
        AuditRow {
            k,
            normalized_error: Some(e.decimal_center()),
            radius: Some(e.decimal_radius()),
            value: Some(e.to_f64()),
            enclosure: Some(e),
            bits,
            k_ref,
            skipped: false,
            reason: None,
        }
    }

    fn skipped(k: usize, reason: String) -> Self {
        AuditRow {
            k,
            enclosure: None,
            normalized_error: None,
            radius: None,
            value: None,
            bits: 0,
            k_ref: None,
            skipped: true,
            reason: Some(reason),
        }
    }
}

/// Statistics recomputable from the rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditSummary {
    pub computed: usize,
    pub skipped: usize,
    pub max: f64,
    pub median: f64,
    pub max_k_ge_8: Option<f64>,
    /// Largest `value(k+6) / value(k)`.
    pub max_growth6: Option<f64>,
    /// Max over the second half of the rows at most ten medians.
    pub trend_ok: bool,
    /// Max over all rows at most ten medians.
    pub bounded_ok: bool,
    pub growth6_ok: bool,
}

impl AuditSummary {
    pub fn from_rows(rows: &[AuditRow]) -> Self {
        let vals: Vec<(usize, f64)> = rows.iter().filter_map(|r| r.value.map(|v| (r.k, v))).collect();
        let mut sorted: Vec<f64> = vals.iter().map(|p| p.1).collect();
        sorted.sort_by(f64::total_cmp);
        let median = median(&sorted);
        let max = sorted.last().copied().unwrap_or(f64::NAN);
        let max_k_ge_8 = vals
            .iter()
            .filter(|p| p.0 >= ASYMPTOTIC_FROM)
            .map(|p| p.1)
            .reduce(f64::max);
        let second_half = vals[vals.len() / 2..].iter().map(|p| p.1).fold(f64::NAN, f64::max);
        let mut growth: Option<f64> = None;
        for &(k, v) in &vals {
            if let Some(&(_, w)) = vals.iter().find(|p| p.0 == k + 6) {
                let g = if v > 0.0 { w / v } else if w > 0.0 { f64::INFINITY } else { 1.0 };
                growth = Some(growth.map_or(g, |h: f64| h.max(g)));
            }
        }
        let within = |m: f64| vals.is_empty() || m <= BOUNDED_FACTOR * median;
        AuditSummary {
            computed: vals.len(),
            skipped: rows.len() - vals.len(),
            max,
            median,
            max_k_ge_8,
            max_growth6: growth,
            trend_ok: within(second_half),
            bounded_ok: within(max),
            growth6_ok: growth.is_none_or(|g| g <= GROWTH6_FACTOR),
        }
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => sorted[n / 2],
        _ => (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0,
    }
}

/// Lower-bound side of the free-polynomial lemma: `X_k {x_{k+2,0} R(xi)}`
/// (or `X_k {x_{k+4,0} R(xi)}`) over rows where `x_{k,0}` does not
/// divide `2 r_3`.
#[derive(Clone, Debug, Serialize)]
pub struct OneSided {
    pub min: Option<f64>,
    pub argmin: Option<usize>,
    pub rows_checked: usize,
    pub rows_excluded: usize,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub id: String,
    pub description: String,
    pub normalizer: String,
    pub mod_one: bool,
    pub seed: SeedPair,
    pub k_lo: usize,
    pub k_hi: usize,
    pub max_bits: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_poly: Option<IntPoly>,
    pub rows: Vec<AuditRow>,
    pub summary: AuditSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub one_sided: Option<OneSided>,
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn values(&self) -> Vec<(usize, f64)> {
        self.rows.iter().filter_map(|r| r.value.map(|v| (r.k, v))).collect()
    }
}

/// Free polynomial used by `spec` when none is supplied.
pub fn default_poly(spec: &EstimateSpec) -> Option<IntPoly> {
    match spec.kind {
        Kind::P32 => Some(default_r5()),
        Kind::L51a | Kind::L51b => Some(default_r3()),
        _ => None,
    }
}

fn check_range(seq: &MarkoffSequence, spec: &EstimateSpec, lo: usize, hi: usize) -> Result<()> {
    if lo > hi {
        return Err(Error::IndexOutOfRange(format!("empty range [{lo}, {hi}]")));
    }
    if lo < spec.min_k {
        return Err(Error::IndexOutOfRange(format!(
            "{} starts at k = {}, range starts at {lo}",
            spec.id, spec.min_k
        )));
    }
    if hi + spec.index_footprint > seq.cap() {
        return Err(Error::IndexOutOfRange(format!(
            "{} reads up to k + {}, beyond the cap {} for k = {hi}",
            spec.id,
            spec.index_footprint,
            seq.cap()
        )));
    }
    Ok(())
}

fn check_poly(spec: &EstimateSpec, r: &IntPoly) -> Result<()> {
    let max_deg = if spec.kind == Kind::P32 { 5 } else { 3 };
    match r.degree() {
        Some(d) if d <= max_deg => Ok(()),
        Some(d) => Err(Error::DegreeTooHigh(format!("{} takes deg R <= {max_deg}, got {d}", spec.id))),
        None => Err(Error::InvariantViolation("free polynomial must be nonzero".into())),
    }
}

/// Bits the planner would use for each row of the range.
pub fn planned_bits(
    seq: &MarkoffSequence,
    id: &str,
    k_range: (usize, usize),
    r_poly: Option<&IntPoly>,
    guard_bits: u32,
) -> Result<u32> {
    let spec = lookup(id)?;
    let (lo, hi) = k_range;
    check_range(seq, spec, lo, hi)?;
    let r = r_poly.cloned().or_else(|| default_poly(spec)).unwrap_or_else(IntPoly::zero);
    let v = seq.view(hi + spec.index_footprint)?;
    let src = XiSource::new(seq, guard_bits);
    let mut best = 0;
    for k in lo..=hi {
        let rec = recipe(spec, &v, k, &r)?;
        if matches!(rec.residual, super::form::ResidualExpr::Exact(_)) {
            continue;
        }
        let k_ref = src.k_ref_for(rec.accuracy_bits() + rec.max_pow() as f64 + 4.0)?;
        let bits = log2_abs(seq.view(k_ref)?.norm(k_ref)).ceil() as u32 + guard_bits;
        best = best.max(bits);
    }
    Ok(best)
}

/// Policy large enough for every row of the range.
pub fn audit_policy(
    seq: &MarkoffSequence,
    id: &str,
    k_range: (usize, usize),
    r_poly: Option<&IntPoly>,
) -> Result<PrecisionPolicy> {
    let bits = planned_bits(seq, id, k_range, r_poly, crate::realfield::DEFAULT_GUARD_BITS)?;
    let mut p = PrecisionPolicy::with_bits(bits.max(64));
    p.k_max = k_range.1;
    Ok(p)
}

pub fn audit_estimate(
    seq: &MarkoffSequence,
    id: &str,
    k_range: (usize, usize),
    policy: &PrecisionPolicy,
) -> Result<AuditReport> {
    audit_estimate_with(seq, id, k_range, policy, None)
}

/// Audit with an explicit free polynomial for the estimates that take one.
pub fn audit_estimate_with(
    seq: &MarkoffSequence,
    id: &str,
    k_range: (usize, usize),
    policy: &PrecisionPolicy,
    r_poly: Option<&IntPoly>,
) -> Result<AuditReport> {
    let spec = lookup(id)?;
    let (lo, hi) = k_range;
    check_range(seq, spec, lo, hi)?;
    let r = match (spec.takes_poly, r_poly) {
        (true, Some(r)) => {
            check_poly(spec, r)?;
            Some(r.clone())
        }
        (true, None) => default_poly(spec),
        (false, _) => None,
    };
    let r_ref = r.clone().unwrap_or_else(IntPoly::zero);
    let v = seq.view(hi + spec.index_footprint)?;
    let src = XiSource::new(seq, policy.guard_bits);
    let rows: Vec<AuditRow> = (lo..=hi)
        .into_par_iter()
        .map(|k| -> Result<AuditRow> {
            let rec = recipe(spec, &v, k, &r_ref)?;
            Ok(match rec.evaluate(&src, policy.bits)? {
                Evaluation::Value {
                    normalized,
                    bits,
                    k_ref,
                } => AuditRow::computed(k, normalized, bits, k_ref),
                Evaluation::Skipped(reason) => AuditRow::skipped(k, reason),
            })
        })
        .collect::<Result<_>>()?;
    if rows.iter().all(|r| r.skipped) {
        let why = rows[0].reason.clone().unwrap_or_default();
        return Err(Error::PrecisionExhausted(format!(
            "no row of {id} on [{lo}, {hi}] is computable: {why}"
        )));
    }
    let one_sided = match spec.kind {
        Kind::L51a | Kind::L51b => Some(one_sided(seq, spec.kind, lo, hi, &r_ref, &src, policy.bits)?),
        _ => None,
    };
    Ok(AuditReport {
        id: spec.id.clone(),
        description: spec.description.clone(),
        normalizer: spec.normalizer.to_string(),
        mod_one: spec.mod_one,
        seed: seq.seed().clone(),
        k_lo: lo,
        k_hi: hi,
        max_bits: policy.bits,
        r_poly: r,
        summary: AuditSummary::from_rows(&rows),
        rows,
        one_sided,
    })
}

fn one_sided(
    seq: &MarkoffSequence,
    kind: Kind,
    lo: usize,
    hi: usize,
    r: &IntPoly,
    src: &XiSource<'_>,
    max_bits: u32,
) -> Result<OneSided> {
    let shift = if kind == Kind::L51a { 0 } else { 2 };
    let v = seq.view(hi + 2 + shift)?;
    let two_r3 = Integer::from(r.coeff(3) * 2);
    let mut out = OneSided {
        min: None,
        argmin: None,
        rows_checked: 0,
        rows_excluded: 0,
        flagged: false,
    };
    for k in lo..=hi {
        let x0 = v.x(k, 0);
        if *x0 == 0 || two_r3.is_divisible(x0) {
            out.rows_excluded += 1;
            continue;
        }
        let lead = v.x(k + 2 + shift, 0);
        let form = XiForm::from_poly(&r.scale(lead));
        let norm = Rational::from(v.norm(k));
        let acc = log2_abs(v.norm(k)) + form.coeff_log2() + ACCURACY_GUARD;
        let pows = match src.powers(acc, form.max_pow()) {
            Ok(p) if p[0].bits() <= max_bits => p,
            Ok(_) | Err(Error::PrecisionExhausted(_)) => continue,
            Err(e) => return Err(e),
        };
        let Ok(fr) = frac_nearest(&form.eval(&pows)) else {
            continue;
        };
        if fr.is_ambiguous() {
            continue;
        }
        let val = fr.frac.mul(&Enclosure::from_rational(&norm, 128)).to_f64();
        out.rows_checked += 1;
        if out.min.is_none_or(|m| val < m) {
            out.min = Some(val);
            out.argmin = Some(k);
        }
    }
    out.flagged = out.min.is_some_and(|m| m < ONE_SIDED_FLOOR);
    Ok(out)
}
