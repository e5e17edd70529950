use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matseq::{q_polynomial, IntPoly, MarkoffSequence};
use crate::realfield::{eval_int_poly, Enclosure, PrecisionPolicy, XiSource};
use crate::GOLDEN_RATIO;

/// Candidates enumerated before giving up.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// Relative slack within which f64-ranked candidates are re-ranked exactly.
const RERANK_SLACK: f64 = 1e-6;

/// Precision doublings tried when an enclosure cannot be ranked.
const MAX_DOUBLINGS: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScanMode {
    /// All nonzero `R` with `deg R <= d`, `|R| <= H`.
    ROnly,
    /// `R + P` for the fixed `R`, `deg P <= 2`, `|P| <= H`.
    RPlusP(IntPoly),
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    /// Skip candidates divisible by some `Q_k` (R-only, `d <= 3`).
    pub exclude_q_divisible: bool,
    /// Override of the exponent of `|R|`.
    pub exponent: Option<f64>,
    pub budget: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            exclude_q_divisible: false,
            exponent: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub mode: String,
    pub d: usize,
    pub height_bound: i64,
    pub exponent: f64,
    pub candidates: u64,
    pub excluded: u64,
    pub min: Enclosure,
    pub min_value: f64,
    pub argmin: IntPoly,
    /// For R-plus-P scans the minimizing `P`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin_p: Option<IntPoly>,
    /// Index `k` with the argmin divisible by `Q_k`, when checked.
    pub divisible_by_q: Option<usize>,
    pub divisibility_checked: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Exponent of `|R|` in the normalizer for R-only scans.
pub fn default_exponent(d: usize) -> f64 {
    let g = GOLDEN_RATIO;
    if d <= 3 {
        g.powi(3)
    } else {
        2.0 * g.powi(d as i32) - g * g
    }
}

/// `Q_k` whose primitive part has norm at most `bound`, as `(k, Q_k)`.
pub fn small_q_polynomials(seq: &MarkoffSequence, bound: i64) -> Result<Vec<(usize, IntPoly)>> {
    let mut out = Vec::new();
    for k in 1..seq.cap() {
        let q = q_polynomial(seq, k)?;
        if q.primitive().norm() > &bound {
            // norms grow with k, one more look covers a non-monotone start
            if k > 4 {
                break;
            }
            continue;
        }
        out.push((k, q));
    }
    Ok(out)
}

fn decode(mut idx: u64, len: usize, h: i64, out: &mut [i64]) {
    let base = (2 * h + 1) as u64;
    for c in out.iter_mut().take(len) {
        *c = (idx % base) as i64 - h;
        idx /= base;
    }
}

fn horner(c: &[i64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a as f64)
}

fn norm(c: &[i64]) -> i64 {
    c.iter().map(|a| a.abs()).max().unwrap_or(0)
}

/// `(value, coeffs)` ordered by value, then coefficients.
fn better(a: &(f64, Vec<i64>), b: &(f64, Vec<i64>)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1))
}

/// `n^e` as an enclosure with relative radius `2^-100`.
fn pow_real(n: i64, e: f64, bits: u32) -> Enclosure {
    let v = Float::with_val(bits, n).ln() * e;
    let v = v.exp();
    let rad = Float::with_val(64, &v) >> 100u32;
    Enclosure::new(v, rad)
}

fn multiples_of_q(qs: &[(usize, IntPoly)], h: i64) -> HashSet<Vec<i64>> {
    let mut set = HashSet::new();
    for (_, q) in qs {
        let q = q.primitive();
        let qc: Vec<i64> = (0..=2).map(|i| q.coeff(i).to_i64().unwrap_or(i64::MAX)).collect();
        for a in -h..=h {
            for b in -h..=h {
                let prod = [qc[0] * b, qc[0] * a + qc[1] * b, qc[1] * a + qc[2] * b, qc[2] * a];
                if prod.iter().all(|c| *c == 0) || norm(&prod) > h {
                    continue;
                }
                set.insert(prod.to_vec());
            }
        }
    }
    set
}

fn to_poly(c: &[i64]) -> IntPoly {
    IntPoly::from_i64(c)
}

/// Certified `|value| * weight` of a candidate, doubling precision when the
/// enclosure of the polynomial value reaches zero.
fn certify(
    src: &XiSource<'_>,
    p: &IntPoly,
    weight: &dyn Fn(u32) -> Enclosure,
    bits: u32,
) -> Result<Enclosure> {
    let mut acc = bits;
    for _ in 0..=MAX_DOUBLINGS {
        let xi = src.xi(acc as f64)?;
        let v = eval_int_poly(p, &xi);
        if !v.contains_zero() {
            return Ok(v.abs().with_bits(acc).mul(&weight(acc)));
        }
        acc *= 2;
    }
    Err(Error::PrecisionExhausted(format!(
        "|{p}(xi)| not separated from 0 at {acc} bits"
    )))
}

/// Float value and coefficients of a candidate.
type Ranked = (f64, Vec<i64>);

pub fn brute_scan(
    seq: &MarkoffSequence,
    mode: &ScanMode,
    d: usize,
    h: i64,
    policy: &PrecisionPolicy,
    opts: &ScanOptions,
) -> Result<ScanReport> {
    if h < 1 {
        return Err(Error::Config(format!("height bound must be positive, got {h}")));
    }
    let src = XiSource::new(seq, policy.guard_bits);
    let acc = (policy.bits.saturating_sub(policy.guard_bits)).max(128);
    let xi_f = src.xi(acc as f64)?.to_f64();
    let base = (2 * h + 1) as u64;
    match mode {
        ScanMode::ROnly => {
            if !(1..=6).contains(&d) {
                return Err(Error::Config(format!("R-only scans take 1 <= d <= 6, got {d}")));
            }
            let len = d + 1;
            let total = base
                .checked_pow(len as u32)
                .filter(|t| *t <= opts.budget)
                .ok_or_else(|| Error::BudgetExceeded(format!("(2H+1)^(d+1) with H = {h}, d = {d}")))?;
            if opts.exclude_q_divisible && d > 3 {
                return Err(Error::Config("Q_k exclusion is only defined for d <= 3".into()));
            }
            let e = opts.exponent.unwrap_or_else(|| default_exponent(d));
            let qs = if d <= 3 { small_q_polynomials(seq, 2 * h)? } else { Vec::new() };
            let excl = if opts.exclude_q_divisible {
                multiples_of_q(&qs, h)
            } else {
                HashSet::new()
            };
            let value = |c: &[i64]| horner(c, xi_f).abs() * (norm(c) as f64).powf(e);
            let scan = |range: std::ops::Range<u64>| -> (Option<(f64, Vec<i64>)>, u64) {
                let mut best: Option<(f64, Vec<i64>)> = None;
                let mut skipped = 0;
                let mut c = vec![0i64; len];
                for idx in range {
                    decode(idx, len, h, &mut c);
                    if c.iter().all(|a| *a == 0) {
                        continue;
                    }
                    if !excl.is_empty() {
                        let mut key = c.clone();
                        key.resize(4, 0);
                        if excl.contains(&key) {
                            skipped += 1;
                            continue;
                        }
                    }
                    let cand = (value(&c), c.clone());
                    if best.as_ref().is_none_or(|b| better(&cand, b) == Ordering::Less) {
                        best = Some(cand);
                    }
                }
                (best, skipped)
            };
            let chunk = (total / 256).max(1);
            let parts: Vec<(Option<Ranked>, u64)> = (0..total.div_ceil(chunk))
                .into_par_iter()
                .map(|i| scan(i * chunk..((i + 1) * chunk).min(total)))
                .collect();
            let excluded: u64 = parts.iter().map(|p| p.1).sum();
            let (fmin, _) = parts
                .iter()
                .filter_map(|p| p.0.clone())
                .min_by(better)
                .ok_or_else(|| Error::NotFound("every candidate was excluded".into()))?;
            // re-rank near-ties exactly
            let near: Vec<Vec<i64>> = (0..total)
                .into_par_iter()
                .filter_map(|idx| {
                    let mut c = vec![0i64; len];
                    decode(idx, len, h, &mut c);
                    if c.iter().all(|a| *a == 0) {
                        return None;
                    }
                    if !excl.is_empty() {
                        let mut key = c.clone();
                        key.resize(4, 0);
                        if excl.contains(&key) {
                            return None;
                        }
                    }
                    (value(&c) <= fmin * (1.0 + RERANK_SLACK)).then_some(c)
                })
                .collect();
            let mut best: Option<(Enclosure, Vec<i64>)> = None;
            for c in near {
                let p = to_poly(&c);
                let n = norm(&c);
                let enc = certify(&src, &p, &|b| pow_real(n, e, b), acc)?;
                let replace = match &best {
                    None => true,
                    Some((b, bc)) => match enc.center().partial_cmp(b.center()) {
                        Some(Ordering::Less) => true,
                        Some(Ordering::Equal) => c < *bc,
                        _ => false,
                    },
                };
                if replace {
                    best = Some((enc, c));
                }
            }
            let (min, coeffs) = best.expect("the f64 minimizer is among the near ties");
            let argmin = to_poly(&coeffs);
            let divisible_by_q = if d <= 3 {
                qs.iter()
                    .find(|(_, q)| argmin.divisible_by(&q.primitive()))
                    .map(|(k, _)| *k)
            } else {
                None
            };
            Ok(ScanReport {
                mode: "r-only".into(),
                d,
                height_bound: h,
                exponent: e,
                candidates: total - 1 - excluded,
                excluded,
                min_value: min.to_f64(),
                min,
                argmin,
                argmin_p: None,
                divisible_by_q,
                divisibility_checked: d <= 3,
                note: None,
            })
        }
        ScanMode::RPlusP(r) => {
            if r.degree() != Some(3) {
                return Err(Error::Config(format!("R-plus-P scans take deg R = 3, got {r}")));
            }
            let total = base.pow(3);
            if total > opts.budget {
                return Err(Error::BudgetExceeded(format!("(2H+1)^3 with H = {h}")));
            }
            let g4 = opts.exponent.unwrap_or_else(|| GOLDEN_RATIO.powi(4));
            let r_norm = r.norm().to_f64();
            let rc: Vec<i64> = (0..=3).map(|i| r.coeff(i).to_i64().unwrap_or(0)).collect();
            let weight = |pn: i64| ((1 + pn) as f64).powf(GOLDEN_RATIO) * r_norm.powf(g4);
            let value = |pc: &[i64]| {
                let sum: Vec<i64> = (0..4).map(|i| rc[i] + pc.get(i).copied().unwrap_or(0)).collect();
                horner(&sum, xi_f).abs() * weight(norm(pc))
            };
            let all: Vec<(f64, Vec<i64>)> = (0..total)
                .into_par_iter()
                .map(|idx| {
                    let mut c = vec![0i64; 3];
                    decode(idx, 3, h, &mut c);
                    (value(&c), c)
                })
                .collect();
            let fmin = all.iter().min_by(|a, b| better(a, b)).expect("nonempty").0;
            let mut best: Option<(Enclosure, Vec<i64>)> = None;
            for (v, pc) in &all {
                if *v > fmin * (1.0 + RERANK_SLACK) {
                    continue;
                }
                let p = to_poly(pc);
                let pn = norm(pc);
                let rn = r.norm().to_i64().unwrap_or(i64::MAX);
                let w = |b: u32| pow_real(1 + pn, GOLDEN_RATIO, b).mul(&pow_real(rn, g4, b));
                let enc = certify(&src, &r.add(&p), &w, acc)?;
                let replace = match &best {
                    None => true,
                    Some((b, bc)) => match enc.center().partial_cmp(b.center()) {
                        Some(Ordering::Less) => true,
                        Some(Ordering::Equal) => pc < bc,
                        _ => false,
                    },
                };
                if replace {
                    best = Some((enc, pc.clone()));
                }
            }
            let (min, pc) = best.expect("minimizer present");
            let p = to_poly(&pc);
            Ok(ScanReport {
                mode: "r-plus-p".into(),
                d: 3,
                height_bound: h,
                exponent: g4,
                candidates: total,
                excluded: 0,
                min_value: min.to_f64(),
                min,
                argmin: r.add(&p),
                argmin_p: Some(p),
                divisible_by_q: None,
                divisibility_checked: false,
                note: Some(
                    "normalizer (1+|P|)^gamma |R|^(gamma^4); the other printed sign of the R exponent is not used".into(),
                ),
            })
        }
    }
}

/// Exact `|R(xi)|` enclosure for a single polynomial.
pub fn eval_at_xi(seq: &MarkoffSequence, r: &IntPoly, policy: &PrecisionPolicy) -> Result<Enclosure> {
    let src = XiSource::new(seq, policy.guard_bits);
    let acc = (policy.bits.saturating_sub(policy.guard_bits)).max(128) as f64;
    let bits = r.norm().significant_bits() as f64;
    Ok(eval_int_poly(r, &src.xi(acc + bits)?).abs())
}
