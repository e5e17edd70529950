use rayon::prelude::*;
use rug::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matseq::MarkoffSequence;
use crate::realfield::{continued_fraction, convergents, frac_nearest, Enclosure, PrecisionPolicy, XiSource};

/// Smallest `n` in the scan window.
pub const SCAN_FROM: u64 = 1_000;

/// Above this `n_max` the scan walks convergents instead of every `n`.
pub const SWEEP_LIMIT: u64 = 100_000;

/// Number of smallest values reported.
pub const REPORTED: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct LagrangeRow {
    pub n: u64,
    /// `n {n xi}`
    pub enclosure: Enclosure,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LagrangeReport {
    pub n_from: u64,
    pub n_max: u64,
    /// `sweep` or `convergents`.
    pub method: String,
    pub xi_bits: u32,
    pub min: Enclosure,
    pub min_value: f64,
    pub argmin: u64,
    pub smallest: Vec<LagrangeRow>,
}

fn row(xi: &Enclosure, n: u64) -> Result<LagrangeRow> {
    let ni = Integer::from(n);
    let nx = Enclosure::from_integer(&ni, xi.bits()).mul(xi);
    let enc = frac_nearest(&nx)?.frac.mul_int(&ni).with_bits(128);
    Ok(LagrangeRow {
        n,
        value: enc.to_f64(),
        enclosure: enc,
    })
}

/// Candidates `n = m q` with `m^2 q {q xi} < 1/2`: every `n` with
/// `n {n xi} < 1/2` has this form with `q` a convergent denominator.
fn convergent_candidates(xi: &Enclosure, lo: u64, hi: u64) -> Vec<u64> {
    let terms = continued_fraction(xi, 256);
    let xf = xi.to_f64();
    let mut out = Vec::new();
    for (_, q) in convergents(&terms) {
        let Some(q) = q.to_u64() else { break };
        if q == 0 || q > hi {
            if q > hi {
                break;
            }
            continue;
        }
        let qf = q as f64;
        let base = qf * (qf * xf - (qf * xf).round()).abs();
        let mut m = 1u64;
        while m * q <= hi && (m * m) as f64 * base < 0.5 {
            if m * q >= lo {
                out.push(m * q);
            }
            m += 1;
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

pub fn lagrange_scan(seq: &MarkoffSequence, n_max: u64, policy: &PrecisionPolicy) -> Result<LagrangeReport> {
    if n_max < SCAN_FROM {
        return Err(Error::IndexOutOfRange(format!(
            "n_max = {n_max} leaves the window [{SCAN_FROM}, n_max] empty"
        )));
    }
    // radius below 1/(2 n_max^2) with room for ranking
    let acc = 2.0 * (n_max as f64).log2() + 64.0;
    let src = XiSource::new(seq, policy.guard_bits);
    let xi = src.xi(acc)?;
    if xi.bits() > policy.bits.max(acc as u32 + policy.guard_bits) * 4 {
        return Err(Error::PrecisionExhausted(format!("xi needs {} bits", xi.bits())));
    }
    let (method, candidates) = if n_max <= SWEEP_LIMIT {
        let xf = xi.to_f64();
        let mut approx: Vec<(f64, u64)> = (SCAN_FROM..=n_max)
            .into_par_iter()
            .map(|n| {
                let t = n as f64 * xf;
                (n as f64 * (t - t.round()).abs(), n)
            })
            .collect();
        approx.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        // a few extra so f64 ties cannot hide an exact smaller value
        ("sweep", approx.into_iter().take(4 * REPORTED).map(|p| p.1).collect::<Vec<_>>())
    } else {
        ("convergents", convergent_candidates(&xi, SCAN_FROM, n_max))
    };
    if candidates.is_empty() {
        return Err(Error::NotFound(format!("no n <= {n_max} with n{{n xi}} < 1/2")));
    }
    let mut rows = candidates
        .into_iter()
        .map(|n| row(&xi, n))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.enclosure
            .center()
            .partial_cmp(b.enclosure.center())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.n.cmp(&b.n))
    });
    rows.truncate(REPORTED);
    let best = rows[0].clone();
    Ok(LagrangeReport {
        n_from: SCAN_FROM,
        n_max,
        method: method.into(),
        xi_bits: xi.bits(),
        min: best.enclosure,
        min_value: best.value,
        argmin: best.n,
        smallest: rows,
    })
}
