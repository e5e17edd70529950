use rug::Integer;
use serde::Serialize;

use super::common::{reduce, Planner, EXTRA_BITS};
use crate::auditors::XiForm;
use crate::error::{Error, Result};
use crate::matseq::{log2_abs, MarkoffSequence};
use crate::realfield::{frac_nearest, Enclosure, PrecisionPolicy, XiSource};

pub const DEFAULT_WINDOW: (usize, usize) = (6, 16);
pub const DEFAULT_THRESHOLD: f64 = 50.0;

/// Threshold for `j >= 4`, whose empirical constants exceed the default.
pub const WIDE_THRESHOLD: f64 = 1e4;

/// Threshold used when the caller gives none.
pub fn default_threshold(j: usize) -> f64 {
    if j <= 3 {
        DEFAULT_THRESHOLD
    } else {
        WIDE_THRESHOLD
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MjOptions {
    pub window: (usize, usize),
    /// Largest normalized condition value counted as bounded.
    pub threshold: f64,
}

impl Default for MjOptions {
    fn default() -> Self {
        MjOptions {
            window: DEFAULT_WINDOW,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MjRow {
    pub k: usize,
    /// `X_{k+1} min_{+-} {q_{k,j} xi^{j+3} +- m x_{k+1,0} xi^3}`
    pub value: f64,
    /// `+1` or `-1`, the sign attaining the minimum.
    pub sign: i8,
    #[serde(with = "crate::serde_int")]
    pub product: Integer,
}

#[derive(Clone, Debug, Serialize)]
pub struct MjResult {
    pub j: usize,
    pub m: i64,
    pub kappa: f64,
    pub unique_in_bound: bool,
    pub m_bound: i64,
    pub options: MjOptions,
    /// Other `m` that also passed.
    pub also_passing: Vec<i64>,
    pub rows: Vec<MjRow>,
}

/// `x_{k,0} .. x_{k+j-1,0} x_{k+j+1,0}`
pub fn mixed_product(seq: &MarkoffSequence, k: usize, j: usize) -> Result<Integer> {
    let v = seq.view(k + j + 1)?;
    let mut q = Integer::from(1);
    for i in k..k + j {
        q *= v.x(i, 0);
    }
    Ok(q * v.x(k + j + 1, 0))
}

struct Prepared {
    k: usize,
    u: Enclosure,
    v: Enclosure,
    norm: Enclosure,
    product: Integer,
}

fn condition(p: &Prepared, m: i64) -> Option<(f64, i8)> {
    let mv = p.v.mul_int(&Integer::from(m));
    let mut best: Option<(f64, i8)> = None;
    for (sign, w) in [(1i8, p.u.add(&mv)), (-1i8, p.u.sub(&mv))] {
        let fr = frac_nearest(&w).ok()?;
        let val = fr.frac.mul(&p.norm).to_f64();
        if best.is_none_or(|b| val < b.0) {
            best = Some((val, sign));
        }
    }
    best
}

/// Smallest `m > 0` in the bound for which the mixed-product condition stays
/// bounded over the window. `m` and `-m` are equivalent under the sign choice.
pub fn mj_search(
    seq: &MarkoffSequence,
    j: usize,
    m_bound: i64,
    policy: &PrecisionPolicy,
    opts: &MjOptions,
) -> Result<MjResult> {
    if !(1..=6).contains(&j) {
        return Err(Error::Config(format!("j must be in 1..=6, got {j}")));
    }
    if m_bound < 2 {
        return Err(Error::Config(format!("m_bound must be at least 2, got {m_bound}")));
    }
    let (lo, hi) = opts.window;
    if lo < 1 || lo > hi {
        return Err(Error::Config(format!("bad window [{lo}, {hi}]")));
    }
    let view = seq.view(hi + j + 1)?;
    let plan = Planner::new(seq, policy.guard_bits)?;
    let src = XiSource::new(seq, policy.guard_bits);
    let m_bits = (m_bound as f64).log2().ceil();
    let mut prepared = Vec::new();
    for k in lo..=hi {
        let product = mixed_product(seq, k, j)?;
        let lx = log2_abs(view.norm(k + 1));
        let extra = lx + m_bits + EXTRA_BITS;
        let uf = XiForm::monomial(j + 3, product.clone());
        let vf = XiForm::monomial(3, view.x(k + 1, 0).clone());
        let need = uf.coeff_log2() + extra + (j + 7) as f64;
        match plan.bits_for(need) {
            Some(b) if b <= policy.bits => {}
            _ => {
                return Err(Error::PrecisionExhausted(format!(
                    "j = {j}, k = {k} needs more than {} bits",
                    policy.bits
                )))
            }
        }
        let pu = src.powers(uf.coeff_log2() + extra, uf.max_pow())?;
        let pv = src.powers(vf.coeff_log2() + extra, vf.max_pow())?;
        let work = (lx + m_bits + EXTRA_BITS + 64.0).ceil() as u32;
        let undecided = || Error::PrecisionExhausted(format!("fractional part undecided at k = {k}"));
        let (u, _) = reduce(&uf.eval(&pu)).ok_or_else(undecided)?;
        let (v, _) = reduce(&vf.eval(&pv)).ok_or_else(undecided)?;
        prepared.push(Prepared {
            k,
            u: u.with_bits(work),
            v: v.with_bits(work),
            norm: Enclosure::from_integer(view.norm(k + 1), work),
            product,
        });
    }
    let passes = |m: i64| -> bool {
        prepared
            .iter()
            .rev()
            .all(|p| condition(p, m).is_some_and(|(val, _)| val <= opts.threshold))
    };
    let passing: Vec<i64> = (1..=m_bound).filter(|&m| passes(m)).collect();
    let Some(&m) = passing.first() else {
        return Err(Error::NotFound(format!(
            "no m with |m| <= {m_bound} keeps the j = {j} condition below {}",
            opts.threshold
        )));
    };
    let rows: Vec<MjRow> = prepared
        .into_iter()
        .map(|p| {
            let (value, sign) = condition(&p, m).expect("passing m is decided");
            MjRow {
                k: p.k,
                value,
                sign,
                product: p.product,
            }
        })
        .collect();
    let kappa = rows.iter().map(|r| r.value).fold(0.0, f64::max);
    Ok(MjResult {
        j,
        m,
        kappa,
        unique_in_bound: passing.len() == 1,
        m_bound,
        options: *opts,
        also_passing: passing[1..].to_vec(),
        rows,
    })
}
