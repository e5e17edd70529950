use std::collections::BTreeMap;

use rug::{Integer, Rational};
use serde::Serialize;

use super::common::{log2_upper, nearest_integer, reduce, EXTRA_BITS};
use crate::auditors::{audit_estimate, audit_policy, XiForm};
use crate::error::{Error, Result};
use crate::matseq::{a_k, log2_abs, q_polynomial, IntPoly, MarkoffSequence, TermsView};
use crate::realfield::enclosure::rad_up;
use crate::realfield::{frac_nearest, refine_root, Enclosure, PrecisionPolicy, XiSource};
use crate::{parity_sign, GOLDEN_RATIO};

/// Window for the empirical constant of `{sigma_k - sigma_{k+6}}`.
pub const SIGMA_CONSTANT_WINDOW: (usize, usize) = (8, 13);

/// Every index `k` with `gcd(x_{k-3,0}, t_k)` dividing this is accepted.
pub const GCD_BOUND: u32 = 72;

#[derive(Clone, Debug, Serialize)]
pub struct Deg6Record {
    pub k: usize,
    /// `sigma_k` minus its nearest integer.
    pub sigma: Enclosure,
    /// Signed limit of `sigma_{k+6i}` modulo the integers.
    pub delta_bar: Enclosure,
    pub delta_bar_index: usize,
    /// Nearest integer to `x_{k-3,0} sigma_k`.
    #[serde(with = "crate::serde_int")]
    pub t: Integer,
    /// Nearest integer to `x_{k-2,0} sigma_k`.
    #[serde(with = "crate::serde_int")]
    pub t_prime: Integer,
    /// Nearest integer to `delta_bar - sigma_k`.
    #[serde(with = "crate::serde_int")]
    pub u: Integer,
    /// `t / x_{k-3,0} + u`
    #[serde(serialize_with = "ser_rational")]
    pub alpha_rational: Rational,
    /// `X_k |delta_bar - alpha_rational|`
    pub alpha_deviation: f64,
    #[serde(with = "crate::serde_int")]
    pub gcd_t: Integer,
    pub gcd_divides_72: bool,
    /// `x_{k-2,0} t = x_{k-3,0} t' - 36 (-1)^k A_{k-3}`
    pub t_relation: bool,
    /// `s_{k-1}, s_k, s_{k+1}`, nearest integers to `x_{j,0} xi^6`.
    #[serde(with = "crate::serde_int::vec")]
    pub s: Vec<Integer>,
    pub p: IntPoly,
    pub shape_ok: bool,
    pub root: Enclosure,
    pub height_proxy_log2: f64,
    pub xi_minus_root_log2: f64,
    /// `|xi - alpha_k| H^(gamma+1) loglog H` with `H` the height proxy.
    pub quality: f64,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct FracScanRow {
    pub k: usize,
    /// `{x_{k,0} xi^6}`
    pub frac: f64,
    pub k_frac: f64,
    /// `k^(2 gamma^7) {x_{k,0} xi^6}`
    pub k_pow_frac: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Deg6Report {
    pub k_lo: usize,
    pub k_hi: usize,
    pub sigma_constant: f64,
    pub records: Vec<Deg6Record>,
    pub skipped: Vec<(usize, String)>,
    pub scan: Vec<FracScanRow>,
}

impl Deg6Report {
    pub fn min_k_frac(&self) -> Option<(usize, f64)> {
        self.scan
            .iter()
            .map(|r| (r.k, r.k_frac))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// `log2 ln ln max(e, H)` given `log2 H`.
fn log2_loglog(log2_h: f64) -> f64 {
    let ln_h = (log2_h * std::f64::consts::LN_2).max(1.0);
    ln_h.ln().log2()
}

/// `P_k = 2T^6 + (-1)^k (s_{k-1} Q_k - s_k Q_{k+1} + s_{k+1} Q_{k-1})`
pub fn p_polynomial(seq: &MarkoffSequence, k: usize, s: &[Integer; 3]) -> Result<IntPoly> {
    if k < 2 {
        return Err(Error::IndexOutOfRange(format!("P_k needs k >= 2, got {k}")));
    }
    let sum = q_polynomial(seq, k)?
        .scale(&s[0])
        .sub(&q_polynomial(seq, k + 1)?.scale(&s[1]))
        .add(&q_polynomial(seq, k - 1)?.scale(&s[2]));
    Ok(IntPoly::monomial(6, 2).add(&sum.scale(&Integer::from(parity_sign(k)))))
}

/// Coefficients of degree 3, 4 and 5 vanish and the leading one is 2.
pub fn has_deg6_shape(p: &IntPoly) -> bool {
    p.degree() == Some(6) && *p.leading() == 2 && (3..=5).all(|i| *p.coeff(i) == 0)
}

/// `(x_{k+6,0} - x_{k,0}) xi^6` as a form.
fn sigma_form(v: &TermsView, k: usize, scale: &Integer) -> XiForm {
    XiForm::monomial(6, Integer::from(v.x(k + 6, 0) - v.x(k, 0)) * scale)
}

fn eval_form(src: &XiSource<'_>, max_bits: u32, form: &XiForm, extra: f64) -> Result<Enclosure> {
    let pows = src.powers(form.coeff_log2() + extra, form.max_pow())?;
    if pows[0].bits() > max_bits {
        return Err(Error::PrecisionExhausted(format!(
            "needs {} bits, policy allows {max_bits}",
            pows[0].bits()
        )));
    }
    Ok(form.eval(&pows))
}

/// Signed `{sigma_{k'}}` at the index standing in for the class of `k`,
/// inflated by `2 c / X_{k'}`.
fn delta_bar(
    seq: &MarkoffSequence,
    src: &XiSource<'_>,
    max_bits: u32,
    k_prime: usize,
    c: f64,
) -> Result<Enclosure> {
    let v = seq.view(k_prime + 6)?;
    let lx = log2_abs(v.norm(k_prime));
    let e = eval_form(src, max_bits, &sigma_form(&v, k_prime, &Integer::from(1)), lx + EXTRA_BITS)?;
    let (d, _) = reduce(&e).ok_or_else(|| {
        Error::PrecisionExhausted(format!("sigma_{k_prime} is too close to a half-integer"))
    })?;
    let tail = Rational::from_f64(2.0 * c).unwrap_or_default() / Rational::from(v.norm(k_prime));
    Ok(d.inflate(&rad_up(&tail)))
}

pub fn deg6_pipeline(
    seq: &MarkoffSequence,
    k_range: (usize, usize),
    policy: &PrecisionPolicy,
) -> Result<Deg6Report> {
    let (lo, hi) = k_range;
    if lo < 4 || lo > hi {
        return Err(Error::IndexOutOfRange(format!("deg6 range [{lo}, {hi}] must start at k >= 4")));
    }
    if hi + 7 > seq.cap() {
        return Err(Error::IndexOutOfRange(format!(
            "deg6 up to k = {hi} reads index {}, beyond the cap {}",
            hi + 7,
            seq.cap()
        )));
    }
    let cp = audit_policy(seq, "C7.5.delta", SIGMA_CONSTANT_WINDOW, None)?;
    let c = audit_estimate(seq, "C7.5.delta", SIGMA_CONSTANT_WINDOW, &cp)?.summary.max;
    let src = XiSource::new(seq, policy.guard_bits);

    // one surrogate per residue class, at the top index of the class plus 6
    let mut bars: BTreeMap<usize, (usize, Enclosure)> = BTreeMap::new();
    for k in lo..=hi {
        let top = (k..=hi).rev().find(|i| (i - k) % 6 == 0).expect("k itself");
        let k_prime = if top + 12 <= seq.cap() { top + 6 } else { top };
        if let std::collections::btree_map::Entry::Vacant(e) = bars.entry(k % 6 ) {
            e.insert((k_prime, delta_bar(seq, &src, policy.bits, k_prime, c)?));
        }
    }

    let v = seq.view(hi + 7)?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut scan = Vec::new();
    let two_gamma7 = 2.0 * GOLDEN_RATIO.powi(7);
    for k in lo..=hi {
        let x6 = XiForm::monomial(6, v.x(k, 0).clone());
        let e = eval_form(&src, policy.bits, &x6, EXTRA_BITS)?;
        let fr = frac_nearest(&e)?.frac.to_f64();
        scan.push(FracScanRow {
            k,
            frac: fr,
            k_frac: k as f64 * fr,
            k_pow_frac: (k as f64).powf(two_gamma7) * fr,
        });
        match deg6_record(seq, &v, &src, k, &bars[&(k % 6)], policy) {
            Ok(r) => records.push(r),
            Err(Error::PrecisionExhausted(msg)) => skipped.push((k, msg)),
            Err(e) => return Err(e),
        }
    }
    if records.is_empty() && !skipped.is_empty() {
        return Err(Error::PrecisionExhausted(format!(
            "no deg6 record computable on [{lo}, {hi}]: {}",
            skipped[0].1
        )));
    }
    Ok(Deg6Report {
        k_lo: lo,
        k_hi: hi,
        sigma_constant: c,
        records,
        skipped,
        scan,
    })
}

fn deg6_record(
    seq: &MarkoffSequence,
    v: &TermsView,
    src: &XiSource<'_>,
    k: usize,
    bar: &(usize, Enclosure),
    policy: &PrecisionPolicy,
) -> Result<Deg6Record> {
    let (bar_index, bar) = bar;
    let max_bits = policy.bits;
    let one = Integer::from(1);
    let lk = log2_abs(v.norm(k));
    let sigma_e = eval_form(src, max_bits, &sigma_form(v, k, &one), lk + EXTRA_BITS)?;
    let (sigma, n_sigma) = reduce(&sigma_e)
        .ok_or_else(|| Error::PrecisionExhausted(format!("sigma_{k} straddles a half-integer")))?;
    let x3 = v.x(k - 3, 0);
    let x2 = v.x(k - 2, 0);
    let t = nearest_integer(&eval_form(src, max_bits, &sigma_form(v, k, x3), EXTRA_BITS)?, "x_{k-3,0} sigma_k")?;
    // x_{k-2,0} sigma_k = t' - 36 (-1)^k x_{k-1,2} xi + O(X_{k-1}^-1)
    let shift = Integer::from(v.x(k - 1, 2) * (36 * parity_sign(k)));
    let t_prime_form = sigma_form(v, k, x2).plus(1, shift);
    let t_prime = nearest_integer(&eval_form(src, max_bits, &t_prime_form, EXTRA_BITS)?, "x_{k-2,0} sigma_k")?;
    let u = nearest_integer(&bar.sub(&sigma), "delta_bar - sigma_k")? - n_sigma;
    let alpha_rational = Rational::from((t.clone(), x3.clone())) + &u;
    let alpha_deviation = Enclosure::from_rational(&alpha_rational, bar.bits())
        .sub(bar)
        .abs()
        .with_bits(128)
        .mul(&Enclosure::from_integer(v.norm(k), 128))
        .to_f64();
    let gcd_t = x3.clone().gcd(&t);
    let gcd_divides_72 = gcd_t != 0 && Integer::from(GCD_BOUND).is_divisible(&gcd_t);
    let lhs = Integer::from(x2 * &t);
    let rhs = Integer::from(x3 * &t_prime) - a_k(v, k - 3) * (36 * parity_sign(k));
    let t_relation = lhs == rhs;

    let mut s = Vec::with_capacity(3);
    for j in [k - 1, k, k + 1] {
        let e = eval_form(src, max_bits, &XiForm::monomial(6, v.x(j, 0).clone()), EXTRA_BITS)?;
        s.push(nearest_integer(&e, "x_{j,0} xi^6")?);
    }
    let s3: [Integer; 3] = [s[0].clone(), s[1].clone(), s[2].clone()];
    let p = p_polynomial(seq, k, &s3)?;
    let shape_ok = has_deg6_shape(&p);

    // the root sits about X_k^-1 X_{k+1}^-1 away from xi
    let lk1 = log2_abs(v.norm(k + 1));
    let root_bits = (2.0 * (lk + lk1) + 2.0 * p.norm().significant_bits() as f64) as u32 + policy.guard_bits;
    let xi = src.xi(root_bits as f64 + EXTRA_BITS)?;
    let root_policy = PrecisionPolicy::with_bits(root_bits);
    let root = refine_root(&p, &xi.with_bits(root_bits), &root_policy)?;
    let diff = xi.sub(&root);
    if diff.contains_zero() {
        return Err(Error::PrecisionExhausted(format!(
            "xi and the root of P_{k} are not separated at {root_bits} bits"
        )));
    }
    let xi_minus_root_log2 = log2_upper(&diff);
    let height = Integer::from(p.norm() / p.content());
    let height_proxy_log2 = log2_abs(&height);
    let log2_q = xi_minus_root_log2 + (GOLDEN_RATIO + 1.0) * height_proxy_log2 + log2_loglog(height_proxy_log2);
    Ok(Deg6Record {
        k,
        sigma,
        delta_bar: bar.clone(),
        delta_bar_index: *bar_index,
        t,
        t_prime,
        u,
        alpha_rational,
        alpha_deviation,
        gcd_t,
        gcd_divides_72,
        t_relation,
        s,
        p,
        shape_ok,
        root,
        height_proxy_log2,
        xi_minus_root_log2,
        quality: log2_q.exp2(),
    })
}
