mod common;

use markoff_lab::auditors::*;
use markoff_lab::matseq::{IntPoly, MarkoffSequence};
use markoff_lab::parity_sign;
use markoff_lab::realfield::PrecisionPolicy;
use rug::{Integer, Rational};

fn norm(m: &[[Integer; 2]; 2]) -> Integer {
    [&m[0][0], &m[0][1], &m[1][1]].iter().map(|x| Integer::from(x.abs_ref())).max().unwrap()
}

#[test]
fn first_estimate_against_rational_oracle() {
    let seq = MarkoffSequence::canonical();
    let pol = audit_policy(&seq, "L2.3a", (3, 6), None).unwrap();
    let rep = audit_estimate(&seq, "L2.3a", (3, 6), &pol).unwrap();
    let t = common::terms(9);
    let rho = common::xi_rational(16);
    for (k, value) in rep.values() {
        let x = |i: usize| &t[i - 1];
        let a = Integer::from(&x(k)[0][1] * &x(k + 2)[1][1]) - Integer::from(&x(k + 1)[1][1] * parity_sign(k));
        let lhs = Rational::from(&rho * Integer::from(&x(k)[0][0] * &x(k + 2)[1][1]));
        let err = (lhs - a).abs() * norm(x(k + 1));
        let oracle = err.to_f64();
        assert!((value - oracle).abs() <= 1e-9 * oracle.max(1.0), "k = {k}: {value} vs {oracle}");
    }
    let k3 = rep.values()[0].1;
    assert!((k3 - 1.3397).abs() < 1e-3, "{k3}");
}

#[test]
fn registry_shape() {
    let ids: Vec<&str> = registry().iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids.len(), 45);
    let mut sorted = ids.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), 45, "ids are unique");
    assert_eq!(M_J, [2, 6, 20, 80, 360, 1840]);
    assert_eq!(lookup("nope").unwrap_err().name(), "UnknownEstimate");
}

#[test]
fn range_and_degree_limits() {
    let seq = MarkoffSequence::canonical();
    let pol = PrecisionPolicy::with_bits(512);
    let e = audit_estimate(&seq, "L2.3a", (1, 4), &pol).unwrap_err();
    assert_eq!(e.name(), "IndexOutOfRange");
    let e = audit_estimate(&seq, "L2.3a", (6, 4), &pol).unwrap_err();
    assert!(matches!(e.name(), "IndexOutOfRange" | "Config"));
    let p = registry().iter().find(|s| s.takes_poly).unwrap();
    let huge = IntPoly::monomial(40, 1);
    let e = audit_estimate_with(&seq, &p.id, (8, 9), &pol, Some(&huge)).unwrap_err();
    assert_eq!(e.name(), "DegreeTooHigh");
    assert!(audit_estimate_with(&seq, &p.id, (8, 9), &pol, Some(&IntPoly::zero())).is_err());
}

#[test]
fn summary_recomputes_from_rows() {
    let seq = MarkoffSequence::canonical();
    for id in ["L2.3c", "L2.4ii", "P7.4.sigma"].iter().filter(|id| lookup(id).is_ok()) {
        let pol = audit_policy(&seq, id, (8, 12), None).unwrap();
        let rep = audit_estimate(&seq, id, (8, 12), &pol).unwrap();
        assert_eq!(AuditSummary::from_rows(&rep.rows), rep.summary);
        assert_eq!(rep.summary.skipped, 0);
        assert!(rep.summary.bounded_ok, "{id}");
        let json: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(json["rows"].as_array().unwrap().len(), 5);
    }
}
