mod common;

use markoff_lab::matseq::{q_polynomial, IntPoly, MarkoffSequence};
use markoff_lab::realfield::*;
use markoff_lab::Error;
use rug::{Integer, Rational};

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

#[test]
fn xi_from_reference_index() {
    let seq = MarkoffSequence::canonical();
    let pol = PrecisionPolicy::with_bits(512);
    let e7 = xi_enclosure(&seq, 7, &pol).unwrap();
    assert!((e7.to_f64() - 0.5866033).abs() < 1e-7);
    assert!(e7.radius_f64() <= 1.0 / 37666.0 * 1.01);
    let e5 = xi_enclosure(&seq, 5, &pol).unwrap();
    assert!(e5.intersects(&e7));
    // oracle: a far better rational approximant lies in both
    let rho = common::xi_rational(12);
    assert!(e7.contains_rational(&rho) && e5.contains_rational(&rho));
}

#[test]
fn xi_source_meets_accuracy() {
    let seq = MarkoffSequence::canonical();
    let src = XiSource::new(&seq, DEFAULT_GUARD_BITS);
    for acc in [64.0, 300.0, 2000.0] {
        let xi = src.xi(acc).unwrap();
        assert!(xi.radius_log2() <= -acc, "accuracy {acc}");
        assert!(xi.contains_rational(&common::xi_rational(16)) || acc > 1000.0);
        assert!(xi.intersects(&src.xi(64.0).unwrap()));
    }
}

#[test]
fn fractional_distance_examples() {
    let f = frac_nearest(&Enclosure::from_rational(&q(13, 4), 64)).unwrap();
    assert!(f.frac.contains_rational(&q(1, 4)) && f.frac.radius_f64() == 0.0);
    assert_eq!(f.nearest, Some(Integer::from(3)));

    let e = Enclosure::from_rational_radius(&q(-2, 5), &q(1, 100), 64);
    let f = frac_nearest(&e).unwrap();
    assert_eq!(f.nearest, Some(Integer::from(0)));
    assert!((f.frac.to_f64() - 0.4).abs() < 1e-12);
    assert!((f.frac.radius_f64() - 0.01).abs() < 1e-12);

    let e = Enclosure::from_rational_radius(&q(5, 2), &q(1, 1000), 64);
    let f = frac_nearest(&e).unwrap();
    assert!(f.is_ambiguous());
    assert!(f.frac.lo_rational() >= q(499, 1000) - q(1, 1_000_000));
    assert!(f.frac.hi_rational() >= q(1, 2));

    let wide = Enclosure::from_rational_radius(&q(0, 1), &q(1, 2), 64);
    assert!(matches!(frac_nearest(&wide), Err(Error::RadiusTooLarge(_))));
}

#[test]
fn polynomial_evaluation() {
    let golden = IntPoly::from_i64(&[-1, -1, 1]);
    let g = Enclosure::from_f64(1.6180339887, 1e-9, 128);
    let v = eval_int_poly(&golden, &g);
    assert!(v.contains_zero());
    assert!(2.0 * v.radius_f64() <= 1e-8);

    let seq = MarkoffSequence::canonical();
    let q5 = q_polynomial(&seq, 5).unwrap();
    let xi = xi_enclosure(&seq, 9, &PrecisionPolicy::with_bits(512)).unwrap();
    let v = eval_int_poly(&q5, &xi);
    let rho = common::xi_rational(14);
    let oracle: Rational = Rational::from(&rho * &rho) * 5u32 + Rational::from(&rho * 9u32) - 7u32;
    assert!(v.radius_f64() * 2.0 <= 1e-6);
    assert!((v.to_f64() - oracle.to_f64()).abs() <= v.radius_f64() + 1e-20);
    assert!((v.to_f64() + 5.3098e-5).abs() < 1e-8);

    let z = eval_int_poly(&IntPoly::zero(), &xi);
    assert_eq!(z.to_f64(), 0.0);
    assert_eq!(z.radius_f64(), 0.0);
}

#[test]
fn newton_refinement() {
    let pol = PrecisionPolicy::with_bits(256);
    let sqrt2 = refine_root(&IntPoly::from_i64(&[-2, 0, 1]), &Enclosure::from_f64(1.4, 0.1, 256), &pol).unwrap();
    assert!(sqrt2.square().contains_rational(&q(2, 1)));
    assert!(sqrt2.radius_log2() < -200.0);
    let g = refine_root(&IntPoly::from_i64(&[-1, -1, 1]), &Enclosure::from_f64(1.6, 0.1, 256), &pol).unwrap();
    assert!((g.to_f64() - markoff_lab::GOLDEN_RATIO).abs() < 1e-15);
    let gg = g.square().sub(&g);
    assert!(gg.contains_rational(&q(1, 1)));
}

/// Partial quotients by the Euclidean algorithm.
fn euclid(mut a: Integer, mut b: Integer) -> Vec<Integer> {
    let mut out = Vec::new();
    while b != 0 {
        let (qt, r) = a.div_rem_floor(b.clone());
        out.push(qt);
        a = b;
        b = r;
    }
    out
}

#[test]
fn continued_fractions() {
    assert_eq!(continued_fraction_rational(&q(7, 3), 10), vec![Integer::from(2), Integer::from(3)]);
    let seq = MarkoffSequence::canonical();
    let xi = xi_enclosure(&seq, 12, &PrecisionPolicy::with_bits(4096)).unwrap();
    let cf = continued_fraction(&xi, 12);
    assert_eq!(cf.len(), 12);
    let head: Vec<i64> = cf.iter().take(5).map(|a| a.to_i64().unwrap()).collect();
    assert_eq!(head, vec![0, 1, 1, 2, 2]);
    // oracle: expansion of a rational approximant agrees on the certified prefix
    let t = common::terms(16);
    let oracle = euclid(t[15][0][1].clone(), t[15][0][0].clone());
    assert_eq!(&oracle[..12], &cf[..]);
    let conv = convergents(&cf);
    for (p, qd) in &conv[2..] {
        let err = Enclosure::from_integer(qd, 4096).mul(&xi).sub(&Enclosure::exact_integer(p, 4096)).abs();
        assert!(err.to_f64() * qd.to_f64() < 1.0);
    }
    let wide = Enclosure::from_f64(0.5, 0.25, 64);
    assert!(continued_fraction(&wide, 10).len() <= 1);
}

#[test]
fn schedule_grows_with_k() {
    let seq = MarkoffSequence::canonical();
    let a = PrecisionPolicy::schedule(&seq, 8, 256).unwrap();
    let b = PrecisionPolicy::schedule(&seq, 12, 256).unwrap();
    assert!(b.bits > a.bits && a.bits > 256);
    assert!(a.meets_schedule(&seq).unwrap());
    assert!(!PrecisionPolicy { bits: 300, ..a }.meets_schedule(&seq).unwrap());
}
