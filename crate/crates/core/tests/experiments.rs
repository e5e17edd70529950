mod common;

use markoff_lab::experiments::*;
use markoff_lab::matseq::{IntPoly, MarkoffSequence};
use markoff_lab::realfield::PrecisionPolicy;
use markoff_lab::GOLDEN_RATIO;
use rug::Integer;

#[test]
fn mixed_product_matches_oracle() {
    let seq = MarkoffSequence::canonical();
    let t = common::terms(14);
    for j in 1..=4 {
        for k in 2..=8 {
            let mut q = Integer::from(1);
            for i in k..k + j {
                q *= &t[i - 1][0][0];
            }
            q *= &t[k + j][0][0];
            assert_eq!(mixed_product(&seq, k, j).unwrap(), q, "k = {k}, j = {j}");
        }
    }
}

#[test]
fn small_multipliers() {
    let seq = MarkoffSequence::canonical();
    let pol = PrecisionPolicy::with_bits(1 << 15);
    for (j, m) in [(1, 2), (2, 6)] {
        let r = mj_search(&seq, j, 200, &pol, &MjOptions::default()).unwrap();
        assert_eq!(r.m, m);
        assert!(r.unique_in_bound);
        assert!(r.kappa.is_finite() && r.kappa > 0.0);
    }
    assert_eq!(mj_search(&seq, 7, 200, &pol, &MjOptions::default()).unwrap_err().name(), "ConfigError");
    assert_eq!(default_threshold(2), 50.0);
}

#[test]
fn linear_scan_against_float_oracle() {
    let seq = MarkoffSequence::canonical();
    let pol = PrecisionPolicy::with_bits(512);
    let h = 12;
    let rep = brute_scan(&seq, &ScanMode::ROnly, 1, h, &pol, &ScanOptions::default()).unwrap();
    let xi = common::xi_f64();
    let e = GOLDEN_RATIO.powi(3);
    let mut best = (f64::INFINITY, 0, 0);
    for a in 1..=h {
        for b in -h..=h {
            let v = (a as f64 * xi + b as f64).abs() * (a.max(b.abs()) as f64).powf(e);
            if v < best.0 {
                best = (v, a, b);
            }
        }
    }
    assert!((rep.min_value - best.0).abs() < 1e-9, "{} vs {}", rep.min_value, best.0);
    assert_eq!(rep.argmin, IntPoly::from_i64(&[best.2, best.1]));
    assert!((rep.min_value - 0.41340).abs() < 1e-4);
    assert!(rep.min.sign() == Some(std::cmp::Ordering::Greater));
}

#[test]
fn exclusion_needs_small_degree() {
    let seq = MarkoffSequence::canonical();
    let opts = ScanOptions {
        exclude_q_divisible: true,
        ..Default::default()
    };
    let pol = PrecisionPolicy::with_bits(512);
    assert_eq!(brute_scan(&seq, &ScanMode::ROnly, 4, 2, &pol, &opts).unwrap_err().name(), "ConfigError");
    assert_eq!(brute_scan(&seq, &ScanMode::ROnly, 2, 0, &pol, &ScanOptions::default()).unwrap_err().name(), "ConfigError");
}

#[test]
fn lagrange_window() {
    let seq = MarkoffSequence::canonical();
    let pol = PrecisionPolicy::with_bits(512);
    assert_eq!(lagrange_scan(&seq, 1, &pol).unwrap_err().name(), "IndexOutOfRange");
    let rep = lagrange_scan(&seq, 40_000, &pol).unwrap();
    let xi = common::xi_f64();
    let (mut best, mut arg) = (f64::INFINITY, 0);
    for n in 1000..=40_000u64 {
        let v = n as f64 * common::dist(n as f64 * xi);
        if v < best {
            best = v;
            arg = n;
        }
    }
    assert_eq!(rep.argmin, arg);
    assert!((rep.min_value - best).abs() < 1e-6);
    assert!(rep.min_value > 0.3 && rep.min_value < 0.34);
}

#[test]
fn period_three_for_cubic() {
    let seq = MarkoffSequence::canonical();
    let pol = PrecisionPolicy::schedule(&seq, 14, 256).unwrap();
    let d3 = delta_points(&seq, &IntPoly::monomial(3, 1), &pol).unwrap();
    assert!(d3.period3);
    let wanted = [0.03464, 0.20092, 0.41379];
    for e in &d3.values {
        assert!(wanted.iter().any(|w| (e.to_f64() - w).abs() < 1e-4), "{}", e.to_f64());
    }
    for w in wanted {
        assert!(d3.values.iter().any(|e| (e.to_f64() - w).abs() < 1e-4), "{w} missing");
    }
    let d2 = delta_points(&seq, &IntPoly::monomial(2, 1), &pol).unwrap();
    assert!(d2.values.iter().all(|e| e.contains_zero()));
}

#[test]
fn degree_six_small_window() {
    let seq = MarkoffSequence::canonical();
    let rep = deg6_pipeline(&seq, (8, 11), &PrecisionPolicy::with_bits(1 << 16)).unwrap();
    assert!(!rep.records.is_empty());
    for r in &rep.records {
        assert!(r.shape_ok && has_deg6_shape(&r.p));
        assert_eq!(r.p.leading(), &Integer::from(2));
        assert!(r.gcd_divides_72 && r.t_relation, "k = {}", r.k);
        assert_eq!(Integer::from(72) % &r.gcd_t, 0);
    }
}
