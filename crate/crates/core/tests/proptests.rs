use markoff_lab::cli::{cache_string, parse_cache};
use markoff_lab::matseq::{IntPoly, MarkoffSequence};
use markoff_lab::realfield::{eval_int_poly, frac_nearest, frac_rational, Enclosure};
use proptest::prelude::*;
use rug::{Integer, Rational};

const BITS: u32 = 128;

fn rational() -> impl Strategy<Value = Rational> {
    (-10_000i64..10_000, 1i64..1000).prop_map(|(n, d)| Rational::from((n, d)))
}

fn radius() -> impl Strategy<Value = Rational> {
    (0i64..50, 1i64..1000).prop_map(|(n, d)| Rational::from((n, d * 100)))
}

fn poly() -> impl Strategy<Value = IntPoly> {
    prop::collection::vec(-50i64..50, 0..6).prop_map(|c| IntPoly::from_i64(&c))
}

fn ball(c: &Rational, r: &Rational) -> Enclosure {
    Enclosure::from_rational_radius(c, r, BITS)
}

proptest! {
    #[test]
    fn arithmetic_contains_exact_results(a in rational(), b in rational(), ra in radius(), rb in radius(),
                                         ta in -1.0f64..1.0, tb in -1.0f64..1.0) {
        // any point of each ball maps into the result ball
        let x = &a + Rational::from_f64(ta).unwrap() * &ra;
        let y = &b + Rational::from_f64(tb).unwrap() * &rb;
        let (ea, eb) = (ball(&a, &ra), ball(&b, &rb));
        prop_assert!(ea.add(&eb).contains_rational(&Rational::from(&x + &y)));
        prop_assert!(ea.sub(&eb).contains_rational(&Rational::from(&x - &y)));
        prop_assert!(ea.mul(&eb).contains_rational(&Rational::from(&x * &y)));
        prop_assert!(ea.abs().contains_rational(&Rational::from(x.abs_ref())));
        if !eb.contains_zero() {
            prop_assert!(ea.div(&eb).unwrap().contains_rational(&Rational::from(&x / &y)));
        }
    }

    #[test]
    fn polynomial_evaluation_contains_exact(p in poly(), c in rational(), r in radius()) {
        let e = ball(&c, &r);
        prop_assert!(eval_int_poly(&p, &e).contains_rational(&p.eval_rational(&c)));
    }

    #[test]
    fn frac_agrees_with_rational(c in rational()) {
        let (f, n) = frac_rational(&c);
        let got = frac_nearest(&Enclosure::from_rational(&c, BITS)).unwrap();
        prop_assert!(got.frac.contains_rational(&f));
        prop_assert!(f >= 0 && f <= (1, 2));
        if f != (1, 2) {
            prop_assert_eq!(got.nearest, Some(n));
        }
    }

    #[test]
    fn poly_display_round_trips(p in poly()) {
        let back: IntPoly = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn products_are_divisible(a in poly(), b in poly(), t in -20i64..20) {
        let ab = a.mul(&b);
        let t = Integer::from(t);
        prop_assert_eq!(ab.eval_integer(&t), a.eval_integer(&t) * b.eval_integer(&t));
        if !b.is_zero() {
            prop_assert!(ab.divisible_by(&b));
        }
        prop_assert_eq!(ab.degree().is_none(), a.is_zero() || b.is_zero());
    }

    #[test]
    fn cache_round_trips(upto in 2usize..14) {
        let seq = MarkoffSequence::canonical();
        let text = cache_string(&seq, upto).unwrap();
        let back = parse_cache(&text).unwrap();
        prop_assert_eq!(cache_string(&back, upto).unwrap(), text);
    }
}
