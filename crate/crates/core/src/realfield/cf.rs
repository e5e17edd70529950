use rug::{Integer, Rational};

use super::enclosure::Enclosure;

/// Partial quotients of an exact rational (terminating expansion).
pub fn continued_fraction_rational(q: &Rational, max_terms: usize) -> Vec<Integer> {
    let mut out = Vec::new();
    let mut x = q.clone();
    while out.len() < max_terms {
        let a = Integer::from(x.floor_ref());
        let rest = Rational::from(&x - &a);
        out.push(a);
        if rest == 0 {
            break;
        }
        x = rest.recip();
    }
    out
}

/// Certified prefix of the continued fraction of any real in the enclosure:
/// the common prefix of the endpoint expansions.
pub fn continued_fraction(e: &Enclosure, max_terms: usize) -> Vec<Integer> {
    let mut lo = e.lo_rational();
    let mut hi = e.hi_rational();
    if lo == hi {
        return continued_fraction_rational(&lo, max_terms);
    }
    let mut out = Vec::new();
    while out.len() < max_terms {
        let a = Integer::from(lo.floor_ref());
        if Integer::from(hi.floor_ref()) != a {
            break;
        }
        let rest_lo = Rational::from(&lo - &a);
        let rest_hi = Rational::from(&hi - &a);
        out.push(a);
        if rest_lo == 0 || rest_hi == 0 {
            break;
        }
        // x -> 1/(x - a) reverses order
        lo = rest_hi.recip();
        hi = rest_lo.recip();
    }
    out
}

/// Convergents `p_n/q_n` of a partial-quotient list.
pub fn convergents(terms: &[Integer]) -> Vec<(Integer, Integer)> {
    let (mut p0, mut q0) = (Integer::from(1), Integer::from(0));
    let (mut p1, mut q1) = (Integer::from(0), Integer::from(1));
    let mut out = Vec::with_capacity(terms.len());
    for a in terms {
        let p = Integer::from(a * &p0) + &p1;
        let q = Integer::from(a * &q0) + &q1;
        p1 = std::mem::replace(&mut p0, p.clone());
        q1 = std::mem::replace(&mut q0, q.clone());
        out.push((p, q));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    #[test]
    fn seven_thirds() {
        let t = continued_fraction_rational(&Rational::from((7, 3)), 10);
        assert_eq!(t, [2, 3].map(Integer::from));
        let e = Enclosure::from_f64(2.25, 0.0, 64);
        assert_eq!(continued_fraction(&e, 10), [2, 4].map(Integer::from));
    }

    #[test]
    fn wide_interval() {
        let e = Enclosure::from_f64(1.0, 0.25, 64);
        assert!(continued_fraction(&e, 10).len() <= 1);
    }

    #[test]
    fn convergents_of_sqrt2_prefix() {
        let sqrt2 = Enclosure::new(Float::with_val(200, 2).sqrt(), Float::with_val(64, 1e-50));
        let t = continued_fraction(&sqrt2, 20);
        assert_eq!(t[0], 1);
        assert!(t[1..].iter().all(|a| *a == 2));
        let c = convergents(&t);
        assert_eq!(c[2], (Integer::from(7), Integer::from(5)));
    }
}
