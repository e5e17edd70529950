"""Smoke test for the markoff_lab_py extension."""

from fractions import Fraction

import markoff_lab_py as m


def main():
    seq = m.Sequence()
    assert seq.term(7) == (37666, 22095, 12961)
    x0, x1, x2 = seq.term(12)
    assert x0 * x2 - x1 * x1 == 1

    q5 = seq.q_polynomial(5)
    assert q5.coeffs() == [-7, 9, 5]
    assert str(q5) == "5T^2 + 9T - 7"
    assert m.Poly("5T^2 + 9T - 7") == q5
    assert (q5 * m.Poly([1, 1])).divisible_by(q5)
    assert q5(2) == 31

    center, radius = seq.xi(200)
    assert radius < 2.0**-200
    x0, x1, _ = seq.term(14)
    assert abs(Fraction(center) - Fraction(x1, x0)) < Fraction(1, 10**10)

    assert len(m.families()) == 18
    assert all(seq.verify(f, 10) for f in m.families())
    assert len(m.estimate_ids()) == 45
    assert m.seed_count(3) >= 1

    rep = m.audit(seq, "L2.3a", 8, 12)
    assert rep["summary"]["bounded_ok"] and rep["summary"]["skipped"] == 0

    values, period3 = m.delta(seq, "T^3", 14)
    assert period3 and len({round(v, 5) for v in values}) == 3

    assert m.mj(seq, 1, m_bound=100)["m"] == 2
    scan = m.scan(seq, d=1, height=6)
    assert abs(scan["min_value"] - 0.41340) < 1e-4
    lag = m.lagrange(seq, 20000)
    assert 0.3 < lag["min_value"] < 0.34

    try:
        seq.term(1000)
    except m.MarkoffError as e:
        assert "IndexOutOfRange" in str(e)
    else:
        raise AssertionError("cap not enforced")

    print("smoke test passed")


if __name__ == "__main__":
    main()
