from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bszego import bs1d
from bszego import numerics as nm
from bszego.errors import InteriorUnitRoot, NotPositive, NotStable, RegimeViolation
from bszego.poly import RealPoly, chebU, resultant, reverse

coef = st.fractions(min_value=-1, max_value=1, max_denominator=9)


@st.composite
def stable_rational(draw, min_deg=1, max_deg=6):
    """Rational q with q(0) > Σ_{k≥1}|q_k|, hence no zeros in the closed disk."""
    d = draw(st.integers(min_deg, max_deg))
    tail = draw(st.lists(coef, min_size=d, max_size=d).filter(lambda t: t[-1] != 0))
    slack = draw(st.fractions(min_value=F(1, 8), max_value=2, max_denominator=8))
    return RealPoly([sum(abs(t) for t in tail) + slack] + tail, True, "w")


def w(*c):
    return RealPoly([F(v) for v in c], True, "w")


def delta4(q0, q1, q2, q3, q4):
    return (q0 ** 3 - q0 ** 2 * q2 + q0 * q1 * q3 - q0 * q3 ** 2 - q0 ** 2 * q4 - q1 ** 2 * q4
            + 2 * q0 * q2 * q4 + q1 * q3 * q4 - q0 * q4 ** 2 - q2 * q4 ** 2 + q4 ** 3)


def test_moments_chebyshev():
    assert list(bs1d.moments_from_q(w(1), 2)) == [1, 0, F(1, 4)]


def test_moments_quadratic_example():
    h = bs1d.moments_from_q(w(2, 0, 1), 2)
    assert list(h) == [F(1, 2), 0, F(1, 16)]


def test_quadratic_closed_forms():
    rng = np.random.default_rng(5)
    for _ in range(10):
        q1, q2 = (F(int(v), 7) for v in rng.integers(-6, 7, 2))
        q0 = abs(q1) + abs(q2) + F(int(rng.integers(1, 9)), 4)
        h = bs1d.moments_from_q(w(q0, q1, q2), 2)
        assert h[0] == 1 / (q0 * (q0 - q2))
        assert h[1] == -q1 / (2 * q0 ** 2 * (q0 - q2))
        assert h[2] == (q0 ** 2 + q1 ** 2 - q0 * q2) / (4 * q0 ** 3 * (q0 - q2))
        if q2 != 0:
            assert bs1d.delta_m(w(q0, q1, q2)) == q0 - q2


def test_quartic_closed_forms_exact():
    rng = np.random.default_rng(11)
    for _ in range(20):
        t = [F(int(v), int(d)) for v, d in zip(rng.integers(-5, 6, 4), rng.integers(1, 8, 4))]
        if t[3] == 0:
            t[3] = F(1, 3)
        q0 = sum(abs(v) for v in t) + F(int(rng.integers(1, 5)), 3)
        q = w(q0, *t)
        D = delta4(q0, *t)
        q1, q2, q3, q4 = t
        h = bs1d.moments_from_q(q, 2)
        assert bs1d.delta_m(q) == D
        assert h[0] == (q0 - q4) / D
        assert h[1] == (q3 - q1) / (2 * D)
        assert h[2] == (q0 ** 2 + q1 ** 2 - q0 * q2 - q1 * q3 + q2 * q4 - q4 ** 2) / (4 * q0 * D)


def test_delta_constant_and_boundary():
    assert bs1d.delta_m(w(3)) == 1
    # simple zero at w = 1: the quadratic closed forms still apply
    q0, q1, q2 = F(2), F(-1), F(-1)
    h = bs1d.moments_from_q(w(q0, q1, q2), 2)
    assert h[0] == 1 / (q0 * (q0 - q2))
    assert h[1] == -q1 / (2 * q0 ** 2 * (q0 - q2))
    assert h[2] == (q0 ** 2 + q1 ** 2 - q0 * q2) / (4 * q0 ** 3 * (q0 - q2))


def test_residue_vs_partial_fraction_vs_quadrature():
    q = RealPoly([3.0, 0.4, -0.7, 0.2, 0.5], False, "w")
    a = bs1d.moments_from_q(q, 8)
    b = bs1d.moments_from_q(q, 8, method="residue")
    assert np.max(np.abs(np.array(a, float) - np.array(b, float))) < 1e-12
    for j in range(9):
        r = nm.integrate_adaptive(lambda y: y ** j / np.abs(q(y + 1j * np.sqrt(1 - y * y))) ** 2)
        assert abs(r.value - a[j]) < 1e-10


@given(stable_rational(2, 4))
def test_moments_match_quadrature(q):
    h = bs1d.moments_from_q(q, 4)
    qf = q.to_float()
    for j in range(5):
        r = nm.integrate_adaptive(lambda y: y ** j / np.abs(qf(y + 1j * np.sqrt(1 - y * y))) ** 2)
        assert abs(r.value - float(h[j])) < 1e-11 * max(1.0, abs(r.value))


@st.composite
def stable_integer(draw):
    d = draw(st.integers(1, 6))
    tail = draw(st.lists(st.integers(-3, 3), min_size=d, max_size=d).filter(lambda t: t[-1] != 0))
    return RealPoly([sum(map(abs, tail)) + draw(st.integers(1, 4))] + tail, True, "w")


@given(stable_integer())
def test_moment_numerators_polynomial(q):
    """For integer q, 2^j Δ_m(q) h_j(q) is an integer up to powers of q₀."""
    from math import gcd
    D = bs1d.delta_m(q)
    q0 = int(q.coef(0))
    for j, h in enumerate(bs1d.moments_from_q(q, 6)):
        den = (F(2) ** j * D * h).denominator
        while den > 1 and gcd(den, q0) > 1:
            den //= gcd(den, q0)
        assert den == 1, j


@given(stable_rational(1, 6))
def test_hankel_roundtrip(q):
    k = (q.deg + 1) // 2
    h = bs1d.moments_from_q(q, 2 * k)
    assert bs1d.recover_q_from_hankel(bs1d.hankel(h, k)).q == q


def test_hankel_roundtrip_examples():
    assert bs1d.recover_q_from_hankel(bs1d.hankel(bs1d.moments_from_q(w(1), 2), 1)).q == w(1)
    assert bs1d.recover_q_from_hankel(bs1d.hankel(bs1d.moments_from_q(w(2, 0, 1), 2), 1)).q == w(2, 0, 1)
    q = w(5, "1/2", -1, "3/7", "1/9")
    assert bs1d.recover_q_from_hankel(bs1d.hankel(bs1d.moments_from_q(q, 4), 2)).q == q


def test_resultant_identity_exact_example():
    q = w(5, "1/2", -1, "3/7", "1/9")
    m = q.deg
    lhs = resultant(q, reverse(q, m))
    assert lhs == (-1) ** m * q(1) * q(-1) * bs1d.delta_m(q) ** 2


def test_resultant_identity_float():
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = int(rng.integers(2, 7))
        roots = []
        while len(roots) < d:
            r = rng.uniform(1.2, 3.0) * np.exp(1j * rng.uniform(0, np.pi))
            roots += [r, np.conj(r)] if d - len(roots) >= 2 else [rng.choice([-1, 1]) * rng.uniform(1.2, 3)]
        q = RealPoly(np.real(np.poly(roots))[::-1] * rng.uniform(0.5, 2), False, "w")
        lhs = resultant(q, reverse(q, q.deg))
        rhs = (-1) ** q.deg * q(1.0) * q(-1.0) * bs1d.delta_m(q) ** 2
        assert abs(lhs - rhs) <= 1e-9 * abs(lhs)


def test_orthonormal_examples():
    assert bs1d.orthonormal_from_q(w(1), 2).poly == RealPoly(chebU(2).c, True, "y")
    q = w(2, 0, 1)
    p1 = bs1d.orthonormal_from_q(q, 1).poly
    h = bs1d.moments_from_q(q, 2)
    c = p1.c
    norm = sum(c[i] * c[j] * h[i + j] for i in range(2) for j in range(2))
    assert norm == 1
    q4 = w(5, "1/2", -1, "3/7", "1/9")
    o = bs1d.orthonormal_from_q(q4, 1)
    assert o.norm_sq == (q4.coef(0) - q4.coef(4)) / q4.coef(0)
    h = bs1d.moments_from_q(q4, 2)
    c = o.poly.c
    assert sum(c[i] * c[j] * h[i + j] for i in range(2) for j in range(2)) == o.norm_sq
    with pytest.raises(RegimeViolation):
        bs1d.orthonormal_from_q(w(5, "1/2", -1, "3/7", "1/9", "1/10"), 1)


def test_orthogonality_regime_gram():
    q = w(4, 1, "-1/2", "1/3", "1/5")
    for k in (2, 3):
        P = [bs1d.orthonormal_from_q(q, j) for j in range(1, k + 1)]
        h = bs1d.moments_from_q(q, 2 * k)
        for a in P:
            for b in P:
                ip = sum(a.poly.coef(i) * b.poly.coef(j) * h[i + j]
                         for i in range(k + 1) for j in range(k + 1))
                assert ip == (a.norm_sq if a is b else 0)


def test_reproducing_kernel_examples():
    K = bs1d.reproducing_kernel(bs1d.hankel(bs1d.moments_from_q(w(1), 2), 1))
    assert K.tolist() == [[1, 0], [0, 4]]
    K = bs1d.reproducing_kernel(bs1d.hankel(bs1d.moments_from_q(w(2, 0, 1), 2), 1))
    assert K.tolist() == [[2, 0], [0, 16]]


@given(stable_rational(1, 6), st.integers(0, 2 ** 32 - 1))
def test_christoffel_darboux_matches_inverse_hankel(q, seed):
    k = max(1, (q.deg - 1) // 2)
    if 2 * k + 2 < q.deg:
        k += 1
    qf = q.to_float()
    h = bs1d.moments_from_q(qf, 2 * k)
    K = bs1d.reproducing_kernel(nm.coerce(bs1d.hankel(h, k)))
    rng = np.random.default_rng(seed)
    for y, y1 in rng.uniform(-1, 1, (50, 2)):
        cd = bs1d.christoffel_darboux(qf, k, y, y1)
        ker = bs1d.kernel_eval(K, y, y1)
        assert abs(cd - ker) <= 1e-11 * max(1.0, abs(ker))


@given(stable_rational(1, 6))
def test_bezout_identity_vanishes(q):
    k = (q.deg + 1) // 2
    if k == 0:
        return
    H = bs1d.hankel(bs1d.moments_from_q(q, 2 * k), k)
    K = bs1d.reproducing_kernel(H)
    for y, y1 in ((F(1, 3), F(-2, 5)), (F(3, 4), F(1, 7))):
        assert bs1d.bezout_residual(q, K, y, y1) == 0


def test_stable_fejer_riesz_examples():
    assert bs1d.stable_fejer_riesz(RealPoly([1], True)).q == RealPoly([1], True, "z")
    assert bs1d.stable_fejer_riesz(RealPoly([F(5, 4), -1], True)).q == RealPoly([1, F(-1, 2)], True, "z")
    with pytest.raises(NotPositive):
        bs1d.stable_fejer_riesz(RealPoly([0.5, -1.0], False))
    # zero of x² on the interval is interior to the circle's image
    with pytest.raises((InteriorUnitRoot, NotPositive)):
        bs1d.stable_fejer_riesz(RealPoly([0.0, 0.0, 1.0], False))


@given(st.lists(st.floats(1.2, 3.0), min_size=2, max_size=2), st.floats(0.2, 1.0), st.floats(1.2, 3.0))
def test_stable_fejer_riesz_roundtrip(radii, t0, r0):
    # degree 5 with roots on distinct rays
    roots = [-r0]
    for k, r in enumerate(radii):
        t = t0 + 1.1 * k
        roots += [r * np.exp(1j * t), r * np.exp(-1j * t)]
    q = RealPoly(np.real(np.poly(roots))[::-1], False, "z")
    if q.coef(0) < 0:
        q = -q
    from bszego.poly import LaurentPoly, laurent_to_x
    Q = laurent_to_x(LaurentPoly(q.c, 0, False) * LaurentPoly(q.c, 0, False).invert(), tol=1e-12)
    got = bs1d.stable_fejer_riesz(Q).q
    assert nm.max_abs(got.c - q.c) < 1e-8 * max(1.0, q.norm_inf())


def test_check_stable_rejects():
    with pytest.raises(NotStable):
        bs1d.check_stable(w(1, -2))
    with pytest.raises(NotStable):
        bs1d.check_stable(w(1, -2, 1))  # double zero at 1
    assert bs1d.check_stable(w(1, -1)).boundary_zeros == frozenset({1})
