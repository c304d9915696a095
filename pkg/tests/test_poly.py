from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bszego.errors import BoundTooSmall, DegreeViolation, ZeroInput
from bszego.poly import (BivarPoly, LaurentPoly, RealPoly, bivar_gcd, cheb_substitute, chebU,
                         laurent_to_x, pair_to_w, reverse, squarefree_yun, w_to_pair)

fracs = st.fractions(min_value=-3, max_value=3, max_denominator=12)


def X(*c):
    return RealPoly([F(v) for v in c], True)


def test_cheb_substitute_examples():
    assert cheb_substitute(X(0, 1)) == LaurentPoly([F(1, 2), 0, F(1, 2)], -1)
    assert cheb_substitute(X(F(5, 4), -1)) == LaurentPoly([F(-1, 2), F(5, 4), F(-1, 2)], -1)
    # (1 - z/2)(1 - 1/(2z))
    c = F(1, 2)
    prod = LaurentPoly([1, -c], 0) * LaurentPoly([-c, 1], -1)
    assert cheb_substitute(X(1 + c * c, -2 * c)) == prod
    assert cheb_substitute(X(0, 0, 1)) == LaurentPoly([F(1, 4), 0, F(1, 2), 0, F(1, 4)], -2)


@given(st.lists(fracs, min_size=1, max_size=7))
def test_cheb_substitute_palindrome_and_inverse(c):
    p = RealPoly(c, True)
    L = cheb_substitute(p)
    assert L.is_symmetric()
    if not p.is_zero():
        assert L.shift(p.deg).min_exp >= 0
    assert laurent_to_x(L) == p


def test_cheb_substitute_bivariate_palindrome():
    p = BivarPoly([[F(1), F(2)], [F(-3), F(1, 2)], [F(1, 5), 0]], ("x", "w"))
    L = cheb_substitute(p)
    g = L.grid
    assert (g == g[::-1]).all()
    assert laurent_to_x(L) == p


def test_reverse_examples():
    assert reverse(X(1, 2, 3), 2) == X(3, 2, 1)
    assert reverse(X(1), 3) == X(0, 0, 0, 1)
    q = X(5, "1/2", -1, "3/7", "1/9")
    assert reverse(q, 4).tolist() == q.tolist()[::-1]
    with pytest.raises(BoundTooSmall):
        reverse(X(1, 2, 3), 1)


@given(st.lists(fracs, min_size=1, max_size=8).filter(lambda c: c[0] != 0 and c[-1] != 0))
def test_reverse_involution(c):
    q = RealPoly(c, True)
    assert reverse(reverse(q, q.deg), q.deg) == q


def test_pair_to_w_examples():
    p1 = RealPoly([0, 2], True, "y")
    p0 = RealPoly([1], True, "y")
    assert pair_to_w(p1, p0, 1) == RealPoly([1], True, "w")
    a, b = w_to_pair(RealPoly([1], True, "w"), 1)
    assert a == RealPoly([0, 2], True, "y") and b == RealPoly([1], True, "y")
    with pytest.raises(DegreeViolation):
        pair_to_w(RealPoly([0, 0, 1], True, "y"), p0, 1)
    with pytest.raises(DegreeViolation):
        w_to_pair(RealPoly([0, 0, 0, 1], True, "w"), 1)


@given(st.integers(1, 3), st.integers(0, 2), st.data())
def test_pair_roundtrip(m, nx, data):
    """p ↦ (p_m, p_{m-1}) ↦ p is the identity on ℝ_{nx,2m}[x, w]."""
    g = data.draw(st.lists(st.lists(fracs, min_size=2 * m + 1, max_size=2 * m + 1),
                           min_size=nx + 1, max_size=nx + 1))
    p = BivarPoly(g, ("x", "w"), exact=True)
    pm, pm1 = w_to_pair(p, m)
    assert pm.degs[1] <= m and (pm1.is_zero() or pm1.degs[1] <= m - 1)
    assert pair_to_w(pm, pm1, m) == p


def test_chebU_examples():
    assert chebU(1) == X(0, 2)
    assert chebU(-1) == X(0)
    assert chebU(-3) == X(0, -2)
    assert chebU(2) == X(-1, 0, 4)


def test_chebU_recurrence():
    x2 = X(0, 2)
    for k in range(-10, 31):
        assert chebU(k + 1) == x2 * chebU(k) - chebU(k - 1)


def test_squarefree_yun():
    a, b = X(1, 1), X(-2, 0, 1)
    parts = squarefree_yun(a * b * b * b)
    assert parts[0] == a.monic() and parts[1] == X(1) and parts[2] == b


def _zw(d):
    return BivarPoly.from_dict({k: F(v) for k, v in d.items()}, ("z", "w"), exact=True)


def test_bivar_gcd_examples():
    c = F(1, 2)
    g = _zw({(0, 0): 1, (1, 1): -c})
    a = g * _zw({(0, 0): 2, (1, 0): -1})
    b = g * _zw({(0, 0): 3, (0, 1): -1})
    assert bivar_gcd(a, b) == g
    assert bivar_gcd(a, _zw({(0, 0): 1})) == _zw({(0, 0): 1})
    with pytest.raises(ZeroInput):
        bivar_gcd(_zw({(0, 0): 0}), _zw({(0, 0): 0}))


def _assoc(a: BivarPoly, b: BivarPoly):
    """True when a = λ b for a nonzero rational λ."""
    i, j = np.argwhere(b.grid != 0)[0]
    if b.offset != a.offset or a.grid.shape != b.grid.shape or a.grid[i, j] == 0:
        return False
    lam = a.grid[i, j] / b.grid[i, j]
    return (a - b * lam).is_zero()


small = st.fractions(min_value=-2, max_value=2, max_denominator=4)


def _rand_zw(data, dz, dw):
    g = data.draw(st.lists(st.lists(small, min_size=dw + 1, max_size=dw + 1), min_size=dz + 1, max_size=dz + 1))
    g[0][0] = g[0][0] or F(1)
    return BivarPoly(g, ("z", "w"), exact=True)


@given(st.data())
def test_bivar_gcd_associate(data):
    g = _rand_zw(data, data.draw(st.integers(0, 2)), data.draw(st.integers(0, 2)))
    a = _rand_zw(data, data.draw(st.integers(0, 2)), data.draw(st.integers(0, 2)))
    b = _rand_zw(data, data.draw(st.integers(0, 2)), data.draw(st.integers(0, 2)))
    lhs = bivar_gcd(g * a, g * b)
    rhs = g * bivar_gcd(a, b)
    assert _assoc(lhs, rhs)
