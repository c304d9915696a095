"""Closed-form moment tables and parameter sets used by the regression corpus.

Tables are indexed ``h[k][l] = 𝓛(x^k y^l)``.  Entries are exact when the
parameters are rationals and floats otherwise.
"""
from __future__ import annotations

from fractions import Fraction

from . import numerics as nm


def _param(v):
    v = nm.parse_scalar(v)
    return v if isinstance(v, float) else Fraction(v)


def bs_example_table(c1, c2):
    """5×3 moment table of the Bernstein-Szegő weight with parameters (c₁, c₂)."""
    c1, c2 = _param(c1), _param(c2)
    a = c1 * c1
    b = c2 * c2
    h = [
        [1, c1 * c2 / 2, (a * b + 1) / 4],
        [c2 / 2, c1 * (b + 1) / 4, c2 * (a * b + a + 1) / 8],
        [(b + 1) / 4, c1 * c2 * (b + 2) / 8, (b + 1) * (a * b + a + 1) / 16],
        [c2 * (b + 2) / 8, c1 * (b + 1) * (b + 2) / 16,
         c2 * (a * b * b + 3 * a * b + 3 * a + b + 2) / 32],
        [(b + 1) * (b + 2) / 16, c1 * c2 * (b * b + 4 * b + 5) / 32,
         (b + 1) * (a * b * b + 3 * a * b + 3 * a + b + 2) / 64],
    ]
    return [[_norm(v, c1 + c2) for v in row] for row in h]


def one_sided_example_table(c0, c1):
    """3×3 moment table of the one-sided example with parameters (c₀, c₁)."""
    c0, c1 = _param(c0), _param(c1)
    Q = Fraction
    h = [
        [Q(1), -c0 / 6 - Q(173, 2688) * c1,
         Q(13, 432) * c0 * c0 + Q(731, 24192) * c1 * c0 + Q(38509, 3096576) * c1 * c1 + Q(1, 3)],
        [Q(113, 448), -Q(173, 2688) * c0 - Q(70429, 1204224) * c1,
         Q(731, 48384) * c0 * c0 + Q(38509, 1548288) * c1 * c0
         + Q(85970699, 9710862336) * c1 * c1 + Q(2, 21)],
        [Q(59809, 200704), -Q(70429, 1204224) * c0 - Q(19352717, 539492352) * c1,
         Q(38509, 3096576) * c0 * c0 + Q(85970699, 4855431168) * c1 * c0
         + Q(33713900827, 4350466326528) * c1 * c1 + Q(61, 588)],
    ]
    return [[_norm(v, c0 + c1) for v in row] for row in h]


def _norm(v, probe):
    if isinstance(probe, float):
        return float(v)
    return Fraction(v)


def chebyshev_table(n, m, exact=True):
    """Moments of the product of two normalized Chebyshev U-weights."""
    def mom(k):
        if k % 2:
            return Fraction(0)
        j = k // 2
        # Catalan number over 4^j
        c = 1
        for i in range(j):
            c = c * 2 * (2 * i + 1) // (i + 2)
        return Fraction(c, 4 ** j)
    h = [[mom(k) * mom(l) for l in range(2 * m + 1)] for k in range(2 * n + 1)]
    if not exact:
        h = [[float(v) for v in row] for row in h]
    return h


# Parameter sets of the regression corpus
BS_FLOAT = (0.3, 0.5)
BS_OUTSIDE = (Fraction(1, 2), Fraction(3))
ONE_SIDED_RATIONAL = (Fraction(1, 10), Fraction(1, 5))
ONE_SIDED_IN_BOX = (Fraction(1, 2), Fraction(1, 5))
ONE_SIDED_OUT_OF_BOX = (Fraction(1), Fraction(0))
# (6, 1) satisfies both extension inequalities; see the README corpus notes
ONE_SIDED_EXTENSION = (Fraction(6), Fraction(1))
