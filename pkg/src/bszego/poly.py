"""Dense polynomial algebra over exact rationals or floats.

Univariate, Laurent, bivariate and matrix-coefficient polynomials, the
substitution ``x = (z + 1/z)/2``, reversal, the correspondence between a pair
``(p_m(y), p_{m-1}(y))`` and ``p(w) = w^m (p_m - w p_{m-1})``, Chebyshev ``U``
polynomials with negative indices, and an exact bivariate gcd.

All coefficient arrays are ascending in every variable.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np

from . import numerics as nm
from .errors import (BoundTooSmall, DegreeViolation, InterpolationInconsistent,
                     ModeMixError, ZeroInput)


def _is_exact_scalar(s):
    return isinstance(s, (int, Fraction, np.integer)) and not isinstance(s, bool)


def _lift(s, exact):
    """Convert a scalar to the mode of a container."""
    if exact:
        if not _is_exact_scalar(s):
            raise ModeMixError(f"float scalar {s!r} used with an exact polynomial")
        return Fraction(s)
    return float(s)


def _conv(a, b, exact):
    out = nm.zeros(len(a) + len(b) - 1, exact)
    for i, ai in enumerate(a):
        if ai != 0:
            out[i:i + len(b)] = out[i:i + len(b)] + ai * b
    return out


def _conv2(a, b, exact):
    out = nm.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1), exact)
    for (i, j), v in np.ndenumerate(a):
        if v != 0:
            out[i:i + b.shape[0], j:j + b.shape[1]] = out[i:i + b.shape[0], j:j + b.shape[1]] + v * b
    return out


def _use_float_eval(x):
    return isinstance(x, (float, complex, np.floating, np.complexfloating, np.ndarray))


# ---------------------------------------------------------------------------

class RealPoly:
    """Dense univariate polynomial with ascending coefficients."""

    __slots__ = ("c", "var")

    def __init__(self, coeffs, exact=None, var="x"):
        if isinstance(coeffs, RealPoly):
            coeffs = coeffs.c
        c = nm.coerce(np.atleast_1d(np.asarray(coeffs, dtype=object)
                                    if not isinstance(coeffs, np.ndarray) else coeffs), exact)
        if c.ndim != 1:
            raise ValueError("one-dimensional coefficient array expected")
        if len(c) == 0:
            c = nm.zeros(1, nm.is_exact(c) if exact is None else exact)
        self.c = nm.trim(c)
        self.var = var

    # construction helpers
    @classmethod
    def const(cls, v, exact=True, var="x"):
        return cls([_lift(v, exact)], exact, var)

    @classmethod
    def monomial(cls, k, exact=True, var="x"):
        c = nm.zeros(k + 1, exact)
        c[k] = Fraction(1) if exact else 1.0
        return cls(c, exact, var)

    @classmethod
    def from_roots(cls, roots, lead=1, var="x"):
        exact = all(_is_exact_scalar(r) for r in roots) and _is_exact_scalar(lead)
        p = cls.const(lead, exact, var)
        for r in roots:
            p = p * cls([-_lift(r, exact), _lift(1, exact)], exact, var)
        return p

    @property
    def exact(self):
        return nm.is_exact(self.c)

    @property
    def deg(self):
        return len(self.c) - 1

    @property
    def lead(self):
        return self.c[-1]

    def is_zero(self):
        return len(self.c) == 1 and self.c[0] == 0

    def coef(self, k):
        return self.c[k] if 0 <= k < len(self.c) else (Fraction(0) if self.exact else 0.0)

    def to_float(self):
        return RealPoly(nm.to_float(self.c), False, self.var)

    def astype(self, exact):
        return self if exact == self.exact else self.to_float()

    def _other(self, o):
        if isinstance(o, RealPoly):
            if o.exact != self.exact:
                raise ModeMixError("exact and float polynomials combined")
            return o
        return RealPoly([_lift(o, self.exact)], self.exact, self.var)

    def __add__(self, o):
        o = self._other(o)
        n = max(len(self.c), len(o.c))
        out = nm.zeros(n, self.exact)
        out[:len(self.c)] = out[:len(self.c)] + self.c
        out[:len(o.c)] = out[:len(o.c)] + o.c
        return RealPoly(out, self.exact, self.var)

    __radd__ = __add__

    def __neg__(self):
        return RealPoly(-self.c, self.exact, self.var)

    def __sub__(self, o):
        return self + (-self._other(o))

    def __rsub__(self, o):
        return self._other(o) - self

    def __mul__(self, o):
        if isinstance(o, RealPoly):
            o = self._other(o)
            return RealPoly(_conv(self.c, o.c, self.exact), self.exact, self.var)
        return RealPoly(self.c * _lift(o, self.exact), self.exact, self.var)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return RealPoly(self.c / _lift(s, self.exact), self.exact, self.var)

    def __pow__(self, k):
        out = RealPoly.const(1, self.exact, self.var)
        for _ in range(k):
            out = out * self
        return out

    def __divmod__(self, o):
        o = self._other(o)
        q, r = nm.polydivmod(self.c, o.c)
        return RealPoly(q, self.exact, self.var), RealPoly(r, self.exact, self.var)

    def __floordiv__(self, o):
        return divmod(self, o)[0]

    def __mod__(self, o):
        return divmod(self, o)[1]

    def exact_div(self, o):
        """Quotient of an exact division; raises ArithmeticError otherwise."""
        q, r = divmod(self, o)
        if not r.is_zero():
            if self.exact or nm.max_abs(r.c) > 1e-9 * max(1.0, nm.max_abs(self.c)):
                raise ArithmeticError("division leaves a remainder")
        return q

    def __eq__(self, o):
        if not isinstance(o, RealPoly):
            try:
                o = self._other(o)
            except (ModeMixError, TypeError, ValueError):
                return NotImplemented
        return len(self.c) == len(o.c) and bool(np.all(self.c == o.c))

    def __hash__(self):
        return hash(tuple(self.c.tolist()))

    def __call__(self, x):
        c = self.c
        if self.exact and _use_float_eval(x):
            c = nm.to_float(c)
        elif self.exact:
            x = Fraction(x)
        return nm.polyval(c, x)

    def deriv(self):
        return RealPoly(nm.polyder(self.c), self.exact, self.var)

    def monic(self):
        return self / self.lead

    def compose_scale(self, s):
        """``p(s·x)``."""
        s = _lift(s, self.exact)
        return RealPoly(self.c * np.array([s ** k for k in range(len(self.c))], dtype=self.c.dtype),
                        self.exact, self.var)

    def roots(self, cfg=nm.DEFAULT):
        return nm.poly_roots(self.c, cfg)

    def norm_inf(self):
        return nm.max_abs(self.c)

    def tolist(self):
        return list(self.c)

    def __repr__(self):
        return f"RealPoly({[str(v) for v in self.c]}, var={self.var!r})"


def poly_gcd(a: RealPoly, b: RealPoly) -> RealPoly:
    """Monic gcd of exact univariate polynomials (Euclid)."""
    if a.is_zero() and b.is_zero():
        raise ZeroInput("gcd of two zero polynomials")
    while not b.is_zero():
        a, b = b, a % b
        if not b.is_zero():
            b = b.monic()
    return a.monic()


def squarefree_yun(f: RealPoly):
    """Yun decomposition: list ``[a_1, a_2, …]`` with ``f = c·∏ a_i^i``."""
    if f.deg < 1:
        return []
    fp = f.deriv()
    a0 = poly_gcd(f, fp)
    b = f.exact_div(a0)
    c = fp.exact_div(a0)
    d = c - b.deriv()
    out = []
    while b.deg >= 1:
        a = poly_gcd(b, d) if not d.is_zero() else b.monic()
        out.append(a)
        b = b.exact_div(a)
        c = d.exact_div(a)
        d = c - b.deriv()
    return out


def resultant(a: RealPoly, b: RealPoly):
    """Sylvester-matrix resultant."""
    m, n = a.deg, b.deg
    if m + n == 0:
        return Fraction(1) if a.exact else 1.0
    S = nm.zeros((m + n, m + n), a.exact)
    ar, br = a.c[::-1], b.c[::-1]
    for i in range(n):
        S[i, i:i + m + 1] = ar
    for i in range(m):
        S[n + i, i:i + n + 1] = br
    return nm.det(S)


# ---------------------------------------------------------------------------

class LaurentPoly:
    """Laurent polynomial ``Σ c_k z^{min_exp + k}``."""

    __slots__ = ("c", "min_exp", "var")

    def __init__(self, coeffs, min_exp=0, exact=None, var="z"):
        c = nm.coerce(np.atleast_1d(np.asarray(coeffs, dtype=object)
                                    if not isinstance(coeffs, np.ndarray) else coeffs), exact)
        nz = [i for i, v in enumerate(c) if v != 0]
        if not nz:
            c, min_exp = c[:1] * 0 if len(c) else nm.zeros(1, exact is not False), 0
        else:
            c, min_exp = c[nz[0]:nz[-1] + 1], min_exp + nz[0]
        self.c = c
        self.min_exp = int(min_exp)
        self.var = var

    @property
    def exact(self):
        return nm.is_exact(self.c)

    @property
    def max_exp(self):
        return self.min_exp + len(self.c) - 1

    def is_zero(self):
        return len(self.c) == 1 and self.c[0] == 0

    def coef(self, k):
        i = k - self.min_exp
        return self.c[i] if 0 <= i < len(self.c) else (Fraction(0) if self.exact else 0.0)

    def _other(self, o):
        if isinstance(o, LaurentPoly):
            if o.exact != self.exact:
                raise ModeMixError("exact and float polynomials combined")
            return o
        if isinstance(o, RealPoly):
            return LaurentPoly(o.c, 0, o.exact, self.var)
        return LaurentPoly([_lift(o, self.exact)], 0, self.exact, self.var)

    def __add__(self, o):
        o = self._other(o)
        lo = min(self.min_exp, o.min_exp)
        hi = max(self.max_exp, o.max_exp)
        out = nm.zeros(hi - lo + 1, self.exact)
        for src in (self, o):
            s = src.min_exp - lo
            out[s:s + len(src.c)] = out[s:s + len(src.c)] + src.c
        return LaurentPoly(out, lo, self.exact, self.var)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(-self.c, self.min_exp, self.exact, self.var)

    def __sub__(self, o):
        return self + (-self._other(o))

    def __rsub__(self, o):
        return self._other(o) - self

    def __mul__(self, o):
        if isinstance(o, (LaurentPoly, RealPoly)):
            o = self._other(o)
            return LaurentPoly(_conv(self.c, o.c, self.exact), self.min_exp + o.min_exp,
                               self.exact, self.var)
        return LaurentPoly(self.c * _lift(o, self.exact), self.min_exp, self.exact, self.var)

    __rmul__ = __mul__

    def __eq__(self, o):
        if not isinstance(o, (LaurentPoly, RealPoly)):
            return NotImplemented
        o = self._other(o)
        return (self.min_exp == o.min_exp and len(self.c) == len(o.c)
                and bool(np.all(self.c == o.c)))

    def __hash__(self):
        return hash((self.min_exp, tuple(self.c.tolist())))

    def shift(self, k):
        """Multiply by ``z^k``."""
        return LaurentPoly(self.c, self.min_exp + k, self.exact, self.var)

    def invert(self):
        """``f(1/z)``."""
        return LaurentPoly(self.c[::-1], -self.max_exp, self.exact, self.var)

    def is_symmetric(self, tol=0.0):
        if self.min_exp != -self.max_exp:
            return self.is_zero()
        d = self.c - self.c[::-1]
        return bool(np.all(d == 0)) if self.exact else nm.max_abs(d) <= tol * max(1.0, nm.max_abs(self.c))

    def to_poly(self, var=None):
        if self.min_exp < 0:
            raise ValueError("negative powers present")
        c = np.concatenate([nm.zeros(self.min_exp, self.exact), self.c])
        return RealPoly(c, self.exact, var or self.var)

    def __call__(self, z):
        c = nm.to_float(self.c) if self.exact and _use_float_eval(z) else self.c
        if self.exact and not _use_float_eval(z):
            z = Fraction(z)
        return nm.polyval(c, z) * z ** self.min_exp

    def __repr__(self):
        return f"LaurentPoly({[str(v) for v in self.c]}, min_exp={self.min_exp})"


# ---------------------------------------------------------------------------

class BivarPoly:
    """Dense bivariate polynomial; ``grid[i, j]`` multiplies ``v1^(i+o1) v2^(j+o2)``.

    The offsets ``(o1, o2)`` allow Laurent polynomials; they are zero for
    ordinary polynomials.
    """

    __slots__ = ("grid", "var_pair", "offset")

    def __init__(self, grid, var_pair=("x", "w"), offset=(0, 0), exact=None):
        if isinstance(var_pair, str):
            var_pair = tuple(var_pair)
        g = np.asarray(grid, dtype=object) if not isinstance(grid, np.ndarray) else grid
        if g.ndim == 1:
            g = g.reshape(-1, 1)
        g = nm.coerce(g, exact)
        if g.size == 0:
            g = nm.zeros((1, 1), exact is not False)
        o1, o2 = offset
        rows = [i for i in range(g.shape[0]) if any(v != 0 for v in g[i])]
        cols = [j for j in range(g.shape[1]) if any(v != 0 for v in g[:, j])]
        if not rows:
            g, o1, o2 = g[:1, :1] * 0, 0, 0
        else:
            r0, c0 = rows[0], cols[0]
            g = g[r0:rows[-1] + 1, c0:cols[-1] + 1]
            o1 += r0
            o2 += c0
        self.grid = g
        self.var_pair = tuple(var_pair)
        self.offset = (int(o1), int(o2))

    # --- constructors
    @classmethod
    def const(cls, v, var_pair=("x", "w"), exact=True):
        return cls([[_lift(v, exact)]], var_pair, exact=exact)

    @classmethod
    def from_first(cls, p: RealPoly, var_pair=("x", "w")):
        return cls(p.c.reshape(-1, 1), var_pair, exact=p.exact)

    @classmethod
    def from_second(cls, p: RealPoly, var_pair=("x", "w")):
        return cls(p.c.reshape(1, -1), var_pair, exact=p.exact)

    @classmethod
    def from_dict(cls, terms: dict, var_pair=("x", "w"), exact=None):
        """Build from ``{(i, j): coeff}`` with nonnegative exponents."""
        di = max(i for i, _ in terms) + 1
        dj = max(j for _, j in terms) + 1
        g = np.empty((di, dj), dtype=object)
        g[...] = 0
        for (i, j), v in terms.items():
            g[i, j] = v
        return cls(g, var_pair, exact=exact)

    @property
    def exact(self):
        return nm.is_exact(self.grid)

    @property
    def degs(self):
        return self.grid.shape[0] - 1 + self.offset[0], self.grid.shape[1] - 1 + self.offset[1]

    def is_zero(self):
        return self.grid.shape == (1, 1) and self.grid[0, 0] == 0

    def coef(self, i, j):
        a, b = i - self.offset[0], j - self.offset[1]
        if 0 <= a < self.grid.shape[0] and 0 <= b < self.grid.shape[1]:
            return self.grid[a, b]
        return Fraction(0) if self.exact else 0.0

    def to_float(self):
        return BivarPoly(nm.to_float(self.grid), self.var_pair, self.offset, False)

    def astype(self, exact):
        return self if exact == self.exact else self.to_float()

    def renamed(self, var_pair):
        return BivarPoly(self.grid, var_pair, self.offset, self.exact)

    def _other(self, o):
        if isinstance(o, BivarPoly):
            if o.exact != self.exact:
                raise ModeMixError("exact and float polynomials combined")
            return o
        return BivarPoly([[_lift(o, self.exact)]], self.var_pair, exact=self.exact)

    def padded(self, lo, hi):
        """Grid covering exponents ``lo..hi`` (pairs) in both variables."""
        out = nm.zeros((hi[0] - lo[0] + 1, hi[1] - lo[1] + 1), self.exact)
        a, b = self.offset[0] - lo[0], self.offset[1] - lo[1]
        if a < 0 or b < 0 or a + self.grid.shape[0] > out.shape[0] or b + self.grid.shape[1] > out.shape[1]:
            raise ValueError("range does not cover polynomial")
        out[a:a + self.grid.shape[0], b:b + self.grid.shape[1]] = self.grid
        return out

    def __add__(self, o):
        o = self._other(o)
        lo = (min(self.offset[0], o.offset[0]), min(self.offset[1], o.offset[1]))
        hi = (max(self.degs[0], o.degs[0]), max(self.degs[1], o.degs[1]))
        return BivarPoly(self.padded(lo, hi) + o.padded(lo, hi), self.var_pair, lo, self.exact)

    __radd__ = __add__

    def __neg__(self):
        return BivarPoly(-self.grid, self.var_pair, self.offset, self.exact)

    def __sub__(self, o):
        return self + (-self._other(o))

    def __rsub__(self, o):
        return self._other(o) - self

    def __mul__(self, o):
        if isinstance(o, BivarPoly):
            o = self._other(o)
            return BivarPoly(_conv2(self.grid, o.grid, self.exact), self.var_pair,
                             (self.offset[0] + o.offset[0], self.offset[1] + o.offset[1]), self.exact)
        return BivarPoly(self.grid * _lift(o, self.exact), self.var_pair, self.offset, self.exact)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return BivarPoly(self.grid / _lift(s, self.exact), self.var_pair, self.offset, self.exact)

    def __pow__(self, k):
        out = BivarPoly.const(1, self.var_pair, self.exact)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, o):
        if not isinstance(o, BivarPoly):
            return NotImplemented
        if o.exact != self.exact:
            return False
        return (self.offset == o.offset and self.grid.shape == o.grid.shape
                and bool(np.all(self.grid == o.grid)))

    def __hash__(self):
        return hash((self.offset, tuple(self.grid.ravel().tolist())))

    def shift(self, k1, k2):
        return BivarPoly(self.grid, self.var_pair, (self.offset[0] + k1, self.offset[1] + k2), self.exact)

    def mul_first(self, p: RealPoly):
        return self * BivarPoly.from_first(p.astype(self.exact), self.var_pair)

    def mul_second(self, p: RealPoly):
        return self * BivarPoly.from_second(p.astype(self.exact), self.var_pair)

    def invert_first(self):
        """``f(1/v1, v2)``."""
        return BivarPoly(self.grid[::-1], self.var_pair, (-self.degs[0], self.offset[1]), self.exact)

    def invert_second(self):
        return BivarPoly(self.grid[:, ::-1], self.var_pair, (self.offset[0], -self.degs[1]), self.exact)

    def transpose(self):
        return BivarPoly(self.grid.T.copy(), self.var_pair[::-1], self.offset[::-1], self.exact)

    def is_poly(self):
        return self.offset[0] >= 0 and self.offset[1] >= 0

    def dense(self):
        """Grid with zero offsets (requires an ordinary polynomial)."""
        if not self.is_poly():
            raise ValueError("negative powers present")
        return self.padded((0, 0), (max(self.degs[0], 0), max(self.degs[1], 0)))

    def __call__(self, a, b):
        g = self.grid
        if self.exact and (_use_float_eval(a) or _use_float_eval(b)):
            g = nm.to_float(g)
        elif self.exact:
            a, b = Fraction(a), Fraction(b)
        col = [nm.polyval(g[:, j], a) for j in range(g.shape[1])]
        val = col[-1] * (b ** 0)
        for v in col[-2::-1]:
            val = val * b + v
        return val * a ** self.offset[0] * b ** self.offset[1]

    def eval_first(self, a):
        """Polynomial in the second variable (requires offset[1] >= 0)."""
        g = self.dense() if self.is_poly() else None
        if g is None:
            raise ValueError("negative powers present")
        if self.exact and _use_float_eval(a):
            g = nm.to_float(g)
            return RealPoly(np.array([nm.polyval(g[:, j], a) for j in range(g.shape[1])]), False,
                            self.var_pair[1])
        vals = np.array([nm.polyval(g[:, j], a if not self.exact else Fraction(a))
                         for j in range(g.shape[1])], dtype=g.dtype)
        return RealPoly(vals, self.exact, self.var_pair[1])

    def eval_second(self, b):
        return self.transpose().eval_first(b)

    def row(self, i):
        """Coefficient of ``v1^i`` as a polynomial in v2 (ordinary grids)."""
        g = self.dense()
        if i >= g.shape[0]:
            return RealPoly.const(0, self.exact, self.var_pair[1])
        return RealPoly(g[i], self.exact, self.var_pair[1])

    def col(self, j):
        return self.transpose().row(j)

    @classmethod
    def from_rows(cls, rows, var_pair=("x", "w"), exact=None):
        """Inverse of :meth:`row`: ``Σ_i v1^i rows[i](v2)``."""
        exact = rows[0].exact if exact is None else exact
        width = max(len(r.c) for r in rows)
        g = nm.zeros((len(rows), width), exact)
        for i, r in enumerate(rows):
            g[i, :len(r.c)] = r.astype(exact).c
        return cls(g, var_pair, exact=exact)

    def norm_inf(self):
        return nm.max_abs(self.grid)

    def __repr__(self):
        return f"BivarPoly({self.var_pair}, offset={self.offset}, grid={self.grid.tolist()})"


def bivar_exact_div(a: BivarPoly, g: BivarPoly):
    """``a / g`` for ordinary polynomials; None if g does not divide a."""
    a = BivarPoly(a.dense(), a.var_pair, exact=a.exact)
    lead_g = g.row(g.degs[0])
    dg = g.degs[0]
    qrows = {}
    r = a
    while not r.is_zero():
        dr = r.degs[0]
        if dr < dg:
            return None
        qt, rem = divmod(r.row(dr), lead_g)
        if not rem.is_zero():
            return None
        qrows[dr - dg] = qt
        term = BivarPoly.from_second(qt, a.var_pair).shift(dr - dg, 0) * g
        r = r - term
        r = BivarPoly(r.dense(), a.var_pair, exact=a.exact) if not r.is_zero() else r
    if not qrows:
        return BivarPoly.const(0, a.var_pair, a.exact)
    rows = [qrows.get(i, RealPoly.const(0, a.exact, a.var_pair[1])) for i in range(max(qrows) + 1)]
    return BivarPoly.from_rows(rows, a.var_pair, a.exact)


# ---------------------------------------------------------------------------
# Chebyshev machinery

def _cheb_row(c, exact):
    """``Σ c_k ((z+1/z)/2)^k`` as (array, min_exp)."""
    n = len(c) - 1
    out = nm.zeros(2 * n + 1, exact)
    half = Fraction(1, 2) if exact else 0.5
    for k, ck in enumerate(c):
        if ck == 0:
            continue
        s = ck * half ** k
        for i in range(k + 1):
            out[n - k + 2 * i] = out[n - k + 2 * i] + s * comb(k, i)
    return out, -n


def cheb_substitute(p, axis=0, var="z"):
    """Expand ``x = (z + 1/z)/2`` exactly.

    A :class:`RealPoly` yields a :class:`LaurentPoly`; a :class:`BivarPoly`
    has the variable at ``axis`` replaced and carries a negative offset.
    """
    if isinstance(p, RealPoly):
        c, lo = _cheb_row(p.c, p.exact)
        return LaurentPoly(c, lo, p.exact, var)
    if axis == 1:
        return cheb_substitute(p.transpose(), 0, var).transpose()
    g = p.dense()
    n = g.shape[0] - 1
    out = nm.zeros((2 * n + 1, g.shape[1]), p.exact)
    for j in range(g.shape[1]):
        out[:, j], _ = _cheb_row(g[:, j], p.exact)
    return BivarPoly(out, (var, p.var_pair[1]), (-n, p.offset[1]), p.exact)


def laurent_to_x(f, axis=0, var="x", tol=1e-9):
    """Inverse of :func:`cheb_substitute` on symmetric Laurent polynomials."""
    if isinstance(f, BivarPoly):
        if axis == 1:
            return laurent_to_x(f.transpose(), 0, var, tol).transpose()
        cols = []
        for j in range(f.offset[1], f.degs[1] + 1):
            arr = np.array([f.coef(i, j) for i in range(f.offset[0], f.degs[0] + 1)], dtype=f.grid.dtype)
            cols.append(laurent_to_x(LaurentPoly(arr, f.offset[0], f.exact), 0, var, tol))
        width = max(len(c.c) for c in cols)
        g = nm.zeros((width, len(cols)), f.exact)
        for j, c in enumerate(cols):
            g[:len(c.c), j] = c.c
        return BivarPoly(g, (var, f.var_pair[1]), (0, f.offset[1]), f.exact)
    exact = f.exact
    n = max(f.max_exp, -f.min_exp, 0)
    rest = f
    out = nm.zeros(n + 1, exact)
    for k in range(n, -1, -1):
        a = rest.coef(k)
        if a == 0:
            continue
        ck = a * (2 ** k) if exact else a * 2.0 ** k
        out[k] = ck
        basis = RealPoly.monomial(k, exact)
        rest = rest - cheb_substitute(basis) * ck
    if not rest.is_zero():
        if exact or nm.max_abs(rest.c) > tol * max(1.0, nm.max_abs(f.c)):
            raise ArithmeticError("Laurent polynomial is not symmetric under z -> 1/z")
    return RealPoly(out, exact, var)


def chebU(k, exact=True, var="x"):
    """Chebyshev polynomial of the second kind, ``U_{-1} = 0``, ``U_k = -U_{-k-2}``."""
    if k == -1:
        return RealPoly.const(0, exact, var)
    if k < -1:
        return -chebU(-k - 2, exact, var)
    two_x = RealPoly([0, 2], exact, var) if exact else RealPoly([0.0, 2.0], False, var)
    u_prev, u = RealPoly.const(0, exact, var), RealPoly.const(1, exact, var)
    for _ in range(k):
        u_prev, u = u, two_x * u - u_prev
    return u


class _UCache:
    def __init__(self, exact):
        self.exact = exact
        self.store = {}

    def __call__(self, k):
        if k not in self.store:
            self.store[k] = chebU(k, self.exact)
        return self.store[k]


def szego_1d(coeffs, min_exp, N, exact=None, var="x"):
    """``(z^{N+1} f(1/z) - z^{-N-1} f(z)) / (z - 1/z)`` for ``f = Σ c_k z^{min_exp+k}``.

    Uses ``z^j ↦ U_{N-j}(x)``; exact by construction.
    """
    c = nm.coerce(coeffs, exact) if not isinstance(coeffs, np.ndarray) else coeffs
    ex = nm.is_exact(c)
    out = RealPoly.const(0, ex, var)
    for k, a in enumerate(c):
        if a != 0:
            out = out + chebU(N - (min_exp + k), ex, var) * a
    return out


def reverse(q: RealPoly, n: int) -> RealPoly:
    """``w^n q(1/w)``."""
    if n < q.deg:
        raise BoundTooSmall(f"bound {n} below degree {q.deg}")
    c = np.concatenate([q.c, nm.zeros(n - q.deg, q.exact)])[::-1]
    return RealPoly(c.copy(), q.exact, q.var)


def pair_to_w(pm, pm1, m):
    """``w^m (p_m(y) - w p_{m-1}(y))`` with ``y = (w + 1/w)/2``.

    Accepts univariate pairs (polynomials in y) or bivariate pairs in (x, y).
    """
    if isinstance(pm, RealPoly):
        if pm.deg > m or (pm1.deg > m - 1 and not pm1.is_zero()):
            raise DegreeViolation("pair exceeds degree bounds")
        L = cheb_substitute(pm, var="w").shift(m) - cheb_substitute(pm1, var="w").shift(m + 1)
        if L.min_exp < 0 and not L.is_zero():
            raise DegreeViolation("negative powers of w remain")
        return L.to_poly("w") if not L.is_zero() else RealPoly.const(0, pm.exact, "w")
    exact = pm.exact
    if pm.degs[1] > m or (pm1.degs[1] > m - 1 and not pm1.is_zero()):
        raise DegreeViolation("pair exceeds degree bounds in y")
    nx = max(pm.degs[0], pm1.degs[0])
    rows = []
    for i in range(nx + 1):
        a = pm.row(i) if i <= pm.degs[0] else RealPoly.const(0, exact)
        b = pm1.row(i) if i <= pm1.degs[0] else RealPoly.const(0, exact)
        rows.append(pair_to_w(RealPoly(a.c, exact, "y"), RealPoly(b.c, exact, "y"), m))
    return BivarPoly.from_rows(rows, (pm.var_pair[0], "w"), exact)


def w_to_pair(p, m):
    """Inverse of :func:`pair_to_w`: returns ``(p_m, p_{m-1})``.

    ``p_j(y) = (w^{j+1} p(1/w) - w^{-j-1} p(w)) / (w - 1/w)``.
    """
    if isinstance(p, RealPoly):
        if p.deg > 2 * m:
            raise DegreeViolation("degree in w exceeds 2m")
        return (szego_1d(p.c, 0, m, var="y"), szego_1d(p.c, 0, m - 1, var="y"))
    if p.degs[1] > 2 * m:
        raise DegreeViolation("degree in w exceeds 2m")
    rows_m, rows_m1 = [], []
    for i in range(p.degs[0] + 1):
        r = p.row(i)
        rows_m.append(szego_1d(r.c, 0, m, var="y"))
        rows_m1.append(szego_1d(r.c, 0, m - 1, var="y"))
    vp = (p.var_pair[0], "y")
    return BivarPoly.from_rows(rows_m, vp, p.exact), BivarPoly.from_rows(rows_m1, vp, p.exact)


# ---------------------------------------------------------------------------
# exact bivariate gcd

def _content_w(a: BivarPoly):
    """gcd over ℚ[w] of the z-coefficients (rows) of ``a``."""
    g = None
    for i in range(a.degs[0] + 1):
        r = a.row(i)
        if r.is_zero():
            continue
        g = r.monic() if g is None else poly_gcd(g, r)
    return g


def _newton_interp(xs, ys):
    """Exact interpolating polynomial through (xs, ys)."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    p = RealPoly.const(coef[-1], True, "w")
    for i in range(n - 2, -1, -1):
        p = p * RealPoly([-xs[i], 1], True, "w") + coef[i]
    return p


def _normalize_gcd(g: BivarPoly):
    v = g.coef(0, 0)
    if v != 0:
        return g / v
    # make integer-primitive with positive leading coefficient
    from math import gcd, lcm
    vals = [Fraction(x) for x in g.grid.ravel() if x != 0]
    den = 1
    for v in vals:
        den = lcm(den, v.denominator)
    num = 0
    for v in vals:
        num = gcd(num, int(v * den))
    g = g * Fraction(den, num)
    lead = g.row(g.degs[0]).lead
    return -g if lead < 0 else g


def bivar_gcd(a: BivarPoly, b: BivarPoly, max_points=200) -> BivarPoly:
    """gcd in ℚ[z, w], normalized to equal 1 at the origin when nonzero there.

    Both inputs are treated as polynomials in the first variable with
    coefficients in ℚ[w]; the primitive parts are evaluated at w = 1, 2, 3, …,
    univariate gcds are taken and each z-coefficient is interpolated in w.
    """
    if not (a.exact and b.exact):
        raise ModeMixError("bivariate gcd requires exact coefficients")
    if a.is_zero() and b.is_zero():
        raise ZeroInput("gcd of two zero polynomials")
    vp = a.var_pair
    if a.is_zero():
        return _normalize_gcd(b)
    if b.is_zero():
        return _normalize_gcd(a)
    a = BivarPoly(a.dense(), vp, exact=True)
    b = BivarPoly(b.dense(), vp, exact=True).renamed(vp)
    ca, cb = _content_w(a), _content_w(b)
    app = bivar_exact_div(a, BivarPoly.from_second(ca, vp))
    bpp = bivar_exact_div(b, BivarPoly.from_second(cb, vp))
    cont = poly_gcd(ca, cb)
    if app.degs[0] == 0 or bpp.degs[0] == 0:
        return _normalize_gcd(BivarPoly.from_second(cont, vp))
    la, lb = app.row(app.degs[0]), bpp.row(bpp.degs[0])
    gamma = poly_gcd(la, lb)
    bound = gamma.deg + min(app.degs[1], bpp.degs[1]) + 1
    pts, vals = [], []
    best = None
    w0 = 0
    while w0 < max_points:
        w0 += 1
        if la(w0) == 0 or lb(w0) == 0:
            continue
        g0 = poly_gcd(app.eval_second(w0), bpp.eval_second(w0))
        if best is None or g0.deg < best:
            best, pts, vals = g0.deg, [], []
        if g0.deg > best:
            continue
        if best == 0:
            return _normalize_gcd(BivarPoly.from_second(cont, vp))
        pts.append(Fraction(w0))
        vals.append(g0 * gamma(w0))
        if len(pts) >= bound:
            rows = []
            for i in range(best + 1):
                rows.append(_newton_interp(pts, [v.coef(i) for v in vals]))
            G = BivarPoly.from_rows(rows, vp, True)
            cG = _content_w(G)
            G = bivar_exact_div(G, BivarPoly.from_second(cG, vp))
            if bivar_exact_div(app, G) is not None and bivar_exact_div(bpp, G) is not None:
                return _normalize_gcd(G * BivarPoly.from_second(cont, vp))
            bound += 1
    raise InterpolationInconsistent("evaluations do not interpolate to a common divisor")


# ---------------------------------------------------------------------------

class MatrixPoly:
    """Polynomial with square matrix coefficients, ``coeffs[k]`` multiplies ``z^k``."""

    __slots__ = ("coeffs", "var")
    # let ``ndarray @ MatrixPoly`` reach __rmatmul__
    __array_ufunc__ = None

    def __init__(self, coeffs, exact=None, var="z"):
        arr = coeffs if isinstance(coeffs, np.ndarray) else np.array(coeffs, dtype=object)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ValueError("coefficients must be square matrices of a common size")
        arr = nm.coerce(arr, exact)
        n = arr.shape[0]
        while n > 1 and all(v == 0 for v in arr[n - 1].ravel()):
            n -= 1
        self.coeffs = arr[:max(n, 1)]
        self.var = var

    @classmethod
    def from_entries(cls, entries, var="z"):
        """From an l×l nested list of :class:`RealPoly`."""
        l = len(entries)
        exact = entries[0][0].exact
        d = max(e.deg for row in entries for e in row)
        arr = nm.zeros((d + 1, l, l), exact)
        for i in range(l):
            for j in range(l):
                c = entries[i][j].astype(exact).c
                arr[:len(c), i, j] = c
        return cls(arr, exact, var)

    @classmethod
    def constant(cls, M, var="z"):
        M = np.asarray(M)
        return cls(M[None], None, var)

    @property
    def exact(self):
        return nm.is_exact(self.coeffs)

    @property
    def size(self):
        return self.coeffs.shape[1]

    @property
    def deg(self):
        return self.coeffs.shape[0] - 1

    def coef(self, k):
        if 0 <= k <= self.deg:
            return self.coeffs[k]
        return nm.zeros((self.size, self.size), self.exact)

    def entry(self, i, j):
        return RealPoly(self.coeffs[:, i, j].copy(), self.exact, self.var)

    def to_float(self):
        return MatrixPoly(nm.to_float(self.coeffs), False, self.var)

    def astype(self, exact):
        return self if exact == self.exact else self.to_float()

    def __call__(self, z):
        c = self.coeffs
        if self.exact and _use_float_eval(z):
            c = nm.to_float(c)
        elif self.exact:
            z = Fraction(z)
        out = c[-1] * (z ** 0)
        for k in range(len(c) - 2, -1, -1):
            out = out * z + c[k]
        return out

    def _other(self, o):
        if o.exact != self.exact:
            raise ModeMixError("exact and float polynomials combined")
        return o

    def __add__(self, o):
        o = self._other(o)
        n = max(self.deg, o.deg) + 1
        out = nm.zeros((n, self.size, self.size), self.exact)
        out[:self.deg + 1] = out[:self.deg + 1] + self.coeffs
        out[:o.deg + 1] = out[:o.deg + 1] + o.coeffs
        return MatrixPoly(out, self.exact, self.var)

    def __neg__(self):
        return MatrixPoly(-self.coeffs, self.exact, self.var)

    def __sub__(self, o):
        return self + (-o)

    def __matmul__(self, o):
        if isinstance(o, MatrixPoly):
            o = self._other(o)
            out = nm.zeros((self.deg + o.deg + 1, self.size, self.size), self.exact)
            for i in range(self.deg + 1):
                for j in range(o.deg + 1):
                    out[i + j] = out[i + j] + self.coeffs[i].dot(o.coeffs[j])
            return MatrixPoly(out, self.exact, self.var)
        M = np.asarray(o)
        return MatrixPoly(np.array([c.dot(M) for c in self.coeffs]), self.exact, self.var)

    def __rmatmul__(self, M):
        M = np.asarray(M)
        return MatrixPoly(np.array([M.dot(c) for c in self.coeffs]), self.exact, self.var)

    def scale(self, s):
        return MatrixPoly(self.coeffs * _lift(s, self.exact), self.exact, self.var)

    def shift(self, k):
        """Multiply by ``z^k`` (k ≥ 0)."""
        pad = nm.zeros((k, self.size, self.size), self.exact)
        return MatrixPoly(np.concatenate([pad, self.coeffs]), self.exact, self.var)

    def transpose(self):
        return MatrixPoly(np.transpose(self.coeffs, (0, 2, 1)).copy(), self.exact, self.var)

    def reflect(self, n=None):
        """``z^n F(1/z)`` with ``n ≥ deg``."""
        n = self.deg if n is None else n
        if n < self.deg:
            raise BoundTooSmall("bound below degree")
        pad = nm.zeros((n - self.deg, self.size, self.size), self.exact)
        return MatrixPoly(np.concatenate([self.coeffs, pad])[::-1].copy(), self.exact, self.var)

    def deriv(self):
        if self.deg == 0:
            return MatrixPoly(self.coeffs * 0, self.exact, self.var)
        return MatrixPoly(np.array([k * self.coeffs[k] for k in range(1, self.deg + 1)]),
                          self.exact, self.var)

    def det_poly(self) -> RealPoly:
        """Determinant as a polynomial (cofactor expansion; sizes are small)."""
        ent = [[self.entry(i, j) for j in range(self.size)] for i in range(self.size)]
        return _det_entries(ent)

    def norm_inf(self):
        return nm.max_abs(self.coeffs)

    def __repr__(self):
        return f"MatrixPoly(deg={self.deg}, size={self.size}, exact={self.exact})"


def _det_entries(ent):
    n = len(ent)
    if n == 1:
        return ent[0][0]
    out = None
    for j in range(n):
        if ent[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in ent[1:]]
        term = ent[0][j] * _det_entries(minor)
        term = term if j % 2 == 0 else -term
        out = term if out is None else out + term
    return out if out is not None else ent[0][0] * 0
