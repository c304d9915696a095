"""Numeric substrate: arithmetic modes, dense linear algebra, roots, quadrature.

Two arithmetic modes coexist.  Exact values are :class:`fractions.Fraction`
stored in numpy ``object`` arrays; float values are ``float64`` arrays.  A
container never mixes the two, see :func:`coerce`.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Rational

import numpy as np
import scipy.linalg

from .errors import (AmbiguousRank, DegreeZero, ModeMixError, NoConvergence,
                     NotPositiveDefinite)


@dataclass(frozen=True)
class ToleranceConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    root_pair_tol: float = 1e-8
    quad_doubling_limit: int = 20

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "root_pair_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.quad_doubling_limit < 1:
            raise ValueError("quad_doubling_limit must be positive")
        if self.rel_tol < 100 * np.finfo(float).eps:
            raise ValueError("rel_tol below 100 machine epsilons")


DEFAULT = ToleranceConfig()

# singular-value ratio that separates numerical rank from noise
RANK_GAP = 1e3


# ---------------------------------------------------------------------------
# modes

def _is_rational_scalar(v):
    return isinstance(v, (Integral, Rational)) and not isinstance(v, bool)


def parse_scalar(v):
    """Parse ``"num/den"`` strings, ints, Fractions or floats."""
    if isinstance(v, str):
        s = v.strip()
        if any(c in s for c in ".eE") and "/" not in s:
            return float(s)
        return Fraction(s)
    if isinstance(v, bool):
        raise TypeError("boolean is not a scalar")
    if isinstance(v, (np.integer,)):
        return Fraction(int(v))
    if _is_rational_scalar(v):
        return Fraction(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return complex(v)
    raise TypeError(f"unsupported scalar {v!r}")


def coerce(values, exact=None):
    """Return an exact (object/Fraction) or float64 array.

    With ``exact=None`` the mode is inferred: all-rational input gives an
    exact array, all-float input a float array, and a mixture is rejected.
    ``exact=False`` converts rationals to floats; ``exact=True`` requires
    rational input.
    """
    if isinstance(values, np.ndarray) and values.dtype != object:
        if np.iscomplexobj(values):
            raise ModeMixError("complex container")
        if exact:
            if values.dtype.kind in "iu":
                return _frac_array(values)
            raise ModeMixError("float values given where exact is required")
        if values.dtype.kind in "iu" and exact is None:
            return _frac_array(values)
        return values.astype(float)
    arr = np.array(values, dtype=object)
    flat = [parse_scalar(v) for v in arr.ravel()]
    kinds = {type(v) for v in flat}
    if complex in kinds:
        raise ModeMixError("complex container")
    has_float = float in kinds
    # plain integers are neutral; only non-integral rationals pin the exact mode
    has_frac = any(isinstance(v, Fraction) and v.denominator != 1 for v in flat) or any(
        isinstance(v, (Fraction, str)) for v in arr.ravel())
    if exact is False:
        return np.array([float(v) for v in flat], dtype=float).reshape(arr.shape)
    if has_float and (has_frac or exact):
        raise ModeMixError("exact and float values mixed in one container")
    if has_float:
        return np.array(flat, dtype=float).reshape(arr.shape)
    out = np.empty(len(flat), dtype=object)
    out[:] = flat
    return out.reshape(arr.shape)


def _frac_array(a):
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = Fraction(int(v))
    return out


def is_exact(a):
    return isinstance(a, np.ndarray) and a.dtype == object


def to_float(a):
    if is_exact(a):
        return np.array([float(v) for v in a.ravel()], dtype=float).reshape(a.shape)
    return np.asarray(a, dtype=float)


def zeros(shape, exact):
    if exact:
        out = np.empty(shape, dtype=object)
        out[...] = Fraction(0)
        return out
    return np.zeros(shape)


def eye(n, exact):
    out = zeros((n, n), exact)
    for i in range(n):
        out[i, i] = Fraction(1) if exact else 1.0
    return out


def fraction_sqrt(v):
    """Exact square root of a nonnegative Fraction, or None if irrational."""
    v = Fraction(v)
    if v < 0:
        return None
    n, d = v.numerator, v.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def scalar_sqrt(v):
    """Square root preserving the mode when possible; None if exact fails."""
    if isinstance(v, Fraction):
        return fraction_sqrt(v)
    return math.sqrt(v)


def max_abs(a):
    a = to_float(np.asarray(a)) if not np.iscomplexobj(a) else np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


# ---------------------------------------------------------------------------
# dense linear algebra

def solve(A, B):
    """Solve ``A X = B``; exact Gaussian elimination for object arrays."""
    if not is_exact(A) and not is_exact(B):
        return np.linalg.solve(np.asarray(A), np.asarray(B))
    A = coerce(A, exact=True)
    B = coerce(B, exact=True)
    vec = B.ndim == 1
    Bm = B.reshape(-1, 1) if vec else B
    n = A.shape[0]
    M = np.concatenate([A, Bm], axis=1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r, c] != 0), None)
        if piv is None:
            raise np.linalg.LinAlgError("singular matrix")
        if piv != c:
            M[[c, piv]] = M[[piv, c]]
        inv_p = 1 / M[c, c]
        M[c] = M[c] * inv_p
        for r in range(n):
            if r != c and M[r, c] != 0:
                M[r] = M[r] - M[r, c] * M[c]
    X = M[:, n:]
    return X.ravel() if vec else X


def inv(A):
    if is_exact(A):
        return solve(A, eye(A.shape[0], True))
    return np.linalg.inv(A)


def det(A):
    """Determinant; exact by elimination for object arrays."""
    if not is_exact(A):
        return float(np.linalg.det(A))
    M = A.copy()
    n = M.shape[0]
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r, c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[[c, piv]] = M[[piv, c]]
            out = -out
        out *= M[c, c]
        for r in range(c + 1, n):
            if M[r, c] != 0:
                M[r] = M[r] - (M[r, c] / M[c, c]) * M[c]
    return out


def cholesky(M, cfg=DEFAULT):
    """Lower-triangular ``L`` with positive diagonal and ``L Lᵗ = M``.

    In exact mode the factor stays exact when every pivot is a rational
    square; otherwise the whole factor is returned in floats.
    """
    M = np.asarray(M)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("square matrix expected")
    exact = is_exact(M)
    if exact:
        if any(M[i, j] != M[j, i] for i in range(n) for j in range(i)):
            raise ValueError("matrix not symmetric")
        L = zeros((n, n), True)
        ok = True
        for j in range(n):
            s = M[j, j] - sum(L[j, :j] * L[j, :j]) if j else M[j, j]
            if s <= 0:
                raise NotPositiveDefinite(pivot=j)
            r = fraction_sqrt(s)
            if r is None:
                ok = False
                break
            L[j, j] = r
            for i in range(j + 1, n):
                t = M[i, j] - (sum(L[i, :j] * L[j, :j]) if j else 0)
                L[i, j] = t / r
        if ok:
            return L
        M = to_float(M)
    scale = max(max_abs(M), 1e-300)
    if max_abs(M - M.T) > 10 * cfg.rel_tol * scale:
        raise ValueError("matrix not symmetric")
    L = np.zeros((n, n))
    for j in range(n):
        s = M[j, j] - L[j, :j] @ L[j, :j]
        if not s > 0:
            raise NotPositiveDefinite(pivot=j)
        L[j, j] = math.sqrt(s)
        L[j + 1:, j] = (M[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def nullspace(M, cfg=DEFAULT, expected=None):
    """Orthonormal basis (columns) of the numerical kernel of ``M``.

    The rank is the number of singular values above ``rel_tol·σ_max``; the
    decision must be backed by a gap of at least ``RANK_GAP`` between the
    smallest kept and the largest dropped singular value.  ``expected`` forces
    the kernel dimension but still checks the gap.
    """
    M = np.atleast_2d(to_float(np.asarray(M)) if not np.iscomplexobj(M) else np.asarray(M))
    rows, cols = M.shape
    if rows == 0:
        return np.eye(cols)
    _, s, vh = np.linalg.svd(M)
    full = np.zeros(cols)
    full[:len(s)] = s
    smax = full[0] if cols else 0.0
    if smax == 0.0:
        return np.eye(cols)
    if expected is None:
        rank = int(np.sum(full > cfg.rel_tol * smax))
    else:
        rank = cols - expected
    if 0 < rank < cols:
        kept, dropped = full[rank - 1], full[rank]
        if dropped > 0 and kept / dropped < RANK_GAP:
            raise AmbiguousRank(f"singular values {kept:.3g} / {dropped:.3g} show no clear gap")
    elif rank == cols and expected is None:
        return np.zeros((cols, 0))
    return vh[rank:].conj().T


# ---------------------------------------------------------------------------
# univariate coefficient-array helpers (ascending order)

def trim(c):
    c = np.asarray(c)
    n = len(c)
    while n > 1 and c[n - 1] == 0:
        n -= 1
    return c[:max(n, 1)]


def polyval(c, x):
    """Horner evaluation of ascending coefficients at scalar or array x."""
    out = c[-1] * (x ** 0) if len(c) else 0 * x
    for a in c[-2::-1]:
        out = out * x + a
    return out


def polyder(c):
    if len(c) <= 1:
        return c[:1] * 0
    return np.array([k * c[k] for k in range(1, len(c))], dtype=c.dtype)


def polydivmod(num, den):
    """Long division of ascending coefficient arrays."""
    num = trim(np.asarray(num))
    den = trim(np.asarray(den))
    if len(den) == 1 and den[0] == 0:
        raise ZeroDivisionError("polynomial division by zero")
    dn, dd = len(num) - 1, len(den) - 1
    exact = is_exact(num) or is_exact(den)
    if dn < dd:
        return zeros(1, exact), num.copy()
    r = num.astype(object) if exact else num.astype(float)
    q = zeros(dn - dd + 1, exact)
    lead = den[-1]
    for k in range(dn - dd, -1, -1):
        coef = r[k + dd] / lead
        q[k] = coef
        if coef != 0:
            r[k:k + dd + 1] = r[k:k + dd + 1] - coef * den
        r[k + dd] = 0 * coef
    return q, trim(r[:max(dd, 1)])


def poly_roots(c, cfg=DEFAULT):
    """All complex roots (with multiplicity) of the ascending array ``c``.

    Eigenvalues of the balanced companion matrix followed by one Newton step.
    """
    exact_in = is_exact(np.asarray(c))
    c = to_float(trim(np.asarray(c)))
    if not exact_in and len(c) > 1:
        # leading coefficients at rounding level would create spurious huge roots
        big = np.max(np.abs(c))
        n = len(c)
        while n > 1 and abs(c[n - 1]) <= 64 * np.finfo(float).eps * big:
            n -= 1
        c = c[:n]
    if len(c) < 2:
        raise DegreeZero("polynomial has degree zero")
    nz = 0
    while c[nz] == 0:
        nz += 1
    core = c[nz:] / c[-1]
    d = len(core) - 1
    roots = np.zeros(0, dtype=complex)
    if d > 0:
        comp = np.zeros((d, d))
        comp[1:, :-1] = np.eye(d - 1)
        comp[:, -1] = -core[:-1]
        bal, _ = scipy.linalg.matrix_balance(comp, permute=False)
        roots = np.linalg.eigvals(bal).astype(complex)
        dc = polyder(core)
        pv = polyval(core.astype(complex), roots)
        dv = polyval(dc.astype(complex), roots)
        step = np.where(np.abs(dv) > 0, pv / np.where(dv == 0, 1, dv), 0)
        cand = roots - step
        better = np.abs(polyval(core.astype(complex), cand)) <= np.abs(pv)
        roots = np.where(better, cand, roots)
    return np.concatenate([np.zeros(nz, dtype=complex), roots])


def sturm_count(c, a, b):
    """Number of distinct real roots of an exact polynomial in the open (a, b)."""
    c = trim(coerce(c, exact=True))
    a, b = Fraction(a), Fraction(b)
    if len(c) == 1:
        if c[0] == 0:
            raise ZeroDivisionError("zero polynomial has infinitely many roots")
        return 0
    for e in (a, b):
        while len(c) > 1 and polyval(c, e) == 0:
            c, _ = polydivmod(c, coerce([-e, 1], exact=True))
    if len(c) == 1:
        return 0
    seq = [c, polyder(c)]
    while len(seq[-1]) > 1 or seq[-1][0] != 0:
        _, r = polydivmod(seq[-2], seq[-1])
        if len(r) == 1 and r[0] == 0:
            break
        seq.append(-r)

    def changes(x):
        vals = [polyval(s, x) for s in seq]
        vals = [v for v in vals if v != 0]
        return sum(1 for u, v in zip(vals, vals[1:]) if (u > 0) != (v > 0))

    return changes(a) - changes(b)


def count_roots_in_interval(c, a, b, cfg=DEFAULT):
    """Distinct real roots in (a, b): Sturm when exact, eigenvalues otherwise."""
    if is_exact(np.asarray(c)):
        return sturm_count(c, a, b)
    c = trim(to_float(np.asarray(c)))
    if len(c) < 2:
        return 0
    r = poly_roots(c, cfg)
    scale = max(1.0, float(np.max(np.abs(r)))) if len(r) else 1.0
    real = r[np.abs(r.imag) <= 1e3 * cfg.root_pair_tol * scale].real
    real = real[(real > a) & (real < b)]
    return len(cluster_values(real, cfg.root_pair_tol * 1e3))


def cluster_values(vals, tol):
    """Group nearby complex numbers; return list of (mean, multiplicity)."""
    vals = list(np.asarray(vals, dtype=complex))
    out = []
    used = [False] * len(vals)
    for i, v in enumerate(vals):
        if used[i]:
            continue
        grp = [v]
        used[i] = True
        for j in range(i + 1, len(vals)):
            if not used[j] and abs(vals[j] - v) <= tol * max(1.0, abs(v)):
                grp.append(vals[j])
                used[j] = True
        out.append((complex(np.mean(grp)), len(grp)))
    return out


# ---------------------------------------------------------------------------
# quadrature

@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    order: int


def gauss_chebyshev_u(order):
    """Gauss rule for ``(2/π)∫ f(x)√(1−x²) dx`` (normalized to total mass 1)."""
    k = np.arange(1, order + 1)
    theta = k * np.pi / (order + 1)
    return QuadratureRule(np.cos(theta), 2.0 * np.sin(theta) ** 2 / (order + 1),
                          "gauss-chebyshev-2", order)


def torus_rule(order):
    """Equispaced trapezoid rule on the unit circle (mean value)."""
    theta = 2 * np.pi * np.arange(order) / order
    return QuadratureRule(np.exp(1j * theta), np.full(order, 1.0 / order),
                          "trapezoid-torus", order)


@dataclass(frozen=True)
class QuadResult:
    value: object
    error: float
    order: int


def _threads():
    try:
        return max(1, int(os.environ.get("BSZEGO_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Order-preserving map; width capped by ``BSZEGO_THREADS`` (default 1)."""
    items = list(items)
    width = _threads()
    if width <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=width) as ex:
        return list(ex.map(fn, items))


def integrate_adaptive(f, dim=1, cfg=DEFAULT, start=16, max_nodes=1 << 22):
    """Node-doubling Gauss-Chebyshev quadrature for the normalized U-weight.

    ``dim=1`` computes ``(2/π)∫ f(x)√(1−x²) dx`` with ``f`` vectorized over a
    node array (the last axes of the result may carry vector/matrix values).
    ``dim=2`` computes ``(4/π²)∬ f(x,y)√(1−x²)√(1−y²) dx dy`` on tensor nodes;
    ``f(x, y)`` receives broadcastable meshgrids.  Iterates until successive
    estimates differ by less than ``max(rel_tol·|I|, abs_tol)``.
    """
    order = start
    prev = None
    for _ in range(cfg.quad_doubling_limit + 1):
        rule = gauss_chebyshev_u(order)
        if dim == 1:
            vals = np.asarray(f(rule.nodes))
            est = np.tensordot(rule.weights, vals, axes=(0, 0))
        else:
            if order ** 2 > max_nodes:
                break
            rows = parallel_map(lambda xi: np.asarray(f(xi, rule.nodes)), rule.nodes)
            vals = np.stack(rows)
            est = np.tensordot(rule.weights, np.tensordot(rule.weights, vals, axes=(0, 1)), axes=(0, 0))
        if prev is not None:
            err = max_abs(np.asarray(est) - np.asarray(prev))
            if err <= max(cfg.rel_tol * max_abs(est), cfg.abs_tol):
                return QuadResult(est, err, order)
        prev = est
        if dim == 1 and order > max_nodes:
            break
        order = 2 * order + 1
    achieved = None if prev is None else err
    raise NoConvergence("quadrature did not converge", achieved)
