"""One-dimensional Bernstein-Szegő weights.

The measure is ``(2/π) √(1−y²) / |q(w)|² dy`` on (−1, 1) with ``y = (w+1/w)/2``
and ``q`` nonvanishing on the closed unit disk except for possible simple
zeros at ``w = ±1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import numerics as nm
from .errors import (InteriorUnitRoot, NotPositive, NotPositiveDefinite,
                     NotStable, RegimeViolation, UnpairedRoots)
from .poly import (LaurentPoly, RealPoly, cheb_substitute, pair_to_w, resultant,
                   reverse, szego_1d)


@dataclass(frozen=True)
class StableFactor:
    q: RealPoly
    boundary_zeros: frozenset = frozenset()

    @property
    def m(self):
        return self.q.deg


class OrthoPoly(NamedTuple):
    poly: RealPoly
    norm_sq: object


def _boundary_split(q: RealPoly, cfg):
    """Strip simple factors ``(1 - w)`` and ``(1 + w)``; reject double ones."""
    zeros = set()
    r = q
    tol = cfg.abs_tol * max(1.0, q.norm_inf())
    for e in (1, -1):
        val = r(Fraction(e)) if r.exact else r(float(e))
        if (val == 0) if r.exact else abs(val) <= tol:
            lin = RealPoly([1, -e], True) if r.exact else RealPoly([1.0, -float(e)], False)
            r = r // lin
            zeros.add(e)
            again = r(Fraction(e)) if r.exact else r(float(e))
            if (again == 0) if r.exact else abs(again) <= tol:
                raise NotStable(f"zero of order at least two at w = {e}")
    return r, frozenset(zeros)


def check_stable(q, cfg=nm.DEFAULT) -> StableFactor:
    """Validate ``q(0) > 0`` and the location of the zeros of ``q``."""
    if isinstance(q, StableFactor):
        q = q.q
    if not q.coef(0) > 0:
        raise NotStable("q(0) must be positive")
    r, zeros = _boundary_split(q, cfg)
    if r.deg >= 1:
        rts = r.roots(cfg)
        if np.any(np.abs(rts) <= 1.0 + 1e-12):
            raise NotStable("zero inside the closed unit disk")
    return StableFactor(q, zeros)


def _boundary_symbol(zeros, exact):
    """Laurent factor ``(w - 1/w)^2 / Π |1 ∓ w|^2`` for the stripped boundary zeros."""
    one = Fraction(1) if exact else 1.0
    if not zeros:
        c = [one, 0 * one, -2 * one, 0 * one, one]
        return LaurentPoly(c, -2, exact, "w")
    if zeros == {1}:
        return LaurentPoly([-one, -2 * one, -one], -1, exact, "w")
    if zeros == {-1}:
        return LaurentPoly([one, -2 * one, one], -1, exact, "w")
    return LaurentPoly([-one], 0, exact, "w")


def _symbol_coeffs(r: RealPoly, nmax):
    """Coefficients ``c_0..c_nmax`` of ``1/(r(w) r(1/w))`` on the unit circle.

    Partial fractions ``w^m / (r r⃖) = u/r + v/r⃖`` with ``deg u, v < m``: the
    second term only carries negative powers, so ``c_n`` for ``n ≥ 0`` are the
    Taylor coefficients of ``u/r``.
    """
    exact = r.exact
    m = r.deg
    if m == 0:
        out = nm.zeros(nmax + 1, exact)
        out[0] = 1 / (r.c[0] * r.c[0])
        return out
    rr = reverse(r, m)
    S = nm.zeros((2 * m, 2 * m), exact)
    for i in range(m):
        S[i:i + m + 1, i] = rr.c
        S[i:i + m + 1, m + i] = r.c
    rhs = nm.zeros(2 * m, exact)
    rhs[m] = Fraction(1) if exact else 1.0
    sol = nm.solve(S, rhs)
    u = sol[:m]
    return _series_div(u, r.c, nmax)


def _series_div(num, den, nmax):
    """Taylor coefficients of num/den up to order nmax (den[0] ≠ 0)."""
    exact = nm.is_exact(np.asarray(den))
    a = nm.zeros(nmax + 1, exact)
    m = len(den) - 1
    for n in range(nmax + 1):
        s = num[n] if n < len(num) else 0 * den[0]
        for i in range(1, min(n, m) + 1):
            s = s - den[i] * a[n - i]
        a[n] = s / den[0]
    return a


def _power_laurent(j, exact):
    one = Fraction(1) if exact else 1.0
    base = LaurentPoly([one, 0 * one, one], -1, exact, "w")
    out = LaurentPoly([one], 0, exact, "w")
    for _ in range(j):
        out = out * base
    return out


def _moments_partial_fraction(r: RealPoly, zeros, jmax):
    exact = r.exact
    L0 = _boundary_symbol(zeros, exact)
    c = _symbol_coeffs(r, jmax + 2)
    out = []
    L = L0
    base = _power_laurent(1, exact)
    for j in range(jmax + 1):
        s = 0 * c[0]
        for k in range(L.min_exp, L.max_exp + 1):
            s = s + L.coef(k) * c[abs(k)]
        scale = Fraction(1, 2 ** (j + 1)) if exact else 0.5 ** (j + 1)
        out.append(-scale * s)
        L = L * base
    return np.array(out, dtype=object if exact else float)


def _moments_residue(r: RealPoly, zeros, jmax, cfg):
    """Float moments from the residues at the zeros of ``r⃖`` inside the disk."""
    r = r.to_float()
    m = r.deg
    L0 = _boundary_symbol(zeros, False)
    if m == 0:
        return _moments_partial_fraction(r, zeros, jmax)
    rr = reverse(r, m)
    zeta = rr.roots(cfg)
    spread = min((abs(a - b) for i, a in enumerate(zeta) for b in zeta[i + 1:]), default=1.0)
    if spread < 1e-6:
        # repeated zeros: residue formula degenerates
        return _moments_partial_fraction(r, zeros, jmax)
    drr = rr.deriv()
    weight = zeta ** (m - 1) / (nm.polyval(r.c.astype(complex), zeta) * nm.polyval(drr.c.astype(complex), zeta))
    base = _power_laurent(1, False)
    L = L0
    out = []
    for j in range(jmax + 1):
        phi = np.zeros(L.max_exp + 1, dtype=complex)
        phi[0] = L.coef(0) / 2
        for k in range(1, L.max_exp + 1):
            phi[k] = L.coef(k)
        val = -np.sum(nm.polyval(phi, zeta) * weight)
        out.append(val.real / 2 ** j)
        L = L * base
    return np.array(out)


def moments_from_q(q, jmax, cfg=nm.DEFAULT, method="partial_fraction"):
    """Moments ``h_0..h_jmax`` of the Bernstein-Szegő measure of ``q``.

    ``method="partial_fraction"`` is exact for rational ``q`` and also works in
    floats; ``method="residue"`` sums residues at the zeros of the reversed
    polynomial (float only).
    """
    sf = q if isinstance(q, StableFactor) else check_stable(q, cfg)
    r, zeros = _boundary_split(sf.q, cfg)
    if method == "residue":
        return _moments_residue(r, zeros, jmax, cfg)
    return _moments_partial_fraction(r, zeros, jmax)


def moments_batch(Q, jmax):
    """Float moments for a batch of strictly stable polynomials (rows of ``Q``).

    Same partial-fraction route as :func:`moments_from_q`, vectorized over the
    batch.  Returns an array of shape ``(B, jmax + 1)``.
    """
    Q = np.asarray(Q, dtype=float)
    B, n1 = Q.shape
    m = n1 - 1
    L = _boundary_symbol(frozenset(), False)
    base = _power_laurent(1, False)
    syms = []
    for _ in range(jmax + 1):
        syms.append(L)
        L = L * base
    nmax = jmax + 2
    if m == 0:
        c = np.zeros((B, nmax + 1))
        c[:, 0] = 1.0 / Q[:, 0] ** 2
    else:
        S = np.zeros((B, 2 * m, 2 * m))
        for i in range(m):
            S[:, i:i + m + 1, i] = Q[:, ::-1]
            S[:, i:i + m + 1, m + i] = Q
        rhs = np.zeros((B, 2 * m))
        rhs[:, m] = 1.0
        u = np.linalg.solve(S, rhs[..., None])[..., 0][:, :m]
        c = np.zeros((B, nmax + 1))
        for n in range(nmax + 1):
            s = u[:, n].copy() if n < m else np.zeros(B)
            for i in range(1, min(n, m) + 1):
                s -= Q[:, i] * c[:, n - i]
            c[:, n] = s / Q[:, 0]
    out = np.zeros((B, jmax + 1))
    for j, Lj in enumerate(syms):
        s = np.zeros(B)
        for k in range(Lj.min_exp, Lj.max_exp + 1):
            s += Lj.coef(k) * c[:, abs(k)]
        out[:, j] = -s / 2 ** (j + 1)
    return out


def hankel(h, k):
    """``(k+1)×(k+1)`` Hankel matrix ``[h_{i+j}]``."""
    h = np.asarray(h)
    H = np.empty((k + 1, k + 1), dtype=h.dtype)
    for i in range(k + 1):
        for j in range(k + 1):
            H[i, j] = h[i + j]
    return H


def delta_m(q: RealPoly, cfg=nm.DEFAULT):
    """``Δ_m(q) = ± q_m^{m−1} Π_{k<l} (w_k w_l − 1)`` over the zeros of ``q``.

    The sign makes the coefficient of ``q_0^{m−1}`` equal to +1, which turns
    out to be the plain product ``q_m^{m−1} Π (w_k w_l − 1)``.

    Exact input is evaluated through the resultant identity
    ``R(q, q⃖) = (−1)^m q(1) q(−1) Δ_m²`` with the sign taken from the root
    product; when ``q(±1) = 0`` the value is interpolated along ``q_0 + t``.
    """
    m = q.deg
    if m < 1:
        return Fraction(1) if q.exact else 1.0
    if not q.exact:
        return _delta_roots(q, cfg)
    q1, qm1 = q(Fraction(1)), q(Fraction(-1))
    if q1 != 0 and qm1 != 0:
        return _delta_exact(q, cfg)
    ts, vals = [], []
    t = 0
    while len(ts) < m:
        t += 1
        c = q.c.copy()
        c[0] = c[0] + t
        qt = RealPoly(c, True)
        if qt(Fraction(1)) == 0 or qt(Fraction(-1)) == 0:
            continue
        ts.append(Fraction(t))
        vals.append(_delta_exact(qt, cfg))
    # Lagrange evaluation at t = 0
    out = Fraction(0)
    for i, ti in enumerate(ts):
        w = Fraction(1)
        for j, tj in enumerate(ts):
            if j != i:
                w *= (0 - tj) / (ti - tj)
        out += w * vals[i]
    return out


def _delta_roots(q, cfg):
    m = q.deg
    w = q.to_float().roots(cfg)
    prod = complex(float(q.lead) ** (m - 1))
    for k in range(m):
        for l in range(k + 1, m):
            prod *= w[k] * w[l] - 1
    return prod.real


def _delta_exact(q, cfg):
    m = q.deg
    res = resultant(q, reverse(q, m))
    sq = (-1) ** m * res / (q(Fraction(1)) * q(Fraction(-1)))
    root = nm.fraction_sqrt(sq)
    if root is None:
        raise ArithmeticError("resultant quotient is not a rational square")
    if root != 0 and _delta_roots(q, cfg) < 0:
        root = -root
    return root


def orthonormal_from_q(q, k) -> OrthoPoly:
    """``p_k(y) = (w^{k+1} q(1/w) − w^{−k−1} q(w)) / (w − 1/w)`` and its squared norm.

    Orthonormal when ``2k + 1 ≥ m``; when ``2k + 2 = m`` it is orthogonal with
    squared norm ``(q_0 − q_m)/q_0``.
    """
    if isinstance(q, StableFactor):
        q = q.q
    m = q.deg
    p = szego_1d(q.c, 0, k, var="y")
    if 2 * k + 1 >= m:
        return OrthoPoly(p, Fraction(1) if q.exact else 1.0)
    if 2 * k + 2 == m:
        return OrthoPoly(p, (q.coef(0) - q.coef(m)) / q.coef(0))
    raise RegimeViolation(f"k = {k} too small for degree {m}")


def christoffel_darboux(q, k, y, y1):
    """``(p_{k+1}(y) p_k(y1) − p_k(y) p_{k+1}(y1)) / (2 (y − y1))``."""
    pk = orthonormal_from_q(q, k).poly if 2 * k + 2 >= (q.q if isinstance(q, StableFactor) else q).deg \
        else None
    if pk is None:
        raise RegimeViolation("kernel formula needs 2k + 2 ≥ m")
    pk1 = orthonormal_from_q(q, k + 1).poly
    return (pk1(y) * pk(y1) - pk(y) * pk1(y1)) / (2 * (y - y1))


def reproducing_kernel(H, cfg=nm.DEFAULT):
    """Coefficient matrix of the reproducing kernel in ``y^j y1^l``: ``H^{-1}``."""
    H = np.asarray(H)
    nm.cholesky(H, cfg)
    return nm.inv(H)


def kernel_eval(Kinv, y, y1):
    n = Kinv.shape[0]
    vy = np.array([y ** j for j in range(n)], dtype=object)
    vy1 = np.array([y1 ** j for j in range(n)], dtype=object)
    return vy.dot(Kinv).dot(vy1)


def recover_q_from_hankel(H, cfg=nm.DEFAULT, check=True) -> StableFactor:
    """Stable factor ``q`` of degree ≤ 2k whose measure has Hankel matrix ``H``."""
    H = np.asarray(H)
    k = H.shape[0] - 1
    Kinv = reproducing_kernel(H, cfg)
    exact = nm.is_exact(Kinv)
    bkk = nm.fraction_sqrt(Kinv[k, k]) if exact else None
    if exact and bkk is None:
        Kinv = nm.to_float(Kinv)
        exact = False
    if not exact:
        if not Kinv[k, k] > 0:
            raise NotPositiveDefinite(pivot=k)
        bkk = float(np.sqrt(Kinv[k, k]))
    col_k = RealPoly(Kinv[:, k].copy(), exact, "y")
    pk = col_k / bkk
    if k == 0:
        q = RealPoly(pk.c, exact, "w")
    else:
        col_k1 = RealPoly(Kinv[:, k - 1].copy(), exact, "y")
        pk1 = (col_k1 - pk * pk.coef(k - 1)) * 2 / bkk
        q = pair_to_w(pk, pk1, k)
    if not q.coef(0) > 0:
        raise NotStable("recovered q(0) is not positive")
    return check_stable(q, cfg) if check else StableFactor(q)


def bezout_residual(q, Kinv, y, y1):
    """Left side of the Bezout identity for ``H^{-1}`` minus the kernel at one point."""
    if isinstance(q, StableFactor):
        q = q.q
    k = Kinv.shape[0] - 1
    pk = szego_1d(q.c, 0, k, var="y")
    pk1 = szego_1d(q.c, 0, k - 1, var="y")
    lhs = (pk(y) * pk1(y1) - pk(y1) * pk1(y)) / (2 * (y - y1)) + pk(y) * pk(y1)
    return lhs - kernel_eval(Kinv, y, y1)


# ---------------------------------------------------------------------------

def stable_fejer_riesz(Q: RealPoly, cfg=nm.DEFAULT) -> StableFactor:
    """Stable ``q`` with ``Q(x) = q(z) q(1/z)`` for ``x = (z + 1/z)/2`` and ``q(0) > 0``.

    Roots of ``z^d Q((z+1/z)/2)`` are paired as ``(r, 1/r)`` and the members
    outside the disk kept.  For rational ``Q`` the float factor is rounded to
    nearby rationals and accepted only if the factorization holds exactly.
    """
    xs = np.cos(np.pi * (np.arange(1000) + 0.5) / 1000)
    if np.any(np.asarray(Q.to_float()(xs)) <= 0):
        raise NotPositive("Q is not positive on (-1, 1)")
    d = Q.deg
    if d == 0:
        c0 = Q.coef(0)
        root = nm.scalar_sqrt(c0) if Q.exact else float(np.sqrt(c0))
        if root is None:
            root = float(np.sqrt(float(c0)))
            return StableFactor(RealPoly([root], False, "z"))
        return StableFactor(RealPoly([root], Q.exact, "z"))
    L = cheb_substitute(Q.to_float()).shift(d).to_poly("z")
    rts = L.roots(cfg)
    tol = cfg.root_pair_tol
    unit = [r for r in rts if abs(abs(r) - 1) <= np.sqrt(tol)]
    for r in unit:
        if abs(r - 1) > np.sqrt(tol) and abs(r + 1) > np.sqrt(tol):
            raise InteriorUnitRoot(f"unit-circle zero {r} away from ±1")
    keep = []
    for e in (1, -1):
        mult = sum(1 for r in unit if abs(r - e) <= np.sqrt(tol))
        if mult % 2:
            raise UnpairedRoots(f"odd multiplicity {mult} at z = {e}")
        keep += [complex(e)] * (mult // 2)
    outside = [r for r in rts if abs(r) > 1 + np.sqrt(tol)]
    inside = [r for r in rts if abs(r) < 1 - np.sqrt(tol)]
    if len(outside) != len(inside):
        raise UnpairedRoots("zeros do not pair under r -> 1/r")
    for r in outside:
        if min(abs(r * s - 1) for s in inside) > 1e3 * tol * max(1.0, abs(r)):
            raise UnpairedRoots(f"zero {r} has no reciprocal partner")
    keep += outside
    g = np.array([1.0 + 0j])
    for r in keep:
        g = np.convolve(g, np.array([-r, 1.0]))
    g = g.real
    gp = RealPoly(g, False, "z")
    z0 = np.exp(0.7j)
    c2 = (L(z0) / (gp(z0) * z0 ** d * gp(1 / z0))).real
    if c2 <= 0:
        raise NotPositive("inconsistent leading coefficient")
    q = gp * float(np.sqrt(c2))
    if q.coef(0) < 0:
        q = -q
    if Q.exact:
        cand = _rationalize(q, Q)
        if cand is not None:
            return check_stable(cand, cfg)
    return check_stable(q, cfg)


def _rationalize(q: RealPoly, Q: RealPoly, max_den=10 ** 6):
    c = [Fraction(float(v)).limit_denominator(max_den) for v in q.c]
    cand = RealPoly(c, True, "z")
    lhs = LaurentPoly(cand.c, 0, True, "z") * LaurentPoly(cand.c, 0, True, "z").invert()
    if lhs == cheb_substitute(Q):
        return cand
    return None


def stabilize(q: RealPoly, cfg=nm.DEFAULT) -> RealPoly:
    """Reflect zeros inside the disk to ``1/r̄``, preserving ``|q|`` on the circle."""
    q = q.to_float()
    rts = q.roots(cfg)
    scale = float(q.lead)
    out = np.array([1.0 + 0j])
    for r in rts:
        if abs(r) < 1:
            out = np.convolve(out, np.array([1.0, -np.conj(r)]))
        else:
            out = np.convolve(out, np.array([-r, 1.0]))
    p = RealPoly((out * scale).real, False, q.var)
    return -p if p.coef(0) < 0 else p
