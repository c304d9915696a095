"""Bivariate Bernstein-Szegő theory.

Moment tables ``h[k][l] = 𝓛(x^k y^l)`` define matrix functionals in x (with
a basis of polynomials in y) or in y.  Flat recurrences of the induced matrix
families, the Bezout identity relating the slice kernels to a pair
``(q(x), p(x, w))``, its inverse reconstruction, and forward evaluation of
weights ``1 / (q(x) p(x, w) p(x, 1/w))`` live here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import bs1d
from . import matop
from . import numerics as nm
from .errors import (GcdTrivial, NoConvergence, NoSolution,
                     NotPositive, NotPositiveDefinite, ResidualNonzero, StabilityViolation,
                     Undecided)
from .poly import (BivarPoly, MatrixPoly, RealPoly, bivar_exact_div, bivar_gcd,
                   cheb_substitute, laurent_to_x, pair_to_w, squarefree_yun)


# ---------------------------------------------------------------------------
# moment tables

class MomentTable:
    """Grid ``h[k][l] = 𝓛(x^k y^l)`` for ``0 ≤ k ≤ 2n``, ``0 ≤ l ≤ 2m``."""

    def __init__(self, h, error=None):
        arr = h if isinstance(h, np.ndarray) else nm.coerce(h)
        if arr.ndim != 2:
            raise ValueError("moment table must be two-dimensional")
        self.h = arr
        self.error = error

    @property
    def exact(self):
        return nm.is_exact(self.h)

    @property
    def shape(self):
        return self.h.shape

    @property
    def n(self):
        return (self.h.shape[0] - 1) // 2

    @property
    def m(self):
        return (self.h.shape[1] - 1) // 2

    def __getitem__(self, kl):
        return self.h[kl]

    def transpose(self):
        return MomentTable(self.h.T.copy(), None if self.error is None else self.error.T.copy())

    def to_float(self):
        return MomentTable(nm.to_float(self.h), self.error)

    def crop(self, kmax, lmax):
        if kmax >= self.h.shape[0] or lmax >= self.h.shape[1]:
            raise ValueError(f"table of shape {self.h.shape} does not reach ({kmax}, {lmax})")
        return MomentTable(self.h[:kmax + 1, :lmax + 1].copy(),
                           None if self.error is None else self.error[:kmax + 1, :lmax + 1])

    def gram(self, n=None, m=None):
        """Gram matrix of ``x^a y^b`` (a ≤ n, b ≤ m) in lexicographic order."""
        n = self.n if n is None else n
        m = self.m if m is None else m
        idx = [(a, b) for a in range(n + 1) for b in range(m + 1)]
        G = nm.zeros((len(idx), len(idx)), self.exact)
        for r, (a, b) in enumerate(idx):
            for c, (a2, b2) in enumerate(idx):
                G[r, c] = self.h[a + a2, b + b2]
        return G

    def check_positive(self, cfg=nm.DEFAULT):
        try:
            nm.cholesky(self.gram(), cfg)
        except NotPositiveDefinite as e:
            raise NotPositive("moment table is not positive") from e
        return True

    def max_diff(self, other):
        a = nm.to_float(self.h)
        b = nm.to_float(other.h if isinstance(other, MomentTable) else nm.coerce(other))
        k = min(a.shape[0], b.shape[0])
        l = min(a.shape[1], b.shape[1])
        return nm.max_abs(a[:k, :l] - b[:k, :l])


def _basis_matrix(basis, l, exact):
    """Rows: coefficients of the basis polynomials in the monomials ``1, t, …, t^l``."""
    if basis is None:
        return nm.eye(l + 1, exact)
    C = nm.zeros((l + 1, l + 1), exact)
    for i, b in enumerate(basis):
        b = b if isinstance(b, RealPoly) else RealPoly(b, exact)
        if b.deg > l:
            raise ValueError("basis polynomial of too high degree")
        c = b.astype(exact).c
        C[i, :len(c)] = c
    if nm.det(C) == 0:
        raise ValueError("basis is linearly dependent")
    return C


def functional_to_matrix(M: MomentTable, m: int, basis=None, side="x") -> matop.MatFunctional:
    """Matrix functional ``f ↦ 𝓛(f(x) β(y)β(y)ᵗ)`` for the basis β of ℝ_m[y].

    With the standard basis ``S_j[i][i′] = h[j][i+i′]``.  ``side="y"`` swaps
    the roles of x and y.
    """
    T = M if side == "x" else M.transpose()
    if T.shape[1] < 2 * m + 1:
        raise ValueError("moment table too small for the requested size")
    exact = T.exact
    C = _basis_matrix(basis, m, exact)
    S = []
    for j in range(T.shape[0]):
        H = nm.zeros((m + 1, m + 1), exact)
        for a in range(m + 1):
            for b in range(m + 1):
                H[a, b] = T.h[j, a + b]
        S.append(C.dot(H).dot(C.T))
    try:
        # block Gram matrix of (I, xI, …) up to the available degree
        N = (T.shape[0] - 1) // 2
        G = nm.zeros(((N + 1) * (m + 1),) * 2, exact)
        for i in range(N + 1):
            for k in range(N + 1):
                G[i * (m + 1):(i + 1) * (m + 1), k * (m + 1):(k + 1) * (m + 1)] = S[i + k]
        nm.cholesky(G if exact else (G + G.T) / 2)
    except NotPositiveDefinite as e:
        raise NotPositive("matrix functional is not positive") from e
    return matop.MatFunctional(m + 1, S)


@dataclass
class VectorOPFamily:
    """Vector polynomials ``P_{k,l}(x, y) = P_k(x) β(y)`` and their recurrences."""

    orientation: str
    basis: np.ndarray
    family: matop.MatOPFamily
    l: int

    @property
    def P(self):
        return self.family.P

    @property
    def A(self):
        return self.family.A

    @property
    def B(self):
        return self.family.B

    def entries(self, k):
        """Entries of ``P_{k,l}`` as BivarPoly in (x, y)."""
        Pk = self.family.P[k]
        ex = Pk.exact
        C = self.basis if ex else nm.to_float(self.basis)
        out = []
        for i in range(Pk.size):
            g = nm.zeros((Pk.deg + 1, self.l + 1), ex)
            for d in range(Pk.deg + 1):
                g[d] = Pk.coeffs[d][i].dot(C)
            b = BivarPoly(g, ("x", "y"), exact=ex)
            out.append(b if self.orientation == "x" else b.transpose().renamed(("x", "y")))
        return out

    def vector(self, k, x, y):
        vals = [float(e(x, y)) for e in self.entries(k)]
        return np.array(vals)


def vector_op_family(M: MomentTable, N: int, l: int, side="x", basis=None, cfg=nm.DEFAULT):
    T = M if side == "x" else M.transpose()
    T = T.crop(2 * N, 2 * l)
    F = functional_to_matrix(T, l, basis, "x")
    fam = matop.matrix_gram_schmidt(F, N, cfg)
    return VectorOPFamily(side, _basis_matrix(basis, l, T.exact), fam, l)


def flatness(M: MomentTable, n, m, dk=2, dl=1, side="x", cfg=nm.DEFAULT):
    """Max of ``‖A_{k+1,l} − ½I‖∞`` and ``‖B_{k,l}‖∞`` over n ≤ k ≤ n+dk, m ≤ l ≤ m+dl.

    For ``side="y"`` the tilde recurrences ``Ã_{k,l+1}``, ``B̃_{k,l}`` are used.
    """
    da = db = 0.0
    if side == "x":
        for l in range(m, m + dl + 1):
            fam = vector_op_family(M, n + dk + 1, l, "x", None, cfg)
            a, b = _flat(fam.family, n, n + dk)
            da, db = max(da, a), max(db, b)
    else:
        for k in range(n, n + dk + 1):
            fam = vector_op_family(M, m + dl + 1, k, "y", None, cfg)
            a, b = _flat(fam.family, m, m + dl)
            da, db = max(da, a), max(db, b)
    return da, db


def _flat(fam, lo, hi):
    l = fam.P[0].size
    half = np.eye(l) / 2
    da = max(nm.max_abs(nm.to_float(fam.A[k + 1]) - half) for k in range(lo, hi + 1))
    db = max(nm.max_abs(nm.to_float(fam.B[k])) for k in range(lo, hi + 1))
    return da, db


# ---------------------------------------------------------------------------
# Bezout identity

@dataclass
class BezoutKernel:
    """Kernel ``Σ W_{ab}(x) y^a y1^b`` in the monomial basis plus the source family."""

    W: MatrixPoly
    family: VectorOPFamily
    n: int
    m: int

    def __call__(self, x, y, y1):
        Wx = self.W(x)
        vy = np.array([y ** a for a in range(self.m + 1)], dtype=object)
        vy1 = np.array([y1 ** a for a in range(self.m + 1)], dtype=object)
        return vy.dot(Wx).dot(vy1)

    def from_vectors(self, x, y, y1):
        """``P_nᵗP_n(y1) − 4x P_nᵗA_nᵗP_{n−1}(y1) + 4P_{n−1}ᵗA_nA_nᵗP_{n−1}(y1)``."""
        fam = self.family
        n = self.n
        Pn_y, Pn_y1 = fam.vector(n, x, y), fam.vector(n, x, y1)
        Pm_y, Pm_y1 = fam.vector(n - 1, x, y), fam.vector(n - 1, x, y1)
        A = nm.to_float(fam.A[n])
        return (Pn_y @ Pn_y1 - 4 * x * Pn_y @ A.T @ Pm_y1 + 4 * Pm_y @ A @ A.T @ Pm_y1)


def bezout_rhs(M: MomentTable, n: int, m: int, basis=None, cfg=nm.DEFAULT) -> BezoutKernel:
    """Right-hand side of the Bezout identity as ``[1, y, …, y^m] W(x) [1, y1, …]ᵗ``.

    ``W = Ψ̂(1/z)ᵗΨ̂(z)`` is formed from the monic family and transformed back to
    the monomial basis, so the result does not depend on ``basis``.
    """
    fam = vector_op_family(M, n, m, "x", basis, cfg)
    Wb = matop.w_from_family(fam.family, n)
    C = fam.basis if Wb.exact else nm.to_float(fam.basis)
    W = MatrixPoly(np.array([C.T.dot(c).dot(C) for c in Wb.coeffs]), Wb.exact, "x")
    return BezoutKernel(W, fam, n, m)


def _ycoefs(b: BivarPoly, m):
    """Coefficients of ``y^0..y^m`` of a (x, y) polynomial as RealPoly in x."""
    ex = b.exact
    out = []
    for j in range(m + 1):
        col = b.col(j) if j <= b.degs[1] and not b.is_zero() else RealPoly.const(0, ex)
        out.append(RealPoly(col.c, ex, "x"))
    return out


def _from_ycoefs(cols, exact):
    return BivarPoly.from_rows([RealPoly(c.c, exact, "x") for c in cols], ("y", "x"), exact) \
        .transpose().renamed(("x", "y"))


def bezout_matrix(q: RealPoly, pm: BivarPoly, pm1: BivarPoly, m: int, scale=1) -> MatrixPoly:
    """Coefficient matrix in ``y^a y1^b`` of
    ``scale·q(x)·((p_m(y1)p_{m−1}(y) − p_m(y)p_{m−1}(y1)) / (2(y1 − y)) + p_m(y)p_m(y1))``.
    """
    ex = q.exact
    A = _ycoefs(pm, m)
    Bc = _ycoefs(pm1, m) if not pm1.is_zero() else [RealPoly.const(0, ex, "x")] * (m + 1)
    zero = RealPoly.const(0, ex, "x")
    Nab = [[A[b] * Bc[a] - A[a] * Bc[b] for b in range(m + 1)] for a in range(m + 1)]
    Q = [[zero] * (m + 1) for _ in range(m + 1)]
    for a in range(m + 1):
        for b in range(m - 1, -1, -1):
            prev = Q[a - 1][b + 1] if a >= 1 else zero
            Q[a][b] = Nab[a][b + 1] + prev
    half = Fraction(1, 2) if ex else 0.5
    ents = [[(Q[a][b] * half + A[a] * A[b]) * q * scale for b in range(m + 1)] for a in range(m + 1)]
    return MatrixPoly.from_entries(ents, var="x")


@dataclass
class Reconstruction:
    """``q`` with ``q(0) = 1`` and ``p = √scale_sq · p_rat``."""

    q: RealPoly
    p_rat: BivarPoly
    scale_sq: object
    pm: BivarPoly
    pm1: BivarPoly
    residual: float
    degenerate_normalization: bool = False

    @property
    def p(self) -> BivarPoly:
        r = nm.scalar_sqrt(self.scale_sq) if isinstance(self.scale_sq, Fraction) else None
        if r is not None and self.p_rat.exact:
            return self.p_rat * r
        return self.p_rat.to_float() * math.sqrt(float(self.scale_sq))


def _div_exact(a: RealPoly, b: RealPoly, tol):
    qt, r = divmod(a, b)
    if a.exact:
        if not r.is_zero():
            raise NoSolution("Bezout identity has no polynomial solution (remainder in division)")
    elif nm.max_abs(r.c) > tol * max(1.0, a.norm_inf()):
        raise NoSolution(f"division leaves a remainder of size {nm.max_abs(r.c):.3g}")
    return qt


def _split_square(s: RealPoly, cfg):
    """``s = c·σ·τ²`` with σ squarefree; returns (c, σ, τ) with σ, τ monic."""
    ex = s.exact
    one = RealPoly.const(1, ex, "x")
    if s.deg < 1:
        return s.coef(0), one, one
    if ex:
        parts = squarefree_yun(s)
        sig, tau = one, one
        for i, a in enumerate(parts, start=1):
            if i % 2:
                sig = sig * a
            tau = tau * a ** (i // 2)
        c = s.lead
        return c, sig, tau
    rts = s.roots(cfg)
    groups = nm.cluster_values(rts, 1e-5)
    sig_r, tau_r = [], []
    for r, mult in groups:
        if abs(r.imag) < 1e-7:
            r = complex(r.real)
        sig_r += [r] * (mult % 2)
        tau_r += [r] * (mult // 2)

    def build(rs):
        c = np.array([1.0 + 0j])
        for r in rs:
            c = np.convolve(c, np.array([-r, 1.0]))
        return RealPoly(c.real, False, "x")

    return float(s.lead), build(sig_r), build(tau_r)


def reconstruct_qp(W: MatrixPoly, m: int, cfg=nm.DEFAULT) -> Reconstruction:
    """Recover ``(q, p)`` from the Bezout right-hand side ``W(x)``.

    Normalization: ``q(0) = 1``, no x-only factor in ``p`` beyond what the
    squarefree split forces, ``p(0, 0) > 0``.  Exact input gives ``q`` and
    ``p_rat`` exactly with ``p = √scale_sq · p_rat``.
    """
    ex = W.exact
    tol = max(1e3 * cfg.rel_tol, 1e-8)
    if not ex:
        big = W.norm_inf()
        c = np.where(np.abs(W.coeffs) <= 1e-11 * big, 0.0, W.coeffs)
        W = MatrixPoly(c, False, "x")
    if W.size != m + 1:
        raise ValueError("W has the wrong size")
    s = W.entry(m, m)
    if s.is_zero():
        raise NoSolution("corner entry of W vanishes")
    c, sig, tau = _split_square(s, cfg)
    degenerate = False
    s0 = sig.coef(0)
    if (s0 == 0) if ex else abs(s0) <= 1e-12 * sig.norm_inf():
        degenerate = True
        q = sig
        kappa = c
    else:
        q = sig / s0
        kappa = c * s0
    if not kappa > 0:
        raise NoSolution("corner entry of W is not of the form q·p_mm² with q > 0")
    # p_m = √κ r_m,  r_{m,m} = τ
    qk = q * kappa
    g = [W.entry(j, m) for j in range(m + 1)]
    den = qk * tau
    r_m = [_div_exact(gj, den, tol) for j, gj in enumerate(g)]
    if m >= 1:
        wc = [W.entry(j, m - 1) for j in range(m + 1)]
        two = 2 if ex else 2.0
        r_m1 = []
        for j in range(m):
            t = _div_exact(wc[j], qk, tol) - r_m[j] * r_m[m - 1]
            r_m1.append(_div_exact(t * two, tau, tol))
        # the y^m coefficient of the y1^{m-1} column must be consistent
        last = _div_exact(wc[m], qk, tol) - r_m[m] * r_m[m - 1]
        if ex and not last.is_zero() or (not ex and last.norm_inf() > tol * max(1.0, s.norm_inf())):
            raise NoSolution("inconsistent top coefficient in the Bezout kernel")
        r_m1.append(RealPoly.const(0, ex, "x"))
    else:
        r_m1 = [RealPoly.const(0, ex, "x")]
    pm = _from_ycoefs(r_m, ex)
    pm1 = _from_ycoefs(r_m1, ex) if m >= 1 else BivarPoly.const(0, ("x", "y"), ex)
    p_rat = pair_to_w(pm, pm1, m) if m >= 1 else BivarPoly.from_first(r_m[0], ("x", "w"))
    s00 = p_rat.coef(0, 0)
    flip = s00 < 0 if s00 != 0 else _lead_entry(p_rat) < 0
    if flip:
        p_rat, pm, pm1 = -p_rat, -pm, -pm1
    if not ex:
        p_rat, pm, pm1 = (_chop(b) for b in (p_rat, pm, pm1))
    W2 = bezout_matrix(q, pm, pm1, m, kappa)
    res = _matrix_poly_diff(W, W2)
    scale = max(1.0, W.norm_inf())
    if ex and res != 0:
        raise NoSolution("Bezout identity residual is nonzero")
    if not ex and res > tol * scale:
        raise NoSolution(f"Bezout identity residual {res:.3g} exceeds tolerance")
    return Reconstruction(q, p_rat, kappa, pm, pm1, float(res) / scale, degenerate)


def _chop(b: BivarPoly, rel=1e-11):
    """Zero float coefficients at rounding level and drop the emptied border."""
    g = np.asarray(b.grid, dtype=float)
    big = float(np.max(np.abs(g))) if g.size else 0.0
    g = np.where(np.abs(g) <= rel * big, 0.0, g)
    return BivarPoly(g, b.var_pair, exact=False, offset=b.offset)


def _lead_entry(b: BivarPoly):
    g = b.grid
    for v in g.ravel()[::-1]:
        if v != 0:
            return v
    return 0


def _matrix_poly_diff(A: MatrixPoly, B: MatrixPoly):
    d = max(A.deg, B.deg)
    ex = A.exact and B.exact
    worst = Fraction(0) if ex else 0.0
    for k in range(d + 1):
        a = A.coef(k) if ex else nm.to_float(A.coef(k))
        b = B.coef(k) if ex else nm.to_float(B.coef(k))
        diff = a - b
        v = max(abs(x) for x in diff.ravel()) if ex else nm.max_abs(diff)
        worst = max(worst, v)
    return worst


# ---------------------------------------------------------------------------
# stability certificate

@dataclass
class StabilityReport:
    cond_a: bool
    cond_b: Optional[bool]
    details: dict = field(default_factory=dict)


def _taylor_shift_2d(p: BivarPoly, xc, wc):
    """Coefficients of ``p(xc + u, wc + v)`` as a dense grid."""
    g = p.dense()
    ex = p.exact
    dx, dw = g.shape
    out = nm.zeros((dx, dw), ex)
    for i in range(dx):
        for j in range(dw):
            a = g[i, j]
            if a == 0:
                continue
            for s in range(i + 1):
                cx = math.comb(i, s) * xc ** (i - s)
                for t in range(j + 1):
                    out[s, t] = out[s, t] + a * cx * math.comb(j, t) * wc ** (j - t)
    return out


def _box_excludes(p: BivarPoly, xa, xb, wa, wb):
    """Centered-form test: True if ``p`` has no zero in the closed box."""
    xc, wc = (xa + xb) / 2, (wa + wb) / 2
    rx, rw = (xb - xa) / 2, (wb - wa) / 2
    g = _taylor_shift_2d(p, xc, wc)
    bound = 0
    for i in range(g.shape[0]):
        for j in range(g.shape[1]):
            if i == 0 and j == 0:
                continue
            bound = bound + abs(g[i, j]) * rx ** i * rw ** j
    return abs(g[0, 0]) > bound


def _roots_in(c, a, b, exact, cfg):
    if exact:
        return nm.sturm_count(c, a, b)
    c = np.asarray(nm.to_float(c))
    if len(nm.trim(c)) < 2:
        return 0
    r = nm.poly_roots(c, cfg)
    sc = max(1.0, float(np.max(np.abs(r))))
    real = r[np.abs(r.imag) <= 1e-9 * sc].real
    return int(np.sum((real > a + 1e-12) & (real < b - 1e-12)))


def _critical_poly(p: BivarPoly):
    """Polynomial in x whose real roots contain every x where the count of
    w-roots in (−1, 1) can change: leading coefficient, ``p(x, ±1)`` and the
    w-discriminant.
    """
    ex = p.exact
    one = Fraction(1) if ex else 1.0
    dw = p.degs[1]
    lead = RealPoly(p.col(dw).c, ex, "x")
    crit = lead * _eval_w(p, one) * _eval_w(p, -one)
    disc = _discriminant_w(p) if dw >= 2 else None
    return crit, disc


def _eval_w(p: BivarPoly, w):
    g = p.dense()
    vals = np.array([nm.polyval(g[i], w) for i in range(g.shape[0])], dtype=g.dtype)
    return RealPoly(vals, p.exact, "x")


def _discriminant_w(p: BivarPoly):
    """w-discriminant ``Res_w(p, ∂p/∂w)`` as a polynomial in x, by interpolation."""
    from .poly import resultant
    ex = p.exact
    dx, dw = p.degs
    bound = (2 * dw - 1) * max(dx, 0) + 1
    xs, ys = [], []
    k = 0
    while len(xs) < bound:
        k += 1
        xv = Fraction(k, 7) if ex else k / 7.0
        f = p.eval_first(xv)
        if f.deg < dw:
            continue
        xs.append(xv)
        ys.append(resultant(f, f.deriv()))
    if ex:
        from .poly import _newton_interp
        r = _newton_interp(xs, ys)
        return RealPoly(r.c, True, "x")
    V = np.vander(np.array(xs, dtype=float), bound, increasing=True)
    return RealPoly(np.linalg.solve(V, np.array(ys, dtype=float)), False, "x")


def _isolate(c, a, b, exact, cfg, width):
    """Disjoint subintervals of (a, b), each holding exactly one distinct real root."""
    if exact:
        out = []
        stack = [(a, b)]
        while stack:
            lo, hi = stack.pop()
            n = nm.sturm_count(c, lo, hi)
            if n == 0:
                continue
            mid = (lo + hi) / 2
            if n == 1 and hi - lo <= width:
                out.append((lo, hi))
                continue
            if nm.polyval(c, mid) == 0:
                eps = (hi - lo) / 1000
                out.append((mid - eps, mid + eps))
                stack += [(lo, mid - eps), (mid + eps, hi)]
                continue
            stack += [(lo, mid), (mid, hi)]
        return sorted(out)
    c = nm.to_float(np.asarray(c))
    if len(nm.trim(c)) < 2:
        return []
    r = nm.poly_roots(c, cfg)
    real = sorted(x.real for x in r if abs(x.imag) <= 1e-9 * max(1.0, abs(x)) and a < x.real < b)
    return [(x - width / 2, x + width / 2) for x in real]


def certify_nonvanishing(p: BivarPoly, cfg=nm.DEFAULT, grid=201, budget=4000):
    """Decide whether ``p(x, w) ≠ 0`` on (−1, 1)².

    Returns (verdict, details).  Exact inputs give a certified answer: Sturm
    counts of the w-roots in (−1, 1) along a grid of ``grid`` rational
    x-nodes, plus refinement around the real roots of the critical polynomial
    (where the count can change).  Tangential contacts at discriminant roots
    are ruled out by centered-form box exclusion.
    """
    ex = p.exact
    if p.degs[1] < 1 or p.is_zero():
        v = p.eval_second(Fraction(0) if ex else 0.0)
        c = nm.count_roots_in_interval(v.c, -1, 1, cfg) if v.deg >= 1 else (1 if v.is_zero() else 0)
        return c == 0, {"reason": "no w-dependence"}
    one = Fraction(1) if ex else 1.0
    nodes = [-one + 2 * one * (i + 1) / (grid + 1) for i in range(grid)]

    def count_at(xv):
        f = p.eval_first(xv)
        if f.is_zero():
            return 1
        if f.deg < 1:
            return 0
        return _roots_in(f.c, -1, 1, ex, cfg)

    for xv in nodes:
        k = count_at(xv)
        if k:
            return False, {"witness_x": xv, "roots_in_interval": k}
    crit, disc = _critical_poly(p)
    pieces = [crit] + ([disc] if disc is not None and not disc.is_zero() else [])
    width = one / (50 * (grid + 1))
    checked = 0
    for piece in pieces:
        if piece.is_zero():
            return False, {"reason": "critical polynomial vanishes identically"}
        if piece.deg < 1:
            continue
        for (lo, hi) in _isolate(piece.c, -one, one, ex, cfg, width):
            for xv in (lo, hi):
                if -one < xv < one and count_at(xv):
                    return False, {"witness_x": xv}
            if piece is disc:
                ok, used = _tangency_excluded(p, lo, hi, ex, budget - checked)
                checked += used
                if not ok:
                    raise Undecided("could not exclude a tangential zero", box=(lo, hi))
    return True, {"nodes": grid, "certified": ex}


def _tangency_excluded(p, lo, hi, ex, budget):
    """Cover [lo, hi] × [−1, 1] by boxes free of zeros, trimming near w = ±1 where allowed."""
    one = Fraction(1) if ex else 1.0
    stack = [(lo, hi, -one, one)]
    used = 0
    while stack:
        xa, xb, wa, wb = stack.pop()
        used += 1
        if used > budget:
            return False, used
        if _box_excludes(p, xa, xb, wa, wb):
            continue
        # zeros on the boundary lines w = ±1 are admissible: shave thin slabs there
        if wb - wa < one / 10 ** 6 and (wa == -one or wb == one):
            fw = p.eval_first((xa + xb) / 2)
            if _nonzero_between(fw, wa, wb, ex):
                continue
            return False, used
        if xb - xa >= wb - wa:
            xm = (xa + xb) / 2
            stack += [(xa, xm, wa, wb), (xm, xb, wa, wb)]
        else:
            wm = (wa + wb) / 2
            stack += [(xa, xb, wa, wm), (xa, xb, wm, wb)]
    return True, used


def _nonzero_between(f, a, b, ex):
    if f.deg < 1:
        return not f.is_zero()
    return _roots_in(f.c, a, b, ex, nm.DEFAULT) == 0


def stability_certificate(q, p: BivarPoly, Psi: Optional[MatrixPoly] = None, cfg=nm.DEFAULT):
    """Conditions (a) ``p ≠ 0`` on (−1,1)² and (b) ``det Ψ̂ ≠ 0`` on (−1, 1)."""
    cond_a, det_a = certify_nonvanishing(p, cfg)
    details = {"a": det_a}
    cond_b = None
    if Psi is not None:
        det = Psi.det_poly()
        if det.is_zero():
            cond_b = False
        elif det.deg < 1:
            cond_b = True
        else:
            cnt = nm.count_roots_in_interval(det.c, -1, 1, cfg)
            cond_b = cnt == 0
            details["b"] = {"zeros_in_interval": cnt}
    if q is not None:
        qq = q.q if isinstance(q, bs1d.StableFactor) else q
        if qq.deg >= 1:
            details["q_zeros_in_interval"] = nm.count_roots_in_interval(qq.c, -1, 1, cfg)
    return StabilityReport(cond_a, cond_b, details)


@dataclass
class WeightReconstruction:
    """Output of :func:`reconstruct_weight`; ``psi`` is the monic-normalized Ψ̂_n."""

    n: int
    m: int
    W: MatrixPoly
    result: Reconstruction
    psi: MatrixPoly
    certificate: StabilityReport

    @property
    def ok(self):
        return bool(self.certificate.cond_a and self.certificate.cond_b)


def reconstruct_weight(M: MomentTable, n: int, m: int, cfg=nm.DEFAULT) -> WeightReconstruction:
    """Bezout right-hand side, ``(q, p)`` and both stability conditions from a table."""
    if M.shape[0] < 2 * n + 1 or M.shape[1] < 2 * m + 1:
        raise ValueError("moment table too small for (n, m)")
    bz = bezout_rhs(M.crop(2 * n, 2 * m), n, m, None, cfg)
    rec = reconstruct_qp(bz.W, m, cfg)
    # det of the monic form differs from det Ψ̂_n by a nonzero constant
    psi = matop.psi_hat_monic(bz.family.family, n)
    cert = stability_certificate(rec.q, rec.p_rat, psi, cfg)
    return WeightReconstruction(n, m, bz.W, rec, psi, cert)


# ---------------------------------------------------------------------------
# weight specs and forward moments

@dataclass
class PointMass:
    x0: float
    y0: float
    mass: float


@dataclass
class LineMass:
    """``mass · 𝓛_ν`` on the line ``x = x0``; ν = normalized measure of ``p_line(w)``."""

    x0: float
    mass: float
    p_line: RealPoly


@dataclass
class CurveMass:
    """``(2/π)∫ f(x, y(x)) density(x) √(1−x²) dx`` with vectorized callables."""

    y_of_x: Callable
    density: Callable


@dataclass
class WeightSpec:
    kind: str
    q: Optional[RealPoly] = None
    p: Optional[BivarPoly] = None
    n1: Optional[int] = None
    q1: Optional[RealPoly] = None
    q2: Optional[RealPoly] = None
    omega: Optional[BivarPoly] = None
    singular: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ("one-sided", "two-sided"):
            raise ValueError("kind must be 'one-sided' or 'two-sided'")
        if self.kind == "one-sided" and (self.q is None or self.p is None):
            raise ValueError("one-sided weights need q and p")
        if self.kind == "two-sided" and (self.q1 is None or self.q2 is None or self.omega is None):
            raise ValueError("two-sided weights need q1, q2 and omega")

    def one_sided(self):
        """Equivalent (q, p) for the x-slice form."""
        if self.kind == "one-sided":
            return self.q, self.p
        return self.q1, p_from_omega(self.omega, self.q2)

    def degrees(self):
        """``(n, m)`` with flat recurrences expected beyond them."""
        if self.kind == "one-sided":
            n1 = self.n1 if self.n1 is not None else (self.q.deg + 1) // 2
            return n1 + max(self.p.degs[0], 0), (max(self.p.degs[1], 0) + 1) // 2
        n0, m0 = (max(d, 0) for d in self.omega.degs)
        return n0 + (self.q1.deg + 1) // 2, m0 + (self.q2.deg + 1) // 2


def p_from_omega(omega: BivarPoly, q2: RealPoly) -> BivarPoly:
    """``p(x, w) = q̃₂(w) ω(z, w) ω(1/z, w)`` expressed in (x, w)."""
    ex = omega.exact
    prod = omega * omega.invert_first()
    px = laurent_to_x(prod, axis=0, var="x")
    if q2.deg >= 1 or q2.coef(0) != 1:
        q2t = bs1d.stable_fejer_riesz(q2).q
        ex = ex and q2t.exact
        px = px.astype(ex) * BivarPoly.from_second(RealPoly(q2t.astype(ex).c, ex, "w"), ("x", "w"))
    return px.renamed(("x", "w"))


def phat_from_omega(omega: BivarPoly, q1: RealPoly) -> BivarPoly:
    """``p̂(z, y) = q̃₁(z) ω(z, w) ω(z, 1/w)`` expressed in (z, y)."""
    t = p_from_omega(omega.transpose().renamed(("z", "w")), q1)
    return t.transpose().renamed(("z", "y"))


def _stable_rows(P):
    """Reflect w-roots inside the disk, preserving ``|row(w)|`` on the circle."""
    out = np.array(P, dtype=float)
    for i, row in enumerate(out):
        c = nm.trim(row)
        if len(c) < 2:
            continue
        r = np.roots(c[::-1])
        if np.all(np.abs(r) > 1):
            continue
        new = np.array([1.0 + 0j])
        for z in r:
            new = np.convolve(new, np.array([1.0, -np.conj(z)]) if abs(z) < 1 else np.array([-z, 1.0]))
        new = new.real * c[-1]
        if new[0] < 0:
            new = -new
        out[i, :len(new)] = new
    return out


def slice_moments(p: BivarPoly, xs, lmax):
    """``h_l(x) = (2/π)∫ y^l √(1−y²) / (p(x,w)p(x,1/w)) dy`` at the nodes ``xs``."""
    g = nm.to_float(p.dense())
    rows = np.array([nm.polyval(g[:, j], xs) for j in range(g.shape[1])]).T
    try:
        h = bs1d.moments_batch(_stable_rows(rows), lmax)
    except np.linalg.LinAlgError:
        h = None
    # slices with w-roots on the circle (boundary zeros of p) have no float moments
    if h is None or not np.all(np.isfinite(h)):
        raise NoConvergence("slice moments are not finite near a boundary zero of p")
    return h


def spec_moments(spec: WeightSpec, kmax: int, lmax: int, cfg=nm.DEFAULT, start=32) -> MomentTable:
    """Moment table of a weight spec (float), including singular parts.

    The absolutely continuous part is computed as x-quadrature (Gauss-Chebyshev
    node doubling) of the closed-form slice moments ``h_l(x) / q(x)``.
    """
    q, p = spec.one_sided()
    qf = q.to_float()
    kpow = np.arange(kmax + 1)

    def f(xs):
        h = slice_moments(p, xs, lmax)
        qx = np.asarray(qf(xs), dtype=float)
        if np.any(qx <= 0):
            raise NoConvergence("q is not positive at a quadrature node")
        xp = xs[:, None] ** kpow[None, :]
        return xp[:, :, None] * (h / qx[:, None])[:, None, :]

    res = nm.integrate_adaptive(f, 1, cfg, start=start)
    H = np.array(res.value, dtype=float)
    err = np.full(H.shape, res.error)
    for s in spec.singular:
        H = H + _singular_moments(s, kmax, lmax, cfg, start)
    return MomentTable(H, err)


def _singular_moments(s, kmax, lmax, cfg, start=32):
    out = np.zeros((kmax + 1, lmax + 1))
    if isinstance(s, PointMass):
        for k in range(kmax + 1):
            for l in range(lmax + 1):
                out[k, l] = float(s.mass) * float(s.x0) ** k * float(s.y0) ** l
        return out
    if isinstance(s, LineMass):
        pl = s.p_line.to_float()
        nu = bs1d.moments_batch(_stable_rows(pl.c[None, :]), lmax)[0]
        for k in range(kmax + 1):
            out[k] = float(s.mass) * float(s.x0) ** k * nu
        return out
    if isinstance(s, CurveMass):
        kp, lp = np.arange(kmax + 1), np.arange(lmax + 1)

        def f(xs):
            y = s.y_of_x(xs)
            d = s.density(xs)
            return (xs[:, None] ** kp)[:, :, None] * ((y[:, None] ** lp) * d[:, None])[:, None, :]
        return np.asarray(nm.integrate_adaptive(f, 1, cfg, start=start).value)
    raise TypeError(f"unknown singular part {s!r}")


def forward_verify(spec: WeightSpec, dk=2, dl=1, cfg=nm.DEFAULT, degrees=None):
    """Flatness deviations of the recurrences of the functional of ``spec``."""
    res0 = nm.integrate_adaptive(lambda xs: slice_moments(spec.one_sided()[1], xs, 0)[:, 0]
                                 / np.asarray(spec.one_sided()[0].to_float()(xs), dtype=float),
                                 1, cfg, start=32)
    if not np.isfinite(res0.value) or res0.value <= 0:
        raise NoConvergence("weight is not integrable")
    n, m = spec.degrees() if degrees is None else degrees
    M = spec_moments(spec, 2 * (n + dk + 1), 2 * (m + dl + 1), cfg)
    da, db = flatness(M, n, m, dk, dl, "x", cfg)
    report = {"n": n, "m": m, "A_dev": da, "B_dev": db, "quad_error": float(np.max(M.error)),
              "table": M}
    if spec.kind == "two-sided":
        ta, tb = flatness(M, n, m, dk, dl, "y", cfg)
        report.update({"At_dev": ta, "Bt_dev": tb})
    return report


# ---------------------------------------------------------------------------
# two-sided recovery

def _pullback(p: BivarPoly, axis):
    """``z^d p((z+1/z)/2, ·)`` (axis 0) as an ordinary polynomial."""
    L = cheb_substitute(p, axis=axis, var="z" if axis == 0 else "w")
    d = -L.offset[axis]
    return L.shift(d, 0) if axis == 0 else L.shift(0, d)


@dataclass
class OmegaResult:
    omega_rat: BivarPoly
    scale_sq: object
    residual: float

    @property
    def omega(self):
        r = nm.scalar_sqrt(self.scale_sq) if isinstance(self.scale_sq, Fraction) else None
        if r is not None:
            return self.omega_rat * r
        return self.omega_rat.to_float() * math.sqrt(float(self.scale_sq))


def recover_omega(p: BivarPoly, phat: BivarPoly, q1: RealPoly, q2: RealPoly,
                  p_scale_sq=1, phat_scale_sq=1, cfg=nm.DEFAULT) -> OmegaResult:
    """Common factor ω of the two one-sided reconstructions.

    ``a = z^{n₀} p(x, w)/q̃₂(w) = ω · z^{n₀}ω(1/z, w)`` and
    ``b = w^{m₀} p̂(z, y)/q̃₁(z) = ω · w^{m₀}ω(z, 1/w)``; ω = gcd(a, b) up to a
    constant fixed from ``a``.  The true ``p`` is ``√p_scale_sq · p`` and
    likewise for ``p̂``.
    """
    if not (p.exact and phat.exact):
        raise ValueError("recover_omega needs exact inputs")
    q1t = bs1d.stable_fejer_riesz(q1).q
    q2t = bs1d.stable_fejer_riesz(q2).q
    if not (q1t.exact and q2t.exact):
        raise ValueError("stable factors of q1, q2 are not rational")
    a = _pullback(p.renamed(("x", "w")), 0).renamed(("z", "w"))
    a = bivar_exact_div(a, BivarPoly.from_second(RealPoly(q2t.c, True, "w"), ("z", "w")))
    b = _pullback(phat.renamed(("z", "y")), 1).renamed(("z", "w"))
    b = bivar_exact_div(b, BivarPoly.from_first(RealPoly(q1t.c, True, "z"), ("z", "w")))
    if a is None or b is None:
        raise ResidualNonzero("stable factor does not divide the pulled-back slice polynomial")
    g = bivar_gcd(a, b)
    if g.degs == (0, 0) and (a.degs != (0, 0) or b.degs != (0, 0)):
        raise GcdTrivial("the two reconstructions share no common factor")
    n0, m0 = g.degs
    ga = g * g.invert_first().shift(n0, 0)
    gb = g * g.invert_second().shift(0, m0)
    la = _ratio(a, ga)
    lb = _ratio(b, gb)
    if la is None or lb is None:
        raise ResidualNonzero("ω·ω̄ does not reproduce the slice polynomials")
    # true scale: λ² = √p_scale·la = √phat_scale·lb
    if Fraction(p_scale_sq) * la * la != Fraction(phat_scale_sq) * lb * lb:
        raise ResidualNonzero("x-side and y-side scales disagree")
    s4 = Fraction(p_scale_sq) * la * la
    r = nm.fraction_sqrt(s4)
    scale_sq = r if r is not None else math.sqrt(float(s4))
    if g.coef(0, 0) < 0:
        g = -g
    check_omega_bidisk(g, cfg)
    return OmegaResult(g, scale_sq, 0.0)


def check_omega_bidisk(omega: BivarPoly, cfg=nm.DEFAULT):
    """ω ≠ 0 on 𝔻̄² away from the four corners (±1, ±1).

    For each z of a 64-point polar grid of 𝔻̄ the roots of ω(z, ·) must lie
    outside the closed disk; a root on the circle is allowed only at a corner.
    """
    g = omega.to_float().dense()
    r = np.linspace(0.0, 1.0, 8)
    t = np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
    tol = cfg.root_pair_tol
    for z in (r[:, None] * np.exp(1j * t[None, :])).ravel():
        c = np.array([np.polyval(g[::-1, j], z) for j in range(g.shape[1])])
        if np.all(np.abs(c) <= cfg.abs_tol):
            raise StabilityViolation(f"recovered ω vanishes identically at z={z:.3g}")
        k = np.nonzero(np.abs(c) > cfg.abs_tol)[0][-1]
        for w in np.roots(c[: k + 1][::-1]) if k > 0 else ():
            if abs(w) < 1 - tol:
                raise StabilityViolation(f"recovered ω vanishes at ({z:.3g}, {w:.3g})")
            if abs(w) <= 1 + tol and not (abs(abs(z.real) - 1) < tol and abs(abs(w.real) - 1) < tol):
                raise StabilityViolation(f"recovered ω vanishes on the boundary at ({z:.3g}, {w:.3g})")


def _ratio(a: BivarPoly, b: BivarPoly):
    """Scalar λ with ``a = λ b`` exactly, else None."""
    for (i, j), _ in np.ndenumerate(b.grid):
        v = b.grid[i, j]
        if v != 0:
            lam = a.coef(i + b.offset[0], j + b.offset[1]) / v
            return lam if (a - b * lam).is_zero() else None
    return None


def q_of_two_sided(q1, q2, omega):
    """``Q(x, y) = q₁(x) q₂(y) ω ω(1/z,·) ω(·,1/w) ω(1/z,1/w)`` as a (x, y) polynomial."""
    prod = omega * omega.invert_first()
    prod = prod * prod.invert_second()
    Q = laurent_to_x(laurent_to_x(prod, 0, "x"), 1, "y").renamed(("x", "y"))
    ex = Q.exact and q1.exact and q2.exact
    Q = Q.astype(ex)
    Q = Q * BivarPoly.from_first(RealPoly(q1.astype(ex).c, ex, "x"), ("x", "y"))
    Q = Q * BivarPoly.from_second(RealPoly(q2.astype(ex).c, ex, "y"), ("x", "y"))
    return Q


def q_of_one_sided(q, p):
    """``Q(x, y) = q(x) p(x, w) p(x, 1/w)`` as a (x, y) polynomial."""
    prod = p * p.invert_second()
    Q = laurent_to_x(prod, 1, "y").renamed(("x", "y"))
    ex = Q.exact and q.exact
    return Q.astype(ex) * BivarPoly.from_first(RealPoly(q.astype(ex).c, ex, "x"), ("x", "y"))


def qxy_moments(Q: BivarPoly, kmax, lmax, cfg=nm.DEFAULT):
    """Moments of ``(4/π²) √(1−x²)√(1−y²) / Q(x, y)`` by tensor Gauss-Chebyshev."""
    g = nm.to_float(Q.dense())
    kp, lp = np.arange(kmax + 1), np.arange(lmax + 1)

    def f(x, ys):
        qv = np.zeros_like(ys)
        for i in range(g.shape[0] - 1, -1, -1):
            qv = qv * x + nm.polyval(g[i], ys)
        # axis 0 runs over the y-nodes
        return np.einsum("k,nl->nkl", x ** kp, (ys[:, None] ** lp) / qv[:, None])

    res = nm.integrate_adaptive(f, 2, cfg, start=16)
    return MomentTable(np.asarray(res.value), np.full((kmax + 1, lmax + 1), res.error))


@dataclass
class ProbeReport:
    tables_agree: bool
    table_diff: float
    polys_agree: bool
    poly_diff: float

    @property
    def ok(self):
        return (not self.tables_agree) or self.polys_agree


def uniqueness_probe(Q1: BivarPoly, Q2: BivarPoly, n, m, cfg=nm.DEFAULT, tol=1e-9):
    """Equal moment tables up to (2n, 2m) must come from equal denominators."""
    xs = np.linspace(-0.99, 0.99, 41)
    for Q in (Q1, Q2):
        v = np.array([[float(Q(a, b)) for b in xs] for a in xs])
        if np.any(v <= 0):
            raise NotPositive("denominator not positive on (-1, 1)^2")
    T1 = qxy_moments(Q1, 2 * n, 2 * m, cfg)
    T2 = qxy_moments(Q2, 2 * n, 2 * m, cfg)
    td = T1.max_diff(T2)
    d = Q1.to_float() - Q2.to_float()
    pd = d.norm_inf()
    return ProbeReport(td <= tol, td, pd <= max(tol, 1e-9) * max(1.0, Q1.norm_inf()), pd)
