"""Torus-side orthogonal spaces and the bivariate Szegő map.

A polynomial ``p_c(z, w)`` nonvanishing on 𝕋 × 𝔻̄ defines the functional
``𝓛_{p_c}(z^k w^l) = (2π)^{-2} ∬ z^k w^l |p_c|^{-2}``.  All weights handled
here have real coefficients, so every moment is real and the inner product
``⟨f, g⟩ = 𝓛(f(z, w) g(1/z, 1/w))`` is a real bilinear form on coefficient
grids.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bs1d, bs2d
from . import numerics as nm
from .errors import DimensionMismatch, NoConvergence, NotPositive, StabilityViolation
from .poly import BivarPoly, RealPoly, cheb_substitute, chebU, szego_1d


# ---------------------------------------------------------------------------
# torus functional

def _grid_values(p: BivarPoly, n):
    """``p`` on the ``n × n`` torus grid, axis 0 ↔ z."""
    t = np.exp(2j * np.pi * np.arange(n) / n)
    g = nm.to_float(p.grid)
    o1, o2 = p.offset
    zp = t[:, None] ** (np.arange(g.shape[0]) + o1)[None, :]
    wp = t[:, None] ** (np.arange(g.shape[1]) + o2)[None, :]
    return zp @ g @ wp.T


class TorusFunctional:
    """Fourier moments of ``|p_c|^{-2}`` on the torus, refined on demand."""

    def __init__(self, p_c: BivarPoly, cfg=nm.DEFAULT, check_grid=64):
        self.p_c = p_c.to_float()
        self.cfg = cfg
        v = np.abs(_grid_values(self.p_c, check_grid))
        if np.min(v) <= 1e-12 * max(1.0, self.p_c.norm_inf()):
            raise StabilityViolation("p_c vanishes on the torus")
        self._c = None
        self._reach = (-1, -1)
        self.n = 0
        self.error = 0.0

    def _compute(self, n):
        F = 1.0 / np.abs(_grid_values(self.p_c, n)) ** 2
        return np.fft.fft2(F).real / (n * n)

    def ensure(self, K, L):
        if K <= self._reach[0] and L <= self._reach[1]:
            return
        # grow the reach geometrically so that incremental requests stay cheap
        K = max(K, 2 * self._reach[0], 16)
        L = max(L, 2 * self._reach[1], 16)
        n = max(64, self.n // 2, 1 << int(np.ceil(np.log2(4 * max(K, L) + 8))))
        prev = self._compute(n)
        for _ in range(self.cfg.quad_doubling_limit):
            cur = self._compute(2 * n)
            blk_p = _block(prev, K, L)
            blk_c = _block(cur, K, L)
            err = nm.max_abs(blk_p - blk_c)
            if err <= max(self.cfg.rel_tol * nm.max_abs(blk_c), self.cfg.abs_tol):
                self._c = cur
                self.n = 2 * n
                self._reach = (K, L)
                self.error = err
                return
            prev, n = cur, 2 * n
        raise NoConvergence("torus moments did not converge", err)

    def moment(self, k, l):
        self.ensure(abs(k), abs(l))
        return self._c[k % self.n, l % self.n]

    def moments(self, kmax, lmax):
        """Grid ``c[k, l]`` for ``0 ≤ k ≤ kmax``, ``0 ≤ l ≤ lmax``."""
        self.ensure(kmax, lmax)
        return self._c[:kmax + 1, :lmax + 1].copy()

    def inner(self, f: BivarPoly, g: BivarPoly):
        """``𝓛(f(z, w) g(1/z, 1/w))`` for Laurent polynomials."""
        F, G = nm.to_float(f.grid), nm.to_float(g.grid)
        (a0, b0), (c0, d0) = f.offset, g.offset
        kmax = max(abs(a0 + F.shape[0] - 1 - c0), abs(a0 - c0 - G.shape[0] + 1))
        lmax = max(abs(b0 + F.shape[1] - 1 - d0), abs(b0 - d0 - G.shape[1] + 1))
        self.ensure(kmax, lmax)
        ks = (a0 + np.arange(F.shape[0]))[:, None] - (c0 + np.arange(G.shape[0]))[None, :]
        ls = (b0 + np.arange(F.shape[1]))[:, None] - (d0 + np.arange(G.shape[1]))[None, :]
        C = self._c[ks[:, :, None, None] % self.n, ls[None, None, :, :] % self.n]
        return float(np.einsum("ab,cd,acbd->", F, G, C))

    def gram(self, polys):
        n = len(polys)
        G = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                G[i, j] = G[j, i] = self.inner(polys[i], polys[j])
        return G


def _block(c, K, L):
    idx_k = np.r_[0:K + 1, -K:0] if K else np.array([0])
    idx_l = np.r_[0:L + 1, -L:0] if L else np.array([0])
    return c[np.ix_(idx_k % c.shape[0], idx_l % c.shape[1])]


def torus_moments(p_c: BivarPoly, kmax, lmax, cfg=nm.DEFAULT):
    """Moments ``c[k, l] = 𝓛_{p_c}(z^k w^l)`` for ``0 ≤ k ≤ kmax``, ``0 ≤ l ≤ lmax``."""
    T = TorusFunctional(p_c, cfg)
    return T.moments(kmax, lmax), T.error


# ---------------------------------------------------------------------------
# subspaces

@dataclass
class SubspaceBasis:
    """Rows of ``vectors`` are coefficient grids (flattened) on ``[0..k] × [0..l]``."""

    k: int
    l: int
    vectors: np.ndarray
    gram: Optional[np.ndarray] = None
    residuals: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.vectors.shape[0]

    def polys(self, var_pair=("z", "w")):
        return [BivarPoly(v.reshape(self.k + 1, self.l + 1), var_pair, exact=False)
                for v in self.vectors]


def _mono(a, b):
    return BivarPoly([[1.0]], ("z", "w"), (a, b), exact=False)


def _grid_poly(vec, k, l):
    return BivarPoly(np.asarray(vec, dtype=float).reshape(k + 1, l + 1), ("z", "w"), exact=False)


def _index(k, l):
    return [(a, b) for a in range(k + 1) for b in range(l + 1)]


def _as_vector(f: BivarPoly, k, l):
    v = np.zeros((k + 1) * (l + 1))
    for (a, b) in _index(k, l):
        v[a * (l + 1) + b] = float(f.coef(a, b))
    rest = f.to_float() - _grid_poly(v, k, l)
    if rest.norm_inf() > 1e-12 * max(1.0, f.norm_inf()):
        raise ValueError("polynomial exceeds the ambient degrees")
    return v


def _monomial_gram(T: TorusFunctional, k, l):
    idx = _index(k, l)
    T.ensure(k, l)
    G = np.empty((len(idx), len(idx)))
    for i, (a, b) in enumerate(idx):
        for j, (c, d) in enumerate(idx):
            G[i, j] = T.moment(a - c, b - d)
    return G


def _orthonormalize(V, G):
    """Rows of V orthonormal under the Gram matrix ``G`` of the ambient coordinates."""
    S = V @ G @ V.T
    S = (S + S.T) / 2
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as e:
        raise NotPositive("Gram matrix of the subspace is not positive definite") from e
    return np.linalg.solve(L, V)


def ptilde_space(T: TorusFunctional, k, l) -> SubspaceBasis:
    """Orthonormal basis of ``ℂ_{k,l} ⊖ ℂ_{k,l−1}`` (dimension k + 1)."""
    idx = _index(k, l)
    G = _monomial_gram(T, k, l)
    lo = [i for i, (a, b) in enumerate(idx) if b < l]
    hi = [i for i, (a, b) in enumerate(idx) if b == l]
    V = np.zeros((len(hi), len(idx)))
    for r, i in enumerate(hi):
        V[r, i] = 1.0
    if lo:
        coef = np.linalg.solve(G[np.ix_(lo, lo)], G[np.ix_(lo, hi)])
        V[:, lo] = -coef.T
    V = _orthonormalize(V, G)
    return SubspaceBasis(k, l, V, V @ G @ V.T)


def p_space(T: TorusFunctional, k, l) -> SubspaceBasis:
    """Orthonormal basis of ``ℂ_{k,l} ⊖ ℂ_{k−1,l}`` (dimension l + 1)."""
    idx = _index(k, l)
    G = _monomial_gram(T, k, l)
    lo = [i for i, (a, b) in enumerate(idx) if a < k]
    hi = [i for i, (a, b) in enumerate(idx) if a == k]
    V = np.zeros((len(hi), len(idx)))
    for r, i in enumerate(hi):
        V[r, i] = 1.0
    if lo:
        coef = np.linalg.solve(G[np.ix_(lo, lo)], G[np.ix_(lo, hi)])
        V[:, lo] = -coef.T
    V = _orthonormalize(V, G)
    return SubspaceBasis(k, l, V, V @ G @ V.T)


def reflected(p: BivarPoly, n, m):
    """``z^n w^m p(1/z, 1/w)``."""
    return p.invert_first().invert_second().shift(n, m)


def _null_rows(C, cfg, expected=None):
    """Orthonormal basis (rows) of the right nullspace of C, decided by a rank gap."""
    if C.shape[0] == 0:
        return np.eye(C.shape[1])
    U, s, Vt = np.linalg.svd(C)
    scale = s[0] if s.size else 1.0
    tiny = max(1e3 * cfg.rel_tol, 1e-9) * max(scale, 1.0)
    rank = int(np.sum(s > tiny))
    if expected is not None and C.shape[1] - rank != expected:
        raise DimensionMismatch(f"nullspace dimension {C.shape[1] - rank}, expected {expected}")
    return Vt[rank:]


def split_p1_p2(T: TorusFunctional, nt, mt, M, cfg=nm.DEFAULT, factors=None, K=None):
    """Subspaces ``(P̃¹, P̃²)`` of ``P̃_{ñ−1, M}`` for ``p_c`` of degrees ``(ñ, m̃)``.

    Without ``factors`` the infinite orthogonality families are truncated at
    ``k ≤ K = 2ñ + 8`` and solved as nullspaces inside ``P̃_{ñ−1,M}``; the
    result is certified by the two direct-sum identities (and the reflection
    identity when ``z^ñ p_c(1/z, w) = p_c``).  If the nullspace dimensions are
    inconsistent, K is raised once.

    ``factors=("product", p1, p2, (n1, m1), (n2, m2))`` uses the closed form for
    ``p_c = p1(z,w) z^{n2} p2(1/z,w)`` with p1, p2 stable on 𝔻̄²;
    ``factors=("z-factor", p1, p2, (n1, m))`` uses the closed form for
    ``p_c = p1(z,w) p2(z)`` with p2 stable.
    """
    if M < mt:
        raise ValueError("M must be at least the w-degree of p_c")
    if factors is not None:
        P1, P2 = _split_explicit(T, nt, mt, M, cfg, factors)
    else:
        K0 = 2 * nt + 8 if K is None else K
        try:
            P1, P2 = _split_solve(T, nt, mt, M, cfg, K0)
        except DimensionMismatch:
            P1, P2 = _split_solve(T, nt, mt, M, cfg, 2 * K0)
    _certify_split(T, nt, mt, M, P1, P2, cfg)
    return P1, P2


def _split_solve(T, nt, mt, M, cfg, K):
    base = ptilde_space(T, nt - 1, M)
    polys = base.polys()
    prs = reflected(T.p_c, nt, mt).shift(0, M - mt)
    C1 = []
    for k in range(nt, K + 1):
        for l in range(M):
            C1.append([T.inner(f, _mono(k, l)) for f in polys])
    for k in range(K + 1):
        C1.append([T.inner(f, prs.shift(k, 0)) for f in polys])
    C2 = []
    for k in range(-K, 0):
        for l in range(M):
            C2.append([T.inner(f, _mono(k, l)) for f in polys])
    for k in range(1, K + 1):
        C2.append([T.inner(f.shift(k, 0), prs) for f in polys])
    N1 = _null_rows(np.array(C1), cfg)
    N2 = _null_rows(np.array(C2), cfg)
    if N1.shape[0] + N2.shape[0] != nt:
        raise DimensionMismatch(f"dimensions {N1.shape[0]} + {N2.shape[0]} do not add up to {nt}")
    G = _monomial_gram(T, nt - 1, M)
    P1 = SubspaceBasis(nt - 1, M, _orthonormalize(N1 @ base.vectors, G) if N1.size else
                       np.zeros((0, base.vectors.shape[1])))
    P2 = SubspaceBasis(nt - 1, M, _orthonormalize(N2 @ base.vectors, G) if N2.size else
                       np.zeros((0, base.vectors.shape[1])))
    P1.residuals["truncation_K"] = K
    return P1, P2


def _split_explicit(T, nt, mt, M, cfg, factors):
    kind = factors[0]
    G = _monomial_gram(T, nt - 1, M)
    if kind == "product":
        _, p1, p2, (n1, m1), (n2, m2) = factors
        p1, p2 = p1.to_float(), p2.to_float()
        T1, T2 = TorusFunctional(p1, cfg), TorusFunctional(p2, cfg)
        B1 = ptilde_space(T1, n1 - 1, m1).polys() if n1 >= 1 else []
        B2 = ptilde_space(T2, n2 - 1, m2).polys() if n2 >= 1 else []
        f1 = p2.invert_second().shift(0, m2)
        f2 = reflected(p1, n1, m1)
        one = [(f1 * b).shift(0, M - mt) for b in B1]
        two = [(f2 * b.invert_first().shift(n2 - 1, 0)).shift(0, M - mt) for b in B2]
    elif kind == "z-factor":
        _, p1, p2, (n1, m) = factors
        p1 = p1.to_float()
        p2 = p2.to_float() if isinstance(p2, BivarPoly) else BivarPoly.from_first(p2.to_float(), ("z", "w"))
        n2 = p2.degs[0]
        T1 = TorusFunctional(p1, cfg)
        if n1 >= 1:
            Q1, Q2 = split_p1_p2(T1, n1, m, M, cfg)
            one = [p2 * f for f in Q1.polys()]
            two = [reflected(p2, n2, 0) * f for f in Q2.polys()]
        else:
            one, two = [], []
        r1 = reflected(p1, n1, m).shift(0, M - m)
        one += [r1.shift(j, 0) for j in range(n2)]
    else:
        raise ValueError(f"unknown factorization kind {kind!r}")

    def basis(fs):
        if not fs:
            return SubspaceBasis(nt - 1, M, np.zeros((0, nt * (M + 1))))
        V = np.array([_as_vector(f, nt - 1, M) for f in fs])
        return SubspaceBasis(nt - 1, M, _orthonormalize(V, G))
    return basis(one), basis(two)


def _projection_residual(V, W, G):
    """Largest G-norm residual of the rows of V projected onto span(rows of W)."""
    if V.shape[0] == 0:
        return 0.0
    S = W @ G @ W.T
    coef = np.linalg.solve(S, W @ G @ V.T)
    R = V - coef.T @ W
    return float(np.sqrt(max(0.0, np.max(np.diag(R @ G @ R.T)))))


def _certify_split(T, nt, mt, M, P1, P2, cfg):
    tol = 1e-7
    if P1.dim + P2.dim != nt:
        raise DimensionMismatch(f"dimensions {P1.dim} + {P2.dim} do not add up to {nt}")
    base = ptilde_space(T, nt - 1, M)
    G = _monomial_gram(T, nt - 1, M)
    W = np.vstack([P1.vectors, P2.vectors])
    r_a = _projection_residual(base.vectors, W, G)
    # P̃_{ñ,M} = P̃¹ ⊕ zP̃² ⊕ span{w^{M−m̃} reflected p_c}
    big = ptilde_space(T, nt, M)
    Gb = _monomial_gram(T, nt, M)
    emb = []
    for f in P1.polys():
        emb.append(_as_vector(f, nt, M))
    for f in P2.polys():
        emb.append(_as_vector(f.shift(1, 0), nt, M))
    emb.append(_as_vector(reflected(T.p_c, nt, mt).shift(0, M - mt), nt, M))
    r_b = _projection_residual(big.vectors, np.array(emb), Gb)
    P1.residuals.update({"direct_sum_a": r_a, "direct_sum_b": r_b})
    refl = T.p_c.invert_first().shift(nt, 0) - T.p_c
    if nt % 2 == 0 and refl.norm_inf() <= 1e-12 * max(1.0, T.p_c.norm_inf()) and P1.dim:
        mirror = np.array([_as_vector(f.invert_first().shift(nt - 1, 0), nt - 1, M) for f in P1.polys()])
        r_c = _projection_residual(mirror, P2.vectors, G) if P2.dim else 1.0
        P1.residuals["reflection"] = r_c
        if r_c > tol:
            raise DimensionMismatch(f"reflection identity fails (residual {r_c:.3g})")
    if r_a > tol or r_b > tol:
        raise DimensionMismatch(f"direct-sum identities fail (residuals {r_a:.3g}, {r_b:.3g})")


# ---------------------------------------------------------------------------
# Szegő map

def _u_coeffs(k, exact):
    return chebU(k, exact, "x")


def szego_1d_map(f: RealPoly, N):
    """``S_N(f) = (z^{N+1} f(1/z) − z^{−N−1} f(z)) / (z − 1/z)`` as a polynomial in x."""
    return szego_1d(f.c, 0, N, f.exact, "x")


def szego_map(f: BivarPoly, N, M) -> BivarPoly:
    """``S_{z,N} ∘ S_{w,M}``: ``z^j w^k ↦ U_{N−j}(x) U_{M−k}(y)``."""
    if not f.is_poly():
        raise ValueError("szego_map needs an ordinary polynomial")
    ex = f.exact
    g = f.dense()
    acc = BivarPoly.const(0, ("x", "y"), ex)
    uy = {}
    for j in range(g.shape[0]):
        ux = _u_coeffs(N - j, ex)
        if ux.is_zero():
            continue
        for k in range(g.shape[1]):
            c = g[j, k]
            if c == 0:
                continue
            if k not in uy:
                uy[k] = _u_coeffs(M - k, ex)
            if uy[k].is_zero():
                continue
            acc = acc + BivarPoly.from_first(ux * c, ("x", "y")) * BivarPoly.from_second(uy[k], ("x", "y"))
    return acc


def szego_map_w(p: BivarPoly, M) -> BivarPoly:
    """``S_{w,M}`` applied to a polynomial in (x, w); returns (x, y)."""
    ex = p.exact
    acc = BivarPoly.const(0, ("x", "y"), ex)
    for k in range(p.degs[1] + 1):
        col = p.col(k)
        if col.is_zero():
            continue
        uy = _u_coeffs(M - k, ex)
        if uy.is_zero():
            continue
        acc = acc + BivarPoly.from_first(RealPoly(col.c, ex, "x"), ("x", "y")) * \
            BivarPoly.from_second(RealPoly(uy.c, ex, "y"), ("x", "y"))
    return acc


def modified_inner_product(f: BivarPoly, g: BivarPoly, M, T: TorusFunctional):
    """``⟨f, g⟩ − ⟨w^{2M} f(z, 1/w), g⟩`` under ``𝓛_{p_c}``."""
    return T.inner(f, g) - T.inner(f.invert_second().shift(0, 2 * M), g)


# ---------------------------------------------------------------------------
# bases on the plane

def l_gram(table, polys):
    """Gram matrix of (x, y) polynomials under the functional with moments ``table``."""
    H = nm.to_float(table.h if hasattr(table, "h") else np.asarray(table))
    n = len(polys)
    dense = [nm.to_float(p.dense()) for p in polys]
    G = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            a, b = dense[i], dense[j]
            s = 0.0
            for (i1, j1), v in np.ndenumerate(a):
                if v == 0:
                    continue
                s += v * np.sum(b * H[i1:i1 + b.shape[0], j1:j1 + b.shape[1]])
            G[i, j] = G[j, i] = s
    return G


def _table_for(spec, polys, cfg):
    kx = max(max(p.degs[0], 0) for p in polys)
    ky = max(max(p.degs[1], 0) for p in polys)
    return bs2d.spec_moments(spec, 2 * kx, 2 * ky, cfg)


def orthonormal_1d(qt: RealPoly, K, exact=False):
    """Orthonormal polynomials ``U^q_0..U^q_K`` for ``(2/π)√(1−x²)/|q̃(z)|²``."""
    sf = bs1d.check_stable(qt)
    out = []
    for k in range(K + 1):
        if 2 * k + 1 >= qt.deg:
            out.append(RealPoly(bs1d.orthonormal_from_q(sf, k).poly.c, qt.exact, "x"))
        else:
            out.append(None)
    if all(o is not None for o in out):
        return out if exact else [o.to_float() for o in out]
    h = nm.to_float(bs1d.moments_from_q(sf, 2 * K))
    H = bs1d.hankel(np.asarray(h, dtype=float), K)
    L = np.linalg.cholesky(H)
    C = np.linalg.inv(L)
    low = [RealPoly(C[k, :k + 1], False, "x") for k in range(K + 1)]
    return [o.to_float() if o is not None else low[k] for k, o in enumerate(out)]


@dataclass
class BasisResult:
    polys: list
    gram_residual: float
    parts: dict = field(default_factory=dict)


def _tilde_of(q):
    if q.deg == 0:
        c = q.coef(0)
        r = nm.scalar_sqrt(c) if q.exact else float(np.sqrt(c))
        return RealPoly([r if r is not None else float(np.sqrt(float(c)))], None, "z")
    return bs1d.stable_fejer_riesz(q).q


def _zpoly(p: BivarPoly):
    """``z^{n0} p(x, w)`` as an ordinary polynomial in (z, w)."""
    L = cheb_substitute(p, axis=0, var="z")
    return L.shift(-L.offset[0], 0).renamed(("z", "w"))


def complete_basis_tilde(spec: bs2d.WeightSpec, N, M, cfg=nm.DEFAULT, check=True) -> BasisResult:
    """Orthonormal basis of ``P̃_{N,M;𝓛}`` for a one-sided spec.

    ``{p_M(y;x) U^q_k(x)}_{k ≤ N−n₀}`` plus the Szegő images
    ``S_{N,M−1}(q̃ φ_j)`` of a modified-orthonormal basis of ``P̃¹`` for
    ``p̃ = z^{n₀} p``.
    """
    q, p = spec.one_sided()
    _require_stable(p, cfg)
    n0 = max(p.degs[0], 0)
    m = (max(p.degs[1], 0) + 1) // 2
    if M < m or N < n0 + (q.deg + 1) // 2:
        raise ValueError("N, M below the degrees of the weight")
    qt = _tilde_of(q).to_float()
    pf = p.to_float()
    pM = szego_map_w(pf, M)
    U = orthonormal_1d(qt, N - n0)
    prod = [pM * BivarPoly.from_first(u, ("x", "y")) for u in U]
    extra = []
    phis = []
    if n0 >= 1:
        pt = _zpoly(pf)
        T = TorusFunctional(pt, cfg)
        P1, _ = split_p1_p2(T, 2 * n0, 2 * m, 2 * M + 1, cfg)
        fs = P1.polys()
        G = np.array([[modified_inner_product(a, b, M, T) for b in fs] for a in fs])
        G = (G + G.T) / 2
        try:
            L = np.linalg.cholesky(G)
        except np.linalg.LinAlgError as e:
            raise NotPositive("modified inner product is not positive on P̃¹") from e
        C = np.linalg.inv(L)
        qz = BivarPoly.from_first(RealPoly(qt.c, False, "z"), ("z", "w"))
        for row in C:
            phi = _combine(fs, row)
            phis.append(phi)
            extra.append(szego_map(qz * phi, N, M - 1))
    polys = prod + extra
    res = np.nan
    if check:
        G = l_gram(_table_for(spec, polys, cfg), polys)
        res = nm.max_abs(G - np.eye(len(polys)))
    return BasisResult(polys, res, {"products": prod, "completion": extra, "phi": phis})


def _combine(fs, row):
    acc = fs[0] * float(row[0])
    for f, c in zip(fs[1:], row[1:]):
        acc = acc + f * float(c)
    return acc


def _require_stable(p, cfg, grid=48):
    """``p(x, w) ≠ 0`` on [−1, 1] × 𝔻̄ (grid check on x and the closed disk)."""
    pf = p.to_float()
    xs = np.cos(np.linspace(0, np.pi, grid))
    for x in xs:
        r = pf.eval_first(float(x))
        if r.deg >= 1:
            rts = np.roots(nm.trim(r.c)[::-1])
            if np.any(np.abs(rts) <= 1 + 1e-10):
                raise StabilityViolation(f"p(x, ·) has a zero in the closed disk at x = {x:.6g}")
        elif abs(r.coef(0)) <= 1e-14:
            raise StabilityViolation("p(x, ·) vanishes identically")


def bases_two_sided(spec: bs2d.WeightSpec, N, M, cfg=nm.DEFAULT, check=True):
    """Orthonormal bases of ``P̃_{N,M;𝓛}`` and ``P_{N,M;𝓛}`` for a two-sided spec."""
    if spec.kind != "two-sided":
        raise ValueError("bases_two_sided needs a two-sided weight")
    om = spec.omega.to_float()
    bs2d.check_omega_bidisk(om, cfg)
    n0, m0 = (max(d, 0) for d in om.degs)
    q1t, q2t = _tilde_of(spec.q1).to_float(), _tilde_of(spec.q2).to_float()
    if N < n0 + (spec.q1.deg + 1) // 2 or M < m0 + (spec.q2.deg + 1) // 2:
        raise ValueError("N, M below the degrees of the weight")
    mult = (BivarPoly.from_first(RealPoly(q1t.c, False, "z"), ("z", "w"))
            * BivarPoly.from_second(RealPoly(q2t.c, False, "w"), ("z", "w")) * om)
    T = TorusFunctional(om, cfg)
    # tilde side
    p = bs2d.p_from_omega(om, spec.q2.to_float()).to_float()
    pM = szego_map_w(p, M)
    U1 = orthonormal_1d(q1t, N - n0)
    tilde_prod = [pM * BivarPoly.from_first(u, ("x", "y")) for u in U1]
    tilde_extra = []
    if n0 >= 1:
        for g in ptilde_space(T, n0 - 1, m0).polys():
            tilde_extra.append(szego_map(mult * g.invert_second().shift(0, m0), N, M))
    # plain side
    ph = bs2d.phat_from_omega(om, spec.q1.to_float()).to_float()
    phN = szego_map_w(ph.transpose().renamed(("y", "w")), N).transpose().renamed(("x", "y"))
    U2 = orthonormal_1d(q2t, M - m0)
    plain_prod = [phN * BivarPoly.from_second(RealPoly(u.c, False, "y"), ("x", "y")) for u in U2]
    plain_extra = []
    if m0 >= 1:
        for g in p_space(T, n0, m0 - 1).polys():
            plain_extra.append(szego_map(mult * g.invert_first().shift(n0, 0), N, M))
    tilde = tilde_prod + tilde_extra
    plain = plain_prod + plain_extra
    rt = rp = np.nan
    if check:
        tab = _table_for(spec, tilde + plain, cfg)
        rt = nm.max_abs(l_gram(tab, tilde) - np.eye(len(tilde)))
        rp = nm.max_abs(l_gram(tab, plain) - np.eye(len(plain)))
    return (BasisResult(tilde, rt, {"products": tilde_prod, "completion": tilde_extra}),
            BasisResult(plain, rp, {"products": plain_prod, "completion": plain_extra}))
