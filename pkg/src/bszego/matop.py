"""Matrix orthogonal polynomials on the real line with flat recurrence tails.

Matrix-valued functionals ``f ↦ 𝓛_l(f)`` are given by their symmetric moment
matrices ``S_j = 𝓛_l(x^j)``.  The inner product of matrix polynomials is
``⟨Q, R⟩ = Σ_{j,k} Q_j S_{j+k} R_kᵗ``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from . import numerics as nm
from .errors import (InconsistentMasses, NoConvergence, NonSimpleZero,
                     NotASimpleZero, NotPositive, NotPositiveDefinite,
                     NotPositiveOnGrid, ZeroOffRealInterval)
from .poly import MatrixPoly, cheb_substitute, laurent_to_x, LaurentPoly


@dataclass
class MatFunctional:
    """Moment matrices ``S_j``; ``generator(jmax)`` may supply more on demand."""

    l: int
    S: list
    generator: Optional[Callable] = None

    def __post_init__(self):
        self.S = [np.asarray(s) for s in self.S]
        for s in self.S:
            if s.shape != (self.l, self.l):
                raise ValueError("moment matrix of wrong size")
            if nm.is_exact(s):
                if any(s[i, j] != s[j, i] for i in range(self.l) for j in range(i)):
                    raise ValueError("moment matrix not symmetric")
            elif nm.max_abs(s - s.T) > 1e-9 * max(1.0, nm.max_abs(s)):
                raise ValueError("moment matrix not symmetric")

    @property
    def exact(self):
        return all(nm.is_exact(s) for s in self.S)

    def ensure(self, jmax):
        if len(self.S) <= jmax:
            if self.generator is None:
                raise ValueError(f"moments up to degree {jmax} unavailable")
            self.S = [np.asarray(s) for s in self.generator(jmax)]
        return self

    def moment(self, j):
        self.ensure(j)
        return self.S[j]

    def to_float(self):
        return MatFunctional(self.l, [nm.to_float(s) for s in self.S], self.generator)


def inner(F: MatFunctional, Q: MatrixPoly, R: MatrixPoly):
    F.ensure(Q.deg + R.deg)
    exact = Q.exact
    out = nm.zeros((F.l, F.l), exact)
    for j in range(Q.deg + 1):
        for k in range(R.deg + 1):
            S = F.S[j + k] if exact else nm.to_float(F.S[j + k])
            out = out + Q.coeffs[j].dot(S).dot(R.coeffs[k].T)
    return out


def _xshift(P: MatrixPoly):
    return P.shift(1)


@dataclass
class MatOPFamily:
    P: list
    A: list          # A[n] for n = 1..N (A[0] unused, None)
    B: list          # B[n] for n = 0..N-1
    monic: list
    D: list
    L: list
    exact: bool
    functional: MatFunctional = field(repr=False, default=None)


def matrix_gram_schmidt(F: MatFunctional, N: int, cfg=nm.DEFAULT) -> MatOPFamily:
    """Orthonormalize ``I, xI, …, x^N I``; leading coefficients lower-triangular.

    Monic polynomials ``M_n`` and their Gram matrices ``D_n`` are computed in
    the functional's arithmetic; ``P_n = L_n^{-1} M_n`` with ``D_n = L_n L_nᵗ``.
    The family is exact only when every ``D_n`` has an exact Cholesky factor.
    """
    F.ensure(2 * N)
    exact = F.exact
    if not exact:
        F = F.to_float() if any(nm.is_exact(s) for s in F.S) else F
    l = F.l
    I = nm.eye(l, exact)
    monic, D, Dinv = [], [], []
    for n in range(N + 1):
        Mn = MatrixPoly(np.concatenate([nm.zeros((n, l, l), exact), I[None]]), exact, "x")
        xn = Mn
        for j in range(n):
            c = inner(F, xn, monic[j]).dot(Dinv[j])
            Mn = Mn - MatrixPoly(np.array([c.dot(cc) for cc in monic[j].coeffs]), exact, "x")
        Dn = inner(F, Mn, Mn)
        if not exact:
            Dn = (Dn + Dn.T) / 2
        try:
            nm.cholesky(Dn, cfg)
        except NotPositiveDefinite as e:
            raise NotPositive("Gram matrix not positive definite", degree=n) from e
        monic.append(Mn)
        D.append(Dn)
        Dinv.append(nm.inv(Dn))
    Ls = [nm.cholesky(d, cfg) for d in D]
    fam_exact = exact and all(nm.is_exact(Lm) for Lm in Ls)
    if not fam_exact:
        Ls = [nm.to_float(Lm) for Lm in Ls]
    mon = monic if fam_exact else [m.to_float() for m in monic]
    P = [MatrixPoly(np.array([nm.solve(Lm, c) for c in Mn.coeffs]), fam_exact, "x")
         for Lm, Mn in zip(Ls, mon)]
    A = [None] + [nm.solve(Ls[n - 1], Ls[n]) for n in range(1, N + 1)]
    B = []
    Ff = F if fam_exact else F.to_float()
    for n in range(N):
        B.append(inner(Ff, _xshift(P[n]), P[n]))
    return MatOPFamily(P, A, B, monic, D, Ls, fam_exact, F)


def flatness(fam: MatOPFamily, n0: int):
    """Max deviations ``‖A_{n+1} − I/2‖∞`` and ``‖B_n‖∞`` for ``n ≥ n0``."""
    l = fam.P[0].size
    half = np.eye(l) / 2
    da = [nm.max_abs(nm.to_float(fam.A[n + 1]) - half) for n in range(n0, len(fam.A) - 1)]
    db = [nm.max_abs(nm.to_float(fam.B[n])) for n in range(n0, len(fam.B))]
    return max(da, default=0.0), max(db, default=0.0)


def recurrence_residual(fam: MatOPFamily, x):
    """``max_n ‖x P_n − A_{n+1} P_{n+1} − B_n P_n − A_nᵗ P_{n−1}‖`` at a point."""
    worst = 0.0
    P = [nm.to_float(p(x) if not fam.exact else p(Fraction(x))) for p in fam.P]
    A = [None] + [nm.to_float(a) for a in fam.A[1:]]
    B = [nm.to_float(b) for b in fam.B]
    for n in range(len(P) - 1):
        r = x * P[n] - A[n + 1] @ P[n + 1] - B[n] @ P[n]
        if n:
            r -= A[n].T @ P[n - 1]
        worst = max(worst, nm.max_abs(r))
    return worst


# ---------------------------------------------------------------------------

def _subst(P: MatrixPoly, shift: int) -> MatrixPoly:
    """``z^shift · P((z + 1/z)/2)`` as a matrix polynomial in z."""
    l = P.size
    ents = [[cheb_substitute(P.entry(i, j)).shift(shift) for j in range(l)] for i in range(l)]
    deg = max(e.max_exp for row in ents for e in row)
    exact = P.exact
    out = nm.zeros((deg + 1, l, l), exact)
    for i in range(l):
        for j in range(l):
            e = ents[i][j]
            if e.is_zero():
                continue
            if e.min_exp < 0:
                raise ValueError("negative powers after substitution")
            out[e.min_exp:e.max_exp + 1, i, j] = e.c
    return MatrixPoly(out, exact, "z")


def psi_hat_monic(fam: MatOPFamily, N: int) -> MatrixPoly:
    """``z^N (M_N − 2z D_N D_{N−1}^{-1} M_{N−1})``; ``Ψ̂_N = L_N^{-1}`` times this."""
    exact = nm.is_exact(fam.D[N])
    MN = fam.monic[N] if exact else fam.monic[N].to_float()
    out = _subst(MN, N)
    if N >= 1:
        Mm = fam.monic[N - 1] if exact else fam.monic[N - 1].to_float()
        D = fam.D[N] if exact else nm.to_float(fam.D[N])
        Dm = fam.D[N - 1] if exact else nm.to_float(fam.D[N - 1])
        C = nm.solve(Dm.T, D.T).T * 2
        out = out - (C @ _subst(Mm, N + 1))
    return out


def psi_hat(fam: MatOPFamily, N: int) -> MatrixPoly:
    """``Ψ̂_N(z) = z^N (P_N(x) − 2z A_Nᵗ P_{N−1}(x))`` with ``x = (z + 1/z)/2``."""
    out = _subst(fam.P[N], N)
    if N >= 1:
        out = out - ((2 * (fam.A[N].T if fam.exact else nm.to_float(fam.A[N]).T)) @ _subst(fam.P[N - 1], N + 1))
    return out if out.exact else _trim_float(out)


def _trim_float(P: MatrixPoly, rel=1e-12):
    """Drop trailing coefficient blocks at rounding level."""
    c = P.coeffs
    big = nm.max_abs(c)
    n = c.shape[0]
    while n > 1 and nm.max_abs(c[n - 1]) <= rel * big:
        n -= 1
    return MatrixPoly(c[:n], False, P.var)


def psi_degree_report(fam: MatOPFamily, N: int, cfg=nm.DEFAULT):
    """Degree of ``Ψ̂_N`` with the expected value from ``A_N`` and ``B_{N−1}``."""
    Psi = psi_hat(fam, N)
    l = Psi.size
    half = np.eye(l) / 2
    tol = 1e2 * cfg.rel_tol
    a_flat = nm.max_abs(nm.to_float(fam.A[N]) - half) <= tol
    b_zero = nm.max_abs(nm.to_float(fam.B[N - 1])) <= tol
    deg = Psi.deg
    if not Psi.exact:
        while deg > 0 and nm.max_abs(Psi.coeffs[deg]) <= tol * max(1.0, Psi.norm_inf()):
            deg -= 1
    expected = 2 * N if not a_flat else (2 * N - 1 if not b_zero else None)
    return {"degree": deg, "expected": expected, "A_flat": a_flat, "B_zero": b_zero}


def det_psi_at_zero(fam: MatOPFamily, N: int):
    """``det Ψ̂_N(0) = 2^{−Nl} / √det D_N``; exact when ``det D_N`` is a square."""
    l = fam.P[0].size
    dD = nm.det(fam.D[N]) if nm.is_exact(fam.D[N]) else nm.det(nm.to_float(fam.D[N]))
    if isinstance(dD, Fraction):
        r = nm.fraction_sqrt(dD)
        if r is not None:
            return Fraction(1, 2 ** (N * l)) / r
    return 1.0 / (2 ** (N * l) * np.sqrt(float(dD)))


def w_from_psi(Psi: MatrixPoly, tol=1e-9) -> MatrixPoly:
    """``W(x) = Ψ(1/z)ᵗ Ψ(z)`` as a matrix polynomial in ``x``."""
    l = Psi.size
    d = Psi.deg
    exact = Psi.exact
    ents = []
    for i in range(l):
        row = []
        for j in range(l):
            acc = LaurentPoly([0], 0, exact)
            for k in range(l):
                a = LaurentPoly(Psi.coeffs[:, k, i].copy(), 0, exact).invert()
                b = LaurentPoly(Psi.coeffs[:, k, j].copy(), 0, exact)
                acc = acc + a * b
            if not exact:
                c = np.array([acc.coef(e) for e in range(-d, d + 1)])
                if nm.max_abs(c - c[::-1]) > tol * max(1.0, nm.max_abs(c)):
                    raise ArithmeticError("Ψ(1/z)ᵗΨ(z) is not a function of x")
                acc = LaurentPoly((c + c[::-1]) / 2, -d, False)
            row.append(laurent_to_x(acc, tol=tol))
        ents.append(row)
    return MatrixPoly.from_entries(ents, var="x")


def w_from_family(fam: MatOPFamily, N: int) -> MatrixPoly:
    """``W_N`` from monic data: ``Ψ̂_mon(1/z)ᵗ D_N^{-1} Ψ̂_mon(z)`` expanded in x."""
    mon = psi_hat_monic(fam, N)
    exact = mon.exact
    D = fam.D[N] if exact else nm.to_float(fam.D[N])
    l = mon.size
    Dinv = nm.inv(D)
    # W = (Ψ̂_mon(1/z))ᵗ Dinv Ψ̂_mon(z)
    ents = []
    for i in range(l):
        row = []
        for j in range(l):
            acc = LaurentPoly([0], 0, exact)
            for a in range(l):
                for b in range(l):
                    if Dinv[a, b] == 0:
                        continue
                    u = LaurentPoly(mon.coeffs[:, a, i].copy(), 0, exact).invert()
                    v = LaurentPoly(mon.coeffs[:, b, j].copy(), 0, exact)
                    acc = acc + (u * v) * Dinv[a, b]
            row.append(laurent_to_x(acc))
        ents.append(row)
    return MatrixPoly.from_entries(ents, var="x")


# ---------------------------------------------------------------------------

@dataclass
class PsiZero:
    z0: object
    kernel: np.ndarray        # orthonormal columns
    multiplicity: int


def _left_right_kernels(M, cfg, dim=None):
    K = nm.nullspace(M, cfg, expected=dim)
    Kl = nm.nullspace(np.asarray(M).T, cfg, expected=K.shape[1])
    return K, Kl


def psi_zero_analysis(Psi: MatrixPoly, cfg=nm.DEFAULT, cluster_tol=1e-5):
    """Zeros of ``det Ψ̂`` in the closed unit disk with kernels and simplicity check."""
    det = Psi.det_poly()
    if det.is_zero():
        raise ValueError("det is identically zero")
    if det.deg < 1:
        return []
    rts = det.to_float().roots(cfg)
    inside = [r for r in rts if abs(r) <= 1 + 1e-7]
    out = []
    for z0, mult in nm.cluster_values(inside, cluster_tol):
        if abs(z0.imag) > 1e-6 or abs(z0) < 1e-12:
            raise ZeroOffRealInterval(f"zero {z0} of det is not in [-1,0) U (0,1]")
        z0 = float(z0.real)
        if abs(z0) > 1:
            z0 = float(np.sign(z0))
        M = nm.to_float(Psi(z0))
        K, Kl = _left_right_kernels(M, cfg.__class__(rel_tol=max(cfg.rel_tol, 1e-7)), None)
        if K.shape[1] == 0:
            raise NonSimpleZero(f"det vanishes at {z0} but the kernel is empty")
        dP = nm.to_float(Psi.deriv()(z0))
        G = Kl.T @ dP @ K
        s = np.linalg.svd(G, compute_uv=False)
        if s[-1] <= 1e-8 * max(1.0, np.linalg.norm(dP)) or K.shape[1] != mult:
            raise NonSimpleZero(f"zero at {z0} is not simple")
        out.append(PsiZero(z0, K, mult))
    return out


def laurent_residue(Psi: MatrixPoly, z0, kernel=None, cfg=nm.DEFAULT):
    """``M_{−1}`` of ``Ψ^{-1}`` at a simple zero: ``K (K_lᵗ Ψ′ K)^{-1} K_lᵗ``."""
    M = nm.to_float(Psi(z0))
    dim = None if kernel is None else kernel.shape[1]
    K, Kl = _left_right_kernels(M, cfg.__class__(rel_tol=max(cfg.rel_tol, 1e-7)), dim)
    dP = nm.to_float(Psi.deriv()(z0))
    G = Kl.T @ dP @ K
    return K @ np.linalg.solve(G, Kl.T)


@dataclass
class CanonicalMass:
    z0: float
    x0: float
    E0: np.ndarray
    rho: np.ndarray
    residual: float


def canonical_weight(Psi: MatrixPoly, z0, kernel, cfg=nm.DEFAULT) -> CanonicalMass:
    """Canonical weight at a simple zero ``z0 ∈ (−1,0) ∪ (0,1)`` of ``Ψ̂``."""
    z0 = float(z0)
    if not (0 < abs(z0) < 1):
        raise NotASimpleZero("zero must lie in (-1, 0) U (0, 1)")
    M = nm.to_float(Psi(z0))
    l = Psi.size
    if kernel is None or kernel.shape[1] == 0 or nm.max_abs(M @ kernel) > 1e-6 * max(1.0, nm.max_abs(M)):
        raise NotASimpleZero(f"{z0} is not a zero of the matrix polynomial")
    K = np.linalg.qr(kernel)[0]
    E0 = K @ K.T
    x0 = (z0 + 1 / z0) / 2
    W = w_from_psi(Psi.to_float())
    dW = nm.to_float(W.deriv()(x0))
    L0 = E0 @ dW @ E0 / (2 * (z0 - 1 / z0)) + (np.eye(l) - E0)
    rho = E0 @ np.linalg.inv(L0)
    rho = (rho + rho.T) / 2
    try:
        Mres = laurent_residue(Psi, z0, K, cfg)
    except np.linalg.LinAlgError as e:
        raise NotASimpleZero(str(e)) from e
    lhs = nm.to_float(Psi(1 / z0)) @ rho / (z0 - 1 / z0)
    rhs = (z0 - 1 / z0) / z0 * Mres.T
    res = nm.max_abs(lhs - rhs) / max(1.0, nm.max_abs(rhs))
    return CanonicalMass(z0, x0, E0, rho, res)


def _w_batch(W: MatrixPoly, xs):
    c = nm.to_float(W.coeffs)
    out = np.zeros((len(xs),) + c.shape[1:])
    for k in range(c.shape[0] - 1, -1, -1):
        out = out * xs[:, None, None] + c[k]
    return out


def functional_from_psi(Psi: MatrixPoly, masses=(), cfg=nm.DEFAULT, check_tol=1e-7) -> MatFunctional:
    """Matrix functional ``(2/π)∫ f √(1−x²) W^{-1} dx + Σ f(x_j) ρ_j`` with ``W = Ψ(1/z)ᵗΨ(z)``.

    Moments are generated lazily by Gauss-Chebyshev node doubling; ``W^{-1}``
    is applied pointwise through linear solves.
    """
    for mss in masses:
        if mss.residual > check_tol:
            raise InconsistentMasses(f"mass at x0 = {mss.x0} fails the residue identity "
                                     f"(residual {mss.residual:.3g})")
    W = w_from_psi(Psi.to_float())
    l = Psi.size
    eye = np.eye(l)

    def gen(jmax):
        def f(xs):
            Wx = _w_batch(W, xs)
            Winv = np.linalg.solve(Wx, np.broadcast_to(eye, Wx.shape))
            pw = xs[:, None] ** np.arange(jmax + 1)[None, :]
            return pw[:, :, None, None] * Winv[:, None, :, :]
        res = nm.integrate_adaptive(f, 1, cfg, start=32)
        S = [0.5 * (res.value[j] + res.value[j].T) for j in range(jmax + 1)]
        for mss in masses:
            for j in range(jmax + 1):
                S[j] = S[j] + mss.x0 ** j * mss.rho
        return S

    return MatFunctional(l, gen(2), gen)


# ---------------------------------------------------------------------------

def _circle_symbol(W: MatrixPoly):
    """Fourier blocks ``T_k`` (k = 0..d) of ``θ ↦ W(cos θ)``."""
    l = W.size
    d = W.deg
    T = np.zeros((d + 1, l, l))
    Wf = W.to_float()
    for i in range(l):
        for j in range(l):
            L = cheb_substitute(Wf.entry(i, j))
            for k in range(d + 1):
                T[k, i, j] = L.coef(k)
    return T


def _bauer_factor(T, nT):
    d, l = T.shape[0] - 1, T.shape[1]
    n = nT
    big = np.zeros((n * l, n * l))
    for i in range(n):
        for j in range(max(0, i - d), min(n, i + d + 1)):
            k = j - i
            blk = T[k] if k >= 0 else T[-k].T
            big[i * l:(i + 1) * l, j * l:(j + 1) * l] = blk
    Lc = scipy.linalg.cholesky(big, lower=True)
    last = Lc[(n - 1) * l:, :]
    psi = np.zeros((d + 1, l, l))
    for s in range(d + 1):
        col = n - 1 - s
        psi[s] = last[:, col * l:(col + 1) * l].T
    return psi


def _normalize_lower(psi):
    R, Q = scipy.linalg.rq(psi[0].T)
    U = Q
    low = U @ psi[0]
    sgn = np.sign(np.diag(low))
    sgn[sgn == 0] = 1
    U = np.diag(sgn) @ U
    return np.array([U @ p for p in psi])


def matrix_fejer_riesz(W: MatrixPoly, cfg=nm.DEFAULT, nT_cap=4096) -> MatrixPoly:
    """``Ψ`` with ``W(x) = Ψ(1/z)ᵗ Ψ(z)``, Ψ invertible on the disk, ``Ψ(0)`` lower-triangular.

    Bauer's method: Cholesky factorization of growing block-Toeplitz sections
    of the circle symbol; the last block row converges to the factor.
    """
    Wf = W.to_float()
    xs = np.cos(np.pi * (np.arange(500) + 0.5) / 500)
    Wx = _w_batch(Wf, xs)
    if np.any(np.abs(Wx - np.transpose(Wx, (0, 2, 1))) > 1e-9 * max(1.0, nm.max_abs(Wx))):
        raise ValueError("W is not symmetric")
    if np.any(np.linalg.eigvalsh(Wx)[:, 0] <= 0):
        raise NotPositiveOnGrid("W(x) is not positive definite on (-1, 1)")
    T = _circle_symbol(Wf)
    d = W.deg
    nT = 8 * (d + 1)
    prev = None
    err = np.inf
    while nT <= nT_cap:
        try:
            psi = _normalize_lower(_bauer_factor(T, nT))
        except np.linalg.LinAlgError as e:
            raise NotPositiveOnGrid("block Toeplitz section not positive definite") from e
        if prev is not None:
            err = nm.max_abs(psi - prev)
            if err <= cfg.rel_tol * max(1.0, nm.max_abs(psi)):
                return MatrixPoly(psi, False, "z")
        prev = psi
        nT *= 2
    raise NoConvergence("Bauer iteration did not settle", err)


# ---------------------------------------------------------------------------

@dataclass
class FlatExtensionReport:
    invertible_on_interval: bool
    W: Optional[MatrixPoly]
    zeros_in_interval: int
    moment_residual: Optional[float] = None
    certified: Optional[bool] = None


def check_flat_extension(F: MatFunctional, N: int, cfg=nm.DEFAULT, certify=True) -> FlatExtensionReport:
    """Invertibility of ``Ψ̂_N`` on (−1, 1) and, if so, the weight ``W_N``."""
    fam = matrix_gram_schmidt(F, N, cfg)
    mon = psi_hat_monic(fam, N)
    det = mon.det_poly()
    count = nm.count_roots_in_interval(det.c, -1, 1, cfg)
    if count:
        return FlatExtensionReport(False, None, count)
    W = w_from_family(fam, N)
    rep = FlatExtensionReport(True, W, 0)
    if certify:
        Psi = psi_hat(fam, N)
        G = functional_from_psi(Psi.to_float(), (), cfg)
        G.ensure(2 * N)
        scale = max(nm.max_abs(nm.to_float(s)) for s in F.S[:2 * N + 1])
        res = max(nm.max_abs(nm.to_float(F.S[j]) - G.S[j]) for j in range(2 * N + 1)) / scale
        rep.moment_residual = res
        rep.certified = res <= max(1e3 * cfg.rel_tol, 1e-8)
    return rep


def random_weight(l, deg, rng, margin=0.5):
    """Random symmetric ``W(x)`` of degree ``deg``, positive definite on [−1, 1]."""
    A = []
    for _ in range(deg + 1):
        G = rng.normal(size=(l, l))
        A.append((G + G.T) / 2)
    tail = sum(np.linalg.norm(a, 2) for a in A[1:])
    lam = np.linalg.eigvalsh(A[0])[0]
    A[0] = A[0] + (tail - lam + margin) * np.eye(l)
    return MatrixPoly(np.array(A), False, "x")


def random_stable_psi(l, deg, rng, margin=0.5):
    """Outer factor of a :func:`random_weight`; ``Ψ(0)`` lower-triangular positive."""
    return matrix_fejer_riesz(random_weight(l, deg, rng, margin))
