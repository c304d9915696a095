"""Independent constructions shared by the test modules."""
import numpy as np

from bszego import bs2d
from bszego import numerics as nm
from bszego.poly import MatrixPoly


def _ql(M):
    """``M = O L`` with O orthogonal and L lower-triangular, positive diagonal."""
    J = np.eye(M.shape[0])[::-1]
    Q, R = np.linalg.qr(J @ M @ J)
    O, L = J @ Q @ J, J @ R @ J
    s = np.sign(np.diag(L))
    return O * s, s[:, None] * L


def diag_psi(qs, V):
    """Normalized outer factor of ``Vᵗ diag(|q_i|²) V`` for scalar stable ``q_i``.

    ``Ψ(z) = O diag(q_i(z)) V`` has ``Ψ(1/z)ᵗΨ(z) = Vᵗ diag(q_i(1/z) q_i(z)) V``,
    which is symmetric and invariant under z ↦ 1/z; the constant orthogonal
    ``O`` makes ``Ψ(0)`` lower-triangular with positive diagonal.
    """
    l = len(qs)
    d = max(len(q) for q in qs) - 1
    c = np.zeros((d + 1, l, l))
    for i, q in enumerate(qs):
        c[:len(q), i, i] = q
    c = np.einsum("kij,jl->kil", c, V)
    O, _ = _ql(c[0])
    return MatrixPoly(np.einsum("ij,kjl->kil", O.T, c), False, "z")


def random_diag_psi(l, deg, rng):
    """Random :func:`diag_psi` with zeros of each ``q_i`` outside the closed disk."""
    qs = []
    for _ in range(l):
        roots = []
        while len(roots) < deg:
            r = rng.uniform(1.3, 3.0)
            if deg - len(roots) >= 2 and rng.random() < 0.5:
                t = rng.uniform(0.3, 2.8)
                roots += [r * np.exp(1j * t), r * np.exp(-1j * t)]
            else:
                roots.append(r * rng.choice([-1, 1]))
        qs.append(np.real(np.poly(roots))[::-1] * rng.uniform(0.5, 2.0))
    V, _ = np.linalg.qr(rng.normal(size=(l, l)))
    return diag_psi(qs, V)


def table_functional(h, m):
    """Matrix functional of a moment table in the standard y-basis."""
    return bs2d.functional_to_matrix(bs2d.MomentTable(nm.coerce(h) if not isinstance(h, np.ndarray) else h), m)


def psi_at(fam, n, z):
    """``Ψ_n(z) = P_n(x) − 2z A_nᵗ P_{n−1}(x)`` evaluated pointwise."""
    x = (z + 1 / z) / 2
    P = [np.asarray(nm.to_float(p.coeffs), dtype=complex) for p in fam.P]
    ev = lambda c: sum(c[k] * x ** k for k in range(c.shape[0]))  # noqa: E731
    return ev(P[n]) - 2 * z * nm.to_float(fam.A[n]).T @ ev(P[n - 1])


def flat_dev(fam, lo, hi):
    l = fam.P[0].size
    a = max(nm.max_abs(nm.to_float(fam.A[n + 1]) - np.eye(l) / 2) for n in range(lo, hi + 1))
    b = max(nm.max_abs(nm.to_float(fam.B[n])) for n in range(lo, hi + 1))
    return a, b


__all__ = ["diag_psi", "random_diag_psi", "table_functional", "psi_at", "flat_dev"]
