from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bszego import bs1d, corpus, matop
from bszego import numerics as nm
from bszego.errors import NotASimpleZero, NotPositive, NotPositiveOnGrid, ZeroOffRealInterval
from bszego.poly import MatrixPoly, RealPoly, chebU

from helpers import diag_psi, flat_dev, psi_at, random_diag_psi, table_functional


def cheb_functional(N, exact=True):
    h = [bs1d.moments_from_q(RealPoly([1], exact, "w"), 2 * N)]
    return matop.MatFunctional(1, [np.array([[v]], dtype=object if exact else float) for v in h[0]])


def test_gram_schmidt_chebyshev():
    fam = matop.matrix_gram_schmidt(cheb_functional(4), 4)
    assert fam.exact
    for n in range(5):
        assert list(fam.P[n].coeffs[:, 0, 0]) == list(chebU(n).c)
    assert all(a[0, 0] == F(1, 2) for a in fam.A[1:])
    assert all(b[0, 0] == 0 for b in fam.B)


def test_gram_schmidt_example_tables():
    fam = matop.matrix_gram_schmidt(table_functional(corpus.bs_example_table(0.3, 0.5), 1), 2)
    assert nm.max_abs(nm.to_float(fam.A[2]) - np.eye(2) / 2) < 1e-10
    fam = matop.matrix_gram_schmidt(table_functional(corpus.one_sided_example_table(0, 0), 1), 1)
    assert nm.max_abs(nm.to_float(fam.A[1]) - np.diag([np.sqrt(15) / 8, 3 * np.sqrt(5) / 14])) < 1e-12


def test_gram_schmidt_rejects_indefinite():
    S = [np.array([[1.0]]), np.array([[0.0]]), np.array([[-1.0]])]
    with pytest.raises(NotPositive):
        matop.matrix_gram_schmidt(matop.MatFunctional(1, S), 1)


def test_family_invariants():
    Fn = table_functional(corpus.bs_example_table(0.3, 0.5), 1)
    fam = matop.matrix_gram_schmidt(Fn, 2)
    for n in range(3):
        lead = nm.to_float(fam.P[n].coeffs[n])
        assert np.allclose(np.triu(lead, 1), 0) and np.all(np.diag(lead) > 0)
        for m in range(3):
            G = nm.to_float(matop.inner(Fn, fam.P[n], fam.P[m]))
            assert nm.max_abs(G - (np.eye(2) if n == m else 0)) < 1e-10
        assert nm.max_abs(nm.to_float(fam.B[min(n, 1)]) - nm.to_float(fam.B[min(n, 1)]).T) < 1e-12
    for a in fam.A[1:]:
        a = nm.to_float(a)
        assert np.allclose(np.triu(a, 1), 0) and np.all(np.diag(a) > 0)
    for x in np.linspace(-1.5, 1.5, 7):
        assert matop.recurrence_residual(fam, x) < 1e-10


def test_psi_hat_examples():
    fam = matop.matrix_gram_schmidt(cheb_functional(2), 2)
    P = matop.psi_hat(fam, 2)
    assert P.deg == 0 and P.coeffs[0, 0, 0] == 1
    c1, c2 = 0.3, 0.5
    fam = matop.matrix_gram_schmidt(table_functional(corpus.bs_example_table(c1, c2), 1), 2)
    det = matop.psi_hat(fam, 2).det_poly().to_float()
    ref = RealPoly([1, -2 * c2, c2 * c2], False) * (2 / np.sqrt(1 - c1 * c1))
    assert nm.max_abs(det.c[:3] - ref.c) < 1e-9 and nm.max_abs(det.c[3:]) < 1e-12
    rep = matop.psi_degree_report(fam, 2)
    assert rep["A_flat"] and not rep["B_zero"] and rep["degree"] == rep["expected"] == 3
    fam = matop.matrix_gram_schmidt(table_functional(corpus.one_sided_example_table(F(1, 10), F(1, 5)), 1), 1)
    assert matop.det_psi_at_zero(fam, 1) == F(28, 15)
    rep = matop.psi_degree_report(fam, 1)
    assert rep["degree"] == rep["expected"] == 2


def test_psi_zero_analysis():
    assert matop.psi_zero_analysis(MatrixPoly(np.eye(2)[None], False)) == []
    c1, c2 = 0.5, 3.0
    fam = matop.matrix_gram_schmidt(table_functional(corpus.bs_example_table(c1, c2), 1), 2)
    P = matop.psi_hat(fam, 2)
    zs = matop.psi_zero_analysis(P)
    assert len(zs) == 1
    # the double zero of det comes from Ψ̂(1/3) = 0: kernel dimension equals multiplicity
    assert abs(zs[0].z0 - 1 / 3) < 1e-7 and zs[0].kernel.shape == (2, 2) and zs[0].multiplicity == 2
    assert nm.max_abs(nm.to_float(P(1 / 3))) < 1e-9
    det = P.det_poly().to_float()
    assert abs(det(1 / 3)) < 1e-12 and abs(det.deriv()(1 / 3)) < 1e-9
    fam = matop.matrix_gram_schmidt(table_functional(corpus.one_sided_example_table(0.1, 0.2), 1), 1)
    assert matop.psi_zero_analysis(matop.psi_hat(fam, 1)) == []
    with pytest.raises(ZeroOffRealInterval):
        matop.psi_zero_analysis(MatrixPoly(np.array([[[1.0]], [[0.0]], [[4.0]]]), False))


def test_canonical_weight_scalar():
    c2 = 3.0
    P = MatrixPoly(np.array([[[1.0]], [[-c2]]]), False)
    (z,) = matop.psi_zero_analysis(P)
    m = matop.canonical_weight(P, z.z0, z.kernel)
    assert abs(m.x0 - (c2 + 1 / c2) / 2) < 1e-12
    assert abs(m.rho[0, 0] - (c2 * c2 - 1) / (c2 * c2)) < 1e-10
    assert m.residual < 1e-9
    G = matop.functional_from_psi(P, [m])
    fam = matop.matrix_gram_schmidt(G, 5)
    a, b = flat_dev(fam, 1, 4)
    assert a < 1e-9 and b < 1e-9
    with pytest.raises(NotASimpleZero):
        matop.canonical_weight(MatrixPoly(np.eye(1)[None], False), 0.5, np.ones((1, 1)))


def test_canonical_weight_point_and_line_parts():
    c1, c2 = 0.5, 3.0
    Fn = table_functional(corpus.bs_example_table(c1, c2), 1)
    fam = matop.matrix_gram_schmidt(Fn, 2)
    P = matop.psi_hat(fam, 2)
    (z,) = matop.psi_zero_analysis(P)
    m = matop.canonical_weight(P, z.z0, z.kernel)
    x0 = (c2 + 1 / c2) / 2
    t = c1 * c2
    y0 = (t + 1 / t) / 2
    assert abs(m.x0 - 5 / 3) < 1e-9 and abs(y0 - 13 / 12) < 1e-15
    # along the line x = x0 the mass splits into a continuous y-part and a point 5/9 at y0
    pline = RealPoly([1.0, -2 * c1 * x0, c1 * c1], False, "w") * (1 / np.sqrt(1 - c1 * c1))
    nu = np.asarray(bs1d.moments_from_q(bs1d.stabilize(pline), 2), float)
    rho = (c2 * c2 - 1) / (c2 * c2) * np.array([[nu[0], nu[1]], [nu[1], nu[2]]]) \
        + (t * t - 1) / (t * t) * np.array([[1, y0], [y0, y0 * y0]])
    assert abs((t * t - 1) / (t * t) - 5 / 9) < 1e-15
    assert nm.max_abs(m.rho - rho) < 1e-9
    G = matop.functional_from_psi(P, [m])
    G.ensure(4)
    assert max(nm.max_abs(G.S[j] - nm.to_float(Fn.S[j])) for j in range(5)) < 1e-9


def test_functional_from_psi_examples():
    G = matop.functional_from_psi(MatrixPoly(np.eye(2)[None], False))
    G.ensure(2)
    assert nm.max_abs(G.S[0] - np.eye(2)) < 1e-14 and nm.max_abs(G.S[1]) < 1e-14
    assert nm.max_abs(G.S[2] - np.eye(2) / 4) < 1e-14
    c1, c2 = 0.3, 0.5
    h = corpus.bs_example_table(c1, c2)
    fam = matop.matrix_gram_schmidt(table_functional(h, 1), 2)
    G = matop.functional_from_psi(matop.psi_hat(fam, 2))
    G.ensure(2)
    assert abs(G.S[0][0, 0] - 1) < 1e-10
    assert abs(G.S[1][0, 0] - 0.25) < 1e-10 and abs(G.S[2][0, 0] - 0.3125) < 1e-10


def test_functional_from_psi_with_mass_matches_direct_sum():
    """Two-by-two Ψ with one simple zero: moments against quadrature plus the mass."""
    th = 0.7
    V = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    P = diag_psi([[1.0, -2.5], [1.2, -0.4]], V)
    (z,) = matop.psi_zero_analysis(P)
    assert abs(z.z0 - 0.4) < 1e-9 and z.kernel.shape == (2, 1)
    m = matop.canonical_weight(P, z.z0, z.kernel)
    G = matop.functional_from_psi(P, [m])
    G.ensure(6)
    W = matop.w_from_psi(P)
    for j in range(7):
        def f(xs, j=j):
            Wx = np.array([nm.to_float(W(x)) for x in xs])
            return xs[:, None, None] ** j * np.linalg.inv(Wx)
        ref = nm.integrate_adaptive(f, cfg=nm.ToleranceConfig(rel_tol=1e-12), start=64).value
        ref = ref + m.x0 ** j * m.rho
        assert nm.max_abs(G.S[j] - ref) < 1e-10
    fam = matop.matrix_gram_schmidt(G, 4)
    a, b = flat_dev(fam, 1, 3)
    assert a < 1e-8 and b < 1e-8


def test_flat_recurrence_from_random_psi():
    rng = np.random.default_rng(2024)
    for k in range(4):
        # two independent sources of stable factors
        P = random_diag_psi(2, 4, rng) if k % 2 else matop.random_stable_psi(2, 4, rng)
        G = matop.functional_from_psi(P)
        fam = matop.matrix_gram_schmidt(G, 6)
        a, b = flat_dev(fam, 2, 5)
        assert a + b < 1e-8


def test_matrix_fejer_riesz_examples():
    R = matop.matrix_fejer_riesz(MatrixPoly(np.eye(2)[None], False, "x"))
    assert nm.max_abs(R.coeffs[0] - np.eye(2)) < 1e-12 and R.deg == 0
    R = matop.matrix_fejer_riesz(MatrixPoly(np.array([[[1.25]], [[-1.0]]]), False, "x"))
    assert nm.max_abs(R.coeffs[:, 0, 0] - [1.0, -0.5]) < 1e-9
    with pytest.raises(NotPositiveOnGrid):
        matop.matrix_fejer_riesz(MatrixPoly(np.array([[[0.5]], [[-1.0]]]), False, "x"))


@given(st.integers(0, 2 ** 32 - 1))
def test_matrix_fejer_riesz_roundtrip(seed):
    P = random_diag_psi(2, 3, np.random.default_rng(seed))
    R = matop.matrix_fejer_riesz(matop.w_from_psi(P))
    assert nm.max_abs(R.coeffs - P.coeffs) < 1e-8 * max(1.0, nm.max_abs(P.coeffs))
    assert np.all(np.abs(R.det_poly().roots()) >= 1 - 1e-8)


def test_check_flat_extension():
    rep = matop.check_flat_extension(cheb_functional(2, exact=True), 2)
    assert rep.invertible_on_interval and rep.certified
    assert nm.max_abs(nm.to_float(rep.W.coeffs) - np.eye(1)[None]) < 1e-12
    for c in ((0.1, 0.2), (F(1, 2), F(1, 5)), (3, -2)):
        rep = matop.check_flat_extension(table_functional(corpus.one_sided_example_table(*c), 1), 1)
        assert rep.invertible_on_interval and rep.certified
    rep = matop.check_flat_extension(table_functional(corpus.bs_example_table(F(3, 10), F(2)), 1), 2)
    assert not rep.invertible_on_interval and rep.W is None


def _rand_points(seed, n=20):
    return np.random.default_rng(seed).uniform(-1.5, 1.5, n)


def test_identity_derivative_sum():
    """P_{n−1}ᵗA_nP_n′ − P_nᵗA_nᵗP_{n−1}′ = Σ_{j<n} P_jᵗP_j."""
    fam = matop.matrix_gram_schmidt(table_functional(corpus.bs_example_table(0.3, 0.5), 1), 2)
    P = [p.to_float() for p in fam.P]
    dP = [p.deriv() for p in P]
    A = [None] + [nm.to_float(a) for a in fam.A[1:]]
    for x in _rand_points(1):
        for n in (1, 2):
            ev = lambda q: nm.to_float(q(x))  # noqa: E731
            lhs = ev(P[n - 1]).T @ A[n] @ ev(dP[n]) - ev(P[n]).T @ A[n].T @ ev(dP[n - 1])
            rhs = sum(ev(P[j]).T @ ev(P[j]) for j in range(n))
            assert nm.max_abs(lhs - rhs) < 1e-9 * max(1.0, nm.max_abs(rhs))


def test_identity_psi_symmetry():
    """Ψ_n(z)ᵗΨ_n(1/z) = Ψ_n(1/z)ᵗΨ_n(z) on the circle."""
    fam = matop.matrix_gram_schmidt(table_functional(corpus.one_sided_example_table(0.5, 0.2), 1), 1)
    fam2 = matop.matrix_gram_schmidt(table_functional(corpus.bs_example_table(0.3, 0.5), 1), 2)
    for th in np.random.default_rng(7).uniform(0, 2 * np.pi, 20):
        z = np.exp(1j * th)
        for f, n in ((fam, 1), (fam2, 1), (fam2, 2)):
            a, b = psi_at(f, n, z), psi_at(f, n, 1 / z)
            assert nm.max_abs(a.T @ b - b.T @ a) < 1e-10


@given(st.integers(0, 2 ** 32 - 1))
def test_matrix_fejer_riesz_factorizes_random_weight(seed):
    W = matop.random_weight(2, 3, np.random.default_rng(seed))
    R = matop.matrix_fejer_riesz(W)
    assert nm.max_abs(matop.w_from_psi(R).coeffs - W.coeffs) < 1e-8 * nm.max_abs(W.coeffs)
    c0 = R.coeffs[0]
    assert abs(c0[0, 1]) < 1e-12 and np.all(np.diag(c0) > 0)
    assert np.all(np.abs(R.det_poly().roots()) >= 1 - 1e-8)
