"""End-to-end acceptance checks; each prints one PASS/FAIL line."""
import subprocess
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest

from bszego import bs1d, bs2d, matop, regression
from bszego import numerics as nm
from bszego.poly import BivarPoly, RealPoly, resultant, reverse

from helpers import flat_dev, random_diag_psi

TESTS = Path(__file__).parent


@pytest.fixture
def verdict(capsys):
    def emit(k, ok, seconds, limit, detail=""):
        ok = bool(ok) and seconds < limit
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail} ({seconds:.2f} s, limit {limit} s)")
        assert ok, detail
    return emit


def _rational_stable(rng, deg):
    tail = [F(int(a), int(b)) for a, b in zip(rng.integers(-9, 10, deg), rng.integers(1, 10, deg))]
    if tail[-1] == 0:
        tail[-1] = F(1, 7)
    slack = F(int(rng.integers(1, 17)), 8)
    return RealPoly([sum(abs(t) for t in tail) + slack] + tail, True, "w")


def _float_stable(rng, deg):
    roots = []
    while len(roots) < deg:
        r = rng.uniform(1.2, 3.0)
        if deg - len(roots) >= 2 and rng.random() < 0.6:
            t = rng.uniform(0.2, np.pi - 0.2)
            roots += [r * np.exp(1j * t), r * np.exp(-1j * t)]
        else:
            roots.append(r * rng.choice([-1, 1]))
    return RealPoly(np.real(np.poly(roots))[::-1] * rng.uniform(0.5, 2.0), False, "w")


def _delta4(q0, q1, q2, q3, q4):
    return (q0 ** 3 - q0 ** 2 * q2 + q0 * q1 * q3 - q0 * q3 ** 2 - q0 ** 2 * q4 - q1 ** 2 * q4
            + 2 * q0 * q2 * q4 + q1 * q3 * q4 - q0 * q4 ** 2 - q2 * q4 ** 2 + q4 ** 3)


def _fixtures(names):
    vs = regression.run_all(names=names)
    assert sorted(v.name for v in vs) == sorted(names)
    return vs, "; ".join(f"{v.name} {v.residual:.1e}/{v.tol:.0e}" for v in vs)


def test_criterion_01_moments_closed_forms(verdict):
    t = time.perf_counter()
    ok = list(bs1d.moments_from_q(RealPoly([F(2), F(0), F(1)], True, "w"), 2)) == [F(1, 2), 0, F(1, 16)]
    rng = np.random.default_rng(101)
    for _ in range(20):
        c = [F(int(a), int(b)) for a, b in zip(rng.integers(-5, 6, 4), rng.integers(1, 8, 4))]
        if c[3] == 0:
            c[3] = F(1, 3)
        q0 = sum(abs(v) for v in c) + F(int(rng.integers(1, 5)), 3)
        q1, q2, q3, q4 = c
        D = _delta4(q0, *c)
        h = bs1d.moments_from_q(RealPoly([q0] + c, True, "w"), 2)
        ok &= bool(h[0] == (q0 - q4) / D and h[1] == (q3 - q1) / (2 * D)
                   and h[2] == (q0 ** 2 + q1 ** 2 - q0 * q2 - q1 * q3 + q2 * q4 - q4 ** 2) / (4 * q0 * D))
    verdict(1, ok, time.perf_counter() - t, 1, "quadratic and quartic moments, exact")


def test_criterion_02_hankel_roundtrip(verdict):
    t = time.perf_counter()
    rng = np.random.default_rng(202)
    bad = 0
    for _ in range(100):
        q = _rational_stable(rng, int(rng.integers(1, 7)))
        k = (q.deg + 1) // 2
        H = bs1d.hankel(bs1d.moments_from_q(q, 2 * k), k)
        bad += bs1d.recover_q_from_hankel(H).q != q
    verdict(2, bad == 0, time.perf_counter() - t, 10, f"{100 - bad}/100 exact recoveries")


def test_criterion_03_resultant_identity(verdict):
    t = time.perf_counter()
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(50):
        q = _float_stable(rng, int(rng.integers(2, 7)))
        lhs = resultant(q, reverse(q, q.deg))
        rhs = (-1) ** q.deg * q(1.0) * q(-1.0) * bs1d.delta_m(q) ** 2
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    verdict(3, worst < 1e-9, time.perf_counter() - t, 5, f"max relative residual {worst:.1e}")


def test_criterion_04_matrix_flatness(verdict):
    t = time.perf_counter()
    rng = np.random.default_rng(404)
    worst = 0.0
    for k in range(6):
        # two independent constructions of a stable factor of degree 4 (N = 2)
        P = random_diag_psi(2, 4, rng) if k % 2 else matop.random_stable_psi(2, 4, rng)
        fam = matop.matrix_gram_schmidt(matop.functional_from_psi(P), 6)
        a, b = flat_dev(fam, 2, 5)
        worst = max(worst, a + b)
    verdict(4, worst < 1e-8, time.perf_counter() - t, 30, f"max ‖A−I/2‖ + ‖B‖ = {worst:.1e}")


def test_criterion_05_matrix_fejer_riesz(verdict):
    t = time.perf_counter()
    rng = np.random.default_rng(505)
    worst = 0.0
    for _ in range(20):
        P = random_diag_psi(2, 3, rng)
        R = matop.matrix_fejer_riesz(matop.w_from_psi(P))
        worst = max(worst, nm.max_abs(R.coeffs - P.coeffs) / max(1.0, nm.max_abs(P.coeffs)))
    verdict(5, worst < 1e-8, time.perf_counter() - t, 30, f"max coefficient error {worst:.1e}")


def test_criterion_06_example1(verdict):
    t = time.perf_counter()
    vs, detail = _fixtures(["bs.vector_polys", "bs.q_p", "bs.det_psi"])
    verdict(6, all(v.passed for v in vs), time.perf_counter() - t, 5, detail)


def test_criterion_07_example2(verdict):
    t = time.perf_counter()
    vs, detail = _fixtures(["os.reconstruction", "os.certificate_a", "os.det_psi"])
    verdict(7, all(v.passed for v in vs), time.perf_counter() - t, 5, detail)


def test_criterion_08_szego_map(verdict):
    t = time.perf_counter()
    vs, detail = _fixtures(["bs.szego_basis", "os.phi_tilde", "os.tilde_basis"])
    c1, c2 = 0.3, 0.5
    closed = max(regression._diff(a, b) for a, b in
                 zip(regression.bs_general_basis(c1, c2, 2, 1), regression.bs_vector_polys(c1, c2)[2]))
    ok = all(v.passed for v in vs) and closed < 1e-9
    verdict(8, ok, time.perf_counter() - t, 60, f"{detail}; closed form {closed:.1e}")


def test_criterion_09_forward_flatness(verdict):
    t = time.perf_counter()
    spec = bs2d.WeightSpec("two-sided", q1=RealPoly([1.25, -1.0], False), q2=RealPoly([1.0], False, "y"),
                           omega=BivarPoly([[1.0, 0.0], [0.0, -0.5]], ("z", "w"), exact=False))
    r = bs2d.forward_verify(spec, dk=2, dl=1)
    dev = max(r["A_dev"], r["B_dev"], r["At_dev"], r["Bt_dev"])
    verdict(9, dev < 1e-8, time.perf_counter() - t, 60, f"(n, m) = ({r['n']}, {r['m']}), max deviation {dev:.1e}")


def test_criterion_10_extension_measures(verdict):
    t = time.perf_counter()
    vs, detail = _fixtures(["bs.line_extension", "bs.point_extension", "os.curve_extension"])
    verdict(10, all(v.passed for v in vs), time.perf_counter() - t, 60, detail)


PROPERTY_TESTS = [
    "test_bs2d.py::test_bezout_rhs_basis_independence",
    "test_bs1d.py::test_christoffel_darboux_matches_inverse_hankel",
    "test_matop.py::test_identity_derivative_sum",
    "test_matop.py::test_identity_psi_symmetry",
    "test_szego.py::test_isometry_and_injectivity",
    "test_szego.py::test_split_extra_orthogonality",
    "test_szego.py::test_chebyshev_relation",
]


def test_criterion_11_property_suites(verdict):
    t = time.perf_counter()
    ids = [str(TESTS / p) for p in PROPERTY_TESTS]
    out = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *ids],
                         capture_output=True, text=True, cwd=TESTS.parent)
    tail = out.stdout.strip().splitlines()[-1] if out.stdout.strip() else out.stderr[-200:]
    verdict(11, out.returncode == 0, time.perf_counter() - t, 120, tail)
