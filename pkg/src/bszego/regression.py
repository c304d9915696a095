"""Regression corpus: closed forms of the two worked examples, checked end to end.

``bs.*`` fixtures use the Bernstein-Szegő weight with parameters (c₁, c₂)
and moment table :func:`corpus.bs_example_table`; ``os.*`` fixtures use the
one-sided weight with parameters (c₀, c₁) and :func:`corpus.one_sided_example_table`.
Every fixture returns one :class:`Verdict` whose residual is compared against
its tolerance.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import bs2d, corpus, matop, szego
from . import numerics as nm
from .poly import BivarPoly, RealPoly, chebU


@dataclass
class Verdict:
    name: str
    residual: float
    tol: float
    seconds: float = 0.0
    note: str = ""

    @property
    def passed(self):
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)


def _xy(terms, scale=1.0):
    return BivarPoly.from_dict({k: float(v) * scale for k, v in terms.items()}, ("x", "y"), exact=False)


def _diff(a: BivarPoly, b: BivarPoly):
    return (a.to_float() - b.to_float()).norm_inf()


def _sdiff(a, b):
    """Distance up to an overall sign."""
    return min(_diff(a, b), _diff(a, -b))


def _U(k, axis):
    u = chebU(k, False)
    return BivarPoly.from_first(u, ("x", "y")) if axis == 0 else \
        BivarPoly.from_second(RealPoly(u.c, False, "y"), ("x", "y"))


# ---------------------------------------------------------------------------
# Bernstein-Szegő weight (c₁, c₂)

def bs_vector_polys(c1, c2):
    """Closed-form P_{0,1}, P_{1,1}, P_{2,1} in the standard basis (1, y)."""
    s = math.sqrt(1 - c1 * c1)
    return [
        [_xy({(0, 0): 1}), _xy({(0, 1): 2, (0, 0): -c1 * c2})],
        [_xy({(1, 0): 2, (0, 1): -2 * c1, (0, 0): c1 * c1 * c2 - c2}, 1 / s),
         _xy({(1, 1): 4, (0, 1): -2 * c2, (0, 0): -c1})],
        [_xy({(2, 0): 4, (1, 1): -4 * c1, (1, 0): -2 * c2, (0, 1): 2 * c1 * c2,
              (0, 0): c1 * c1 - 1}, 1 / s),
         _xy({(2, 1): 8, (1, 1): -4 * c2, (1, 0): -2 * c1, (0, 1): -2, (0, 0): c1 * c2})],
    ]


def bs_weight(c1, c2):
    """Two-sided form: q₁ = 1 + c₂² − 2c₂x, q₂ = 1, ω = (1 − c₁zw)/(1 − c₁²)^{1/4}."""
    om = BivarPoly([[1.0, 0.0], [0.0, -c1]], ("z", "w"), exact=False) * (1 - c1 * c1) ** -0.25
    return bs2d.WeightSpec("two-sided", q1=RealPoly([1 + c2 * c2, -2 * c2], False),
                           q2=RealPoly([1.0], False), omega=om)


def bs_one_sided(c1, c2, singular=()):
    s = math.sqrt(1 - c1 * c1)
    p = BivarPoly([[1 / s, 0.0, c1 * c1 / s], [0.0, -2 * c1 / s, 0.0]], ("x", "w"), exact=False)
    return bs2d.WeightSpec("one-sided", q=RealPoly([1 + c2 * c2, -2 * c2], False), p=p,
                           singular=list(singular))


def bs_general_basis(c1, c2, N, M):
    """Closed-form entries of P_{N,M} for N ≥ 2, M ≥ 1 via the Szegő map."""
    s = math.sqrt(1 - c1 * c1)
    y = _xy({(0, 1): 1})
    one = _xy({(0, 0): 1})
    ph = (_U(N, 0) - _U(N - 1, 0) * (one * c2 + y * (2 * c1))
          + _U(N - 2, 0) * (one * (c1 * c1) + y * (2 * c1 * c2))
          - _U(N - 3, 0) * (c1 * c1 * c2)) * (1 / s)
    out = [ph * _U(k, 1) for k in range(M)]
    out.append(_U(N, 0) * _U(M, 1) - _U(N - 1, 0) * _U(M, 1) * c2
               - _U(N - 1, 0) * _U(M - 1, 1) * c1 + _U(N - 2, 0) * _U(M - 1, 1) * (c1 * c2))
    return out


def _table(h):
    return bs2d.MomentTable(h)


def fx_bs_vector_polys(cfg):
    c1, c2 = corpus.BS_FLOAT
    fam = bs2d.vector_op_family(_table(corpus.bs_example_table(c1, c2)), 2, 1, cfg=cfg)
    ref = bs_vector_polys(c1, c2)
    res = max(_diff(a, b) for k in range(3) for a, b in zip(fam.entries(k), ref[k]))
    res = max(res, nm.max_abs(nm.to_float(fam.A[2]) - np.eye(2) / 2))
    return res, 1e-10, "P_{k,1} for k ≤ 2 and A_{2,1} = I/2"


def fx_bs_q_p(cfg):
    c1, c2 = corpus.BS_FLOAT
    r = bs2d.reconstruct_weight(_table(corpus.bs_example_table(c1, c2)), 2, 1, cfg)
    q0 = 1 + c2 * c2
    q_ref = RealPoly([1.0, -2 * c2 / q0], False)
    s = math.sqrt(1 - c1 * c1)
    p_ref = BivarPoly([[1.0, 0.0, c1 * c1], [0.0, -2 * c1, 0.0]], ("x", "w"), exact=False) \
        * (math.sqrt(q0) / s)
    res = max((r.result.q.to_float() - q_ref).norm_inf(), _diff(r.result.p, p_ref))
    ok = r.ok
    return (res if ok else math.inf), 1e-9, "q(0) = 1 normalization; p scaled by √q(0)"


def fx_bs_det_psi(cfg):
    c1, c2 = corpus.BS_FLOAT
    fam = bs2d.vector_op_family(_table(corpus.bs_example_table(c1, c2)), 2, 1, cfg=cfg)
    det = matop.psi_hat(fam.family, 2).det_poly().to_float()
    s = math.sqrt(1 - c1 * c1)
    ref = RealPoly([2 / s, -4 * c2 / s, 2 * c2 * c2 / s], False, det.var)
    return (det - ref).norm_inf(), 1e-9, "det Ψ̂ = 2(1 − c₂z)²/√(1 − c₁²)"


def fx_bs_certificate(cfg):
    """Condition (b) holds iff c₂ ∈ [−1, 1]; checked exactly at c₂ = 1/2 and c₂ = 2."""
    bad = 0
    for c2, expect in ((Fraction(1, 2), True), (Fraction(2), False)):
        r = bs2d.reconstruct_weight(_table(corpus.bs_example_table(Fraction(3, 10), c2)), 2, 1, cfg)
        bad += (r.certificate.cond_b is not expect) + (r.certificate.cond_a is not True)
    return float(bad), 0.0, "c₂ = 1/2 passes, c₂ = 2 fails condition (b)"


def fx_bs_szego_basis(cfg):
    c1, c2 = corpus.BS_FLOAT
    spec = bs_weight(c1, c2)
    _, plain = szego.bases_two_sided(spec, 2, 1, cfg)
    res = max(_diff(a, b) for a, b in zip(plain.polys, bs_vector_polys(c1, c2)[2]))
    _, plain3 = szego.bases_two_sided(spec, 3, 2, cfg)
    res = max(res, plain.gram_residual, plain3.gram_residual,
              max(_diff(a, b) for a, b in zip(plain3.polys, bs_general_basis(c1, c2, 3, 2))))
    return res, 1e-9, "Szegő-map basis at (N, M) = (2, 1) and (3, 2)"


def _bs_extension(c1, c2, with_point):
    x0 = (c2 + 1 / c2) / 2
    sp = bs_one_sided(c1, c2)
    pl = sp.p.eval_first(x0)
    sing = [bs2d.LineMass(x0, (c2 * c2 - 1) / (c2 * c2), RealPoly(pl.c, False, "w"))]
    if with_point:
        t = c1 * c2
        sing.append(bs2d.PointMass(x0, (t + 1 / t) / 2, (t * t - 1) / (t * t)))
    return bs_one_sided(c1, c2, sing)


def fx_bs_line_extension(cfg):
    c1, c2 = 0.3, 2.0
    M = bs2d.spec_moments(_bs_extension(c1, c2, False), 4, 2, cfg)
    return M.max_diff(_table(corpus.bs_example_table(c1, c2))), 1e-8, \
        "absolutely continuous part plus a line mass, |c₁c₂| ≤ 1 < |c₂|"


def fx_bs_point_extension(cfg):
    c1, c2 = [float(v) for v in corpus.BS_OUTSIDE]
    spec = _bs_extension(c1, c2, True)
    M = bs2d.spec_moments(spec, 4, 2, cfg)
    res = M.max_diff(_table(corpus.bs_example_table(c1, c2)))
    # point mass in exact arithmetic
    a, b = corpus.BS_OUTSIDE
    t = a * b
    pm = ((t * t - 1) / (t * t), (b + 1 / b) / 2, (t + 1 / t) / 2)
    if pm != (Fraction(5, 9), Fraction(5, 3), Fraction(13, 12)):
        res = math.inf
    return res, 1e-8, "line mass plus point mass 5/9 at (5/3, 13/12)"


# ---------------------------------------------------------------------------
# one-sided weight (c₀, c₁)

def os_p(c0, c1, exact=False):
    """``p(x, w)`` of the one-sided weight; exact mode returns the rational part over 896."""
    if exact:
        c0, c1 = Fraction(c0), Fraction(c1)
        g = [[Fraction(848), 225 * c0, Fraction(-225)], [Fraction(-448), 225 * c1, Fraction(0)]]
        return BivarPoly(g, ("x", "w"), exact=True) * Fraction(1, 896)
    k = 1 / (224 * math.sqrt(15))
    return BivarPoly([[848 * k, 225 * c0 * k, -225 * k], [-448 * k, 225 * c1 * k, 0.0]],
                     ("x", "w"), exact=False)


def os_weight(c0, c1, singular=()):
    return bs2d.WeightSpec("one-sided", q=RealPoly([1.0], False), p=os_p(c0, c1),
                           singular=list(singular))


def _d01(c0, c1):
    e = 28 * c0 + 53 * c1
    return e, math.sqrt(e * e + 112896), math.sqrt(e * e + 1382976)


def fx_os_vector_polys(cfg):
    c0, c1 = [float(v) for v in corpus.ONE_SIDED_RATIONAL]
    e, d0, d1 = _d01(c0, c1)
    r3, r5, r15 = math.sqrt(3), math.sqrt(5), math.sqrt(15)
    fam = bs2d.vector_op_family(_table(corpus.one_sided_example_table(c0, c1)), 1, 1, cfg=cfg)
    ref0 = [_xy({(0, 0): 1}), _xy({(0, 1): 2688, (0, 0): 448 * c0 + 173 * c1}, r3 / (8 * d0))]
    ref1 = [_xy({(1, 0): 112 * d0 * d0, (0, 1): 30240 * e,
                 (0, 0): e * (4249 * c0 + 449 * c1) - 3189312}, 1 / (4 * r15 * d0 * d1)),
            _xy({(1, 1): 896 * d1 * d1, (1, 0): 45 * (9408 * (448 * c0 + 173 * c1) - 5 * c1 * d0 * d0),
                 (0, 1): -32 * (49 * d0 * d0 + 4 * d1 * d1),
                 (0, 0): -45 * (5 * c0 * d0 * d0 + 2688 * (14 * c0 - 311 * c1))},
                1 / (224 * r15 * d0 * d1))]
    A = np.array([[r15 * d1 / (28 * d0), 0.0], [3 * r5 * e / (14 * d1), 252 * r5 / d1]])
    res = max(_diff(a, b) for a, b in zip(fam.entries(0) + fam.entries(1), ref0 + ref1))
    res = max(res, nm.max_abs(nm.to_float(fam.A[1]) - A))
    return res, 1e-10, "P_{0,1}, P_{1,1} and A_{1,1}"


def fx_os_reconstruction(cfg):
    c0, c1 = corpus.ONE_SIDED_RATIONAL
    r = bs2d.reconstruct_weight(_table(corpus.one_sided_example_table(c0, c1)), 1, 1, cfg)
    rec = r.result
    ok = (rec.q.exact and list(rec.q.c) == [1] and (rec.p_rat - os_p(c0, c1, True)).is_zero()
          and rec.scale_sq == Fraction(16, 15) and rec.residual == 0 and r.ok)
    return (0.0 if ok else 1.0), 0.0, "exact q = 1 and p = (16(53 − 28x) + 225(c₁x + c₀)w − 225w²)/(224√15)"


def os_in_box(c0, c1):
    """Closed-form condition for ``p ≠ 0`` on (−1, 1)²."""
    return abs(c0 + c1) <= Fraction(7, 9) and abs(c0 - c1) <= Fraction(119, 25)


def fx_os_certificate(cfg):
    bad = 0
    for pair in (corpus.ONE_SIDED_IN_BOX, corpus.ONE_SIDED_OUT_OF_BOX):
        r = bs2d.reconstruct_weight(_table(corpus.one_sided_example_table(*pair)), 1, 1, cfg)
        bad += r.certificate.cond_a is not os_in_box(*pair)
        bad += r.certificate.cond_b is not True
    return float(bad), 0.0, "condition (a) matches the closed-form box at one in-box and one out-of-box pair"


def fx_os_det_psi(cfg):
    c0, c1 = corpus.ONE_SIDED_RATIONAL
    M = _table(corpus.one_sided_example_table(c0, c1))
    fam = bs2d.vector_op_family(M, 1, 1, cfg=cfg).family
    res = 0.0 if matop.det_psi_at_zero(fam, 1) == Fraction(28, 15) else 1.0
    ffam = bs2d.vector_op_family(M.to_float(), 1, 1, cfg=cfg).family
    det = matop.psi_hat(ffam, 1).det_poly().to_float()
    rts = np.array([3.5, 3.5, 3.5, 32 / 7])
    ref = RealPoly(np.poly(rts)[::-1] / 105, False, det.var)
    return max(res, (det - ref).norm_inf()), 1e-9, "det Ψ̂(0) = 28/15 exactly; det Ψ̂ = (7/2 − z)³(32/7 − z)/105"


def os_completion(c0, c1, N):
    """Closed-form last element of the tilde basis for M = 1."""
    _, d0, _ = _d01(c0, c1)
    y = _xy({(0, 1): 1})
    return (_U(N, 0) * (7 * (448 * c0 + 173 * c1)) - _U(N - 1, 0) * (4 * (14 * c0 - 311 * c1))
            + (_U(N, 0) * 7 - _U(N - 1, 0) * 2) * y * 2688) * (math.sqrt(3) / (56 * d0))


def os_p1(c0, c1):
    """``p_1(y; x)`` of the one-sided weight."""
    return _xy({(0, 1): 32 * 53, (1, 1): -32 * 28, (1, 0): 225 * c1, (0, 0): 225 * c0},
               1 / (224 * math.sqrt(15)))


def fx_os_basis(cfg):
    c0, c1 = 0.5, 0.2
    spec = os_weight(c0, c1)
    res = 0.0
    for N in (1, 2, 3):
        B = szego.complete_basis_tilde(spec, N, 1, cfg)
        res = max(res, B.gram_residual, _sdiff(B.parts["completion"][0], os_completion(c0, c1, N)))
        res = max(res, _diff(B.parts["products"][0], os_p1(c0, c1)))
    return res, 1e-9, "tilde basis completion for N = 1, 2, 3 and M = 1"


def os_phi_tilde():
    s17 = math.sqrt(17)
    g = [[0.0, 32 * (9 - s17), 0.0, -7 * 64], [0.0, 7 * s17 - 33, 0.0, 128]]
    return BivarPoly(g, ("z", "w"), exact=False) * (math.sqrt(3) / 896)


def fx_os_phi_tilde(cfg):
    spec = os_weight(0.0, 0.0)
    T = szego.TorusFunctional(szego._zpoly(spec.p), cfg)
    P1, _ = szego.split_p1_p2(T, 2, 2, 3, cfg)
    if P1.dim != 1:
        return math.inf, 1e-9, f"P̃¹ has dimension {P1.dim}"
    f = P1.polys()[0]
    f = f * (1 / math.sqrt(szego.modified_inner_product(f, f, 1, T)))
    ref = os_phi_tilde()
    s17 = math.sqrt(17)
    norm = T.inner(ref, ref)
    cross = T.inner(ref.invert_second().shift(0, 2), ref)
    mod = szego.modified_inner_product(ref, ref, 1, T)
    res = max(_sdiff(f, ref), abs(norm - 3 * (23 - s17) / 56), abs(cross - (13 - 3 * s17) / 56))
    res = max(res, 10 * abs(mod - 1))  # modified norm is held to 1e-10
    return res, 1e-9, "φ̃ up to sign, plain norm, cross term, modified norm 1"


def os_curve_mass(c0, c1):
    """Curve part of the extension measure, in the (2/π)√(1 − x²) dx convention."""
    def roots(xs):
        a = c0 + c1 * xs
        d = np.sqrt(64 / 225 * (53 - 28 * xs) + a * a)
        return (a - d) / 2, (a + d) / 2

    def y_of_x(xs):
        w1, _ = roots(xs)
        return (w1 + 1 / w1) / 2

    def density(xs):
        w1, w2 = roots(xs)
        return 3136 / 15 * (1 - w1 * w1) * w2 / ((53 - 28 * xs) * (1 - w1 * w2) * (w2 - w1))

    return bs2d.CurveMass(y_of_x, density), roots


def fx_os_curve_extension(cfg):
    c0, c1 = corpus.ONE_SIDED_EXTENSION
    inside = c0 + c1 >= Fraction(7, 9) and c0 - c1 >= Fraction(119, 25) and not os_in_box(c0, c1)
    c0, c1 = float(c0), float(c1)
    mass, roots = os_curve_mass(c0, c1)
    xs = np.cos(np.pi * (np.arange(257) + 0.5) / 257)
    w1, w2 = roots(xs)
    inside = inside and bool(np.all((-1 < w1) & (w1 < 0) & (0 < w2)))
    M = bs2d.spec_moments(os_weight(c0, c1, [mass]), 2, 2, cfg)
    res = M.max_diff(_table(corpus.one_sided_example_table(c0, c1)))
    return (res if inside else math.inf), 1e-8, "absolutely continuous part plus a curve mass at (6, 1)"


FIXTURES = [
    ("bs.vector_polys", fx_bs_vector_polys),
    ("bs.q_p", fx_bs_q_p),
    ("bs.det_psi", fx_bs_det_psi),
    ("bs.certificate_b", fx_bs_certificate),
    ("bs.szego_basis", fx_bs_szego_basis),
    ("bs.line_extension", fx_bs_line_extension),
    ("bs.point_extension", fx_bs_point_extension),
    ("os.vector_polys", fx_os_vector_polys),
    ("os.reconstruction", fx_os_reconstruction),
    ("os.certificate_a", fx_os_certificate),
    ("os.det_psi", fx_os_det_psi),
    ("os.tilde_basis", fx_os_basis),
    ("os.phi_tilde", fx_os_phi_tilde),
    ("os.curve_extension", fx_os_curve_extension),
]


def run_all(cfg=nm.DEFAULT, names=None):
    """Run the corpus; errors inside a fixture become failing verdicts."""
    out = []
    for name, fn in FIXTURES:
        if names and name not in names:
            continue
        t = time.perf_counter()
        try:
            res, tol, note = fn(cfg)
        except Exception as e:  # noqa: BLE001 - recorded as a failed verdict
            res, tol, note = math.inf, 0.0, f"{type(e).__name__}: {e}"
        out.append(Verdict(name, float(res), tol, time.perf_counter() - t, note))
    return out
