"""Recurrence coefficients of a two-sided weight become flat past (n, m)."""
from bszego import bs2d
from bszego.poly import BivarPoly, RealPoly

spec = bs2d.WeightSpec("two-sided", q1=RealPoly([1.25, -1.0], False), q2=RealPoly([1.0], False, "y"),
                       omega=BivarPoly([[1.0, 0.0], [0.0, -0.5]], ("z", "w"), exact=False))
r = bs2d.forward_verify(spec, dk=2, dl=1)
print(f"(n, m) = ({r['n']}, {r['m']})")
for k in ("A_dev", "B_dev", "At_dev", "Bt_dev", "quad_error"):
    print(f"{k:>10}: {r[k]:.2e}")
