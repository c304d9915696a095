"""Reconstruct (q, p) from the finite moment table of the one-sided example, exactly."""
from fractions import Fraction as F

from bszego import bs2d, corpus

M = bs2d.MomentTable(corpus.one_sided_example_table(F(1, 10), F(1, 5)))
r = bs2d.reconstruct_weight(M, 1, 1)
print("q:", [str(v) for v in r.result.q.c])
print("p = sqrt(%s) * p_rat, p_rat grid:" % r.result.scale_sq)
for row in r.result.p_rat.grid:
    print("  ", [str(v) for v in row])
print("condition (a):", r.certificate.cond_a, " condition (b):", r.certificate.cond_b)
