"""Moments of a 1D Bernstein-Szegő weight and recovery of q from a Hankel matrix."""
from fractions import Fraction as F

from bszego import bs1d
from bszego.poly import RealPoly

q = RealPoly([F(5), F(1, 2), F(-1), F(3, 7), F(1, 9)], True, "w")
h = bs1d.moments_from_q(q, 4)
print("moments:", [str(v) for v in h])
print("Delta_m(q):", bs1d.delta_m(q))
rec = bs1d.recover_q_from_hankel(bs1d.hankel(h, 2))
print("recovered q:", [str(v) for v in rec.q.c], "equal:", rec.q == q)
