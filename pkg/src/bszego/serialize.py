"""Canonical JSON/CSV forms of polynomials, moment tables and weight specs.

Rationals are written as ``"num/den"`` strings and floats as JSON numbers,
which the standard encoder prints as the shortest round-trip decimal.
Polynomials are dense ascending coefficient arrays; bivariate polynomials
are row-major grids (row index = degree in the first variable).
"""
from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

import numpy as np

from . import bs2d
from . import numerics as nm
from .errors import ModeMixError, SpecParseError
from .poly import BivarPoly, MatrixPoly, RealPoly

_EXACT = {None: None, "auto": None, "exact": True, "float": False}


def _exact_flag(mode):
    try:
        return _EXACT[mode]
    except KeyError:
        raise SpecParseError(f"unknown arithmetic mode {mode!r}") from None


# ---------------------------------------------------------------------------
# encoding

def encode_scalar(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return f"{int(v)}/1"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return repr(v)
        return v
    raise TypeError(f"cannot serialize {v!r}")


def encode_array(a):
    a = np.asarray(a, dtype=object)
    if a.ndim == 0:
        return encode_scalar(a.item())
    return [encode_array(x) for x in a]


def encode_poly(p: RealPoly):
    return {"var": p.var, "coeffs": encode_array(p.c)}


def encode_bivar(b: BivarPoly):
    out = {"var_pair": "".join(b.var_pair), "grid": encode_array(b.grid)}
    if b.offset != (0, 0):
        out["offset"] = list(b.offset)
    return out


def encode_matrix_poly(P: MatrixPoly):
    return {"var": P.var, "coeffs": encode_array(P.coeffs)}


def encode_table(M: bs2d.MomentTable):
    out = {"h": encode_array(M.h)}
    if M.error is not None:
        out["error"] = encode_array(np.asarray(M.error, dtype=float))
    return out


def encode_spec(spec: bs2d.WeightSpec, p_scale_sq=None):
    """WeightSpec as JSON; ``p_scale_sq`` marks ``p`` as ``√p_scale_sq`` times the stored grid."""
    out = {"kind": spec.kind}
    if spec.kind == "one-sided":
        out["q"] = encode_array(spec.q.c)
        out["p"] = encode_bivar(spec.p)
        if p_scale_sq is not None:
            out["p_scale_sq"] = encode_scalar(p_scale_sq)
        if spec.n1 is not None:
            out["n1"] = spec.n1
    else:
        out["q1"] = encode_array(spec.q1.c)
        out["q2"] = encode_array(spec.q2.c)
        out["omega"] = encode_bivar(spec.omega)
    sing = []
    for s in spec.singular:
        if isinstance(s, bs2d.PointMass):
            sing.append({"type": "point", "x0": float(s.x0), "y0": float(s.y0), "mass": float(s.mass)})
        elif isinstance(s, bs2d.LineMass):
            sing.append({"type": "line", "x0": float(s.x0), "mass": float(s.mass),
                         "p_line": encode_array(s.p_line.to_float().c)})
        else:
            raise TypeError("curve masses carry callables and have no JSON form")
    if sing:
        out["singular"] = sing
    return out


def dumps(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False)


# ---------------------------------------------------------------------------
# decoding

def decode_array(values, mode=None):
    try:
        return nm.coerce(values, _exact_flag(mode))
    except ModeMixError as e:
        raise SpecParseError(str(e)) from e
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise SpecParseError(f"bad numeric value: {e}") from e


def _coeffs(obj):
    if isinstance(obj, dict):
        if "coeffs" not in obj:
            raise SpecParseError("polynomial object needs 'coeffs'")
        return obj["coeffs"], obj.get("var")
    if isinstance(obj, list):
        return obj, None
    raise SpecParseError("polynomial must be a coefficient list or an object with 'coeffs'")


def decode_poly(obj, var="x", mode=None):
    c, v = _coeffs(obj)
    if not c:
        raise SpecParseError("empty coefficient list")
    arr = decode_array(c, mode)
    if arr.ndim != 1:
        raise SpecParseError("univariate coefficients must be a flat list")
    return RealPoly(arr, nm.is_exact(arr), v or var)


def decode_bivar(obj, var_pair=None, mode=None):
    if not isinstance(obj, dict) or "grid" not in obj:
        raise SpecParseError("bivariate polynomial needs {'var_pair', 'grid'}")
    pair = obj.get("var_pair", "".join(var_pair) if var_pair else None)
    if pair is None:
        raise SpecParseError("bivariate polynomial needs 'var_pair'")
    pair = tuple(pair)
    if len(pair) != 2:
        raise SpecParseError(f"var_pair {obj.get('var_pair')!r} must name two variables")
    if var_pair is not None and pair != tuple(var_pair):
        raise SpecParseError(f"expected var_pair {''.join(var_pair)!r}, got {''.join(pair)!r}")
    rows = obj["grid"]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise SpecParseError("grid must be a nonempty list of rows")
    if len({len(r) for r in rows}) != 1 or not rows[0]:
        raise SpecParseError("grid rows must have equal nonzero length")
    g = decode_array(rows, mode)
    off = tuple(obj.get("offset", (0, 0)))
    return BivarPoly(g, pair, off, nm.is_exact(g))


def decode_matrix_poly(obj, mode=None):
    c, v = _coeffs(obj)
    arr = decode_array(c, mode)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise SpecParseError("matrix polynomial coefficients must have shape (deg+1, l, l)")
    return MatrixPoly(arr, nm.is_exact(arr), v or "x")


def _unwrap(obj, key):
    """Accept a bare object or a report carrying it under ``objects[key]``."""
    if isinstance(obj, dict) and "objects" in obj and key in obj["objects"]:
        return obj["objects"][key]
    return obj


def decode_spec(obj, mode=None) -> bs2d.WeightSpec:
    obj = _unwrap(obj, "spec")
    if not isinstance(obj, dict):
        raise SpecParseError("weight spec must be a JSON object")
    kind = obj.get("kind")
    try:
        if kind == "one-sided":
            q = decode_poly(_need(obj, "q"), "x", mode)
            p = decode_bivar(_need(obj, "p"), ("x", "w"), mode)
            if "p_scale_sq" in obj:
                s = nm.parse_scalar(obj["p_scale_sq"])
                r = nm.scalar_sqrt(s) if isinstance(s, Fraction) else None
                p = p * r if r is not None and p.exact else p.to_float() * math.sqrt(float(s))
            n1 = obj.get("n1")
            spec = bs2d.WeightSpec("one-sided", q=q, p=p, n1=n1)
        elif kind == "two-sided":
            q1 = decode_poly(_need(obj, "q1"), "x", mode)
            q2 = decode_poly(_need(obj, "q2"), "y", mode)
            om = decode_bivar(_need(obj, "omega"), ("z", "w"), mode)
            spec = bs2d.WeightSpec("two-sided", q1=q1, q2=q2, omega=om)
        else:
            raise SpecParseError("kind must be 'one-sided' or 'two-sided'")
        spec.singular = [_decode_singular(s) for s in obj.get("singular", [])]
    except SpecParseError:
        raise
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise SpecParseError(str(e)) from e
    return spec


def _need(obj, key):
    if key not in obj:
        raise SpecParseError(f"weight spec is missing {key!r}")
    return obj[key]


def _decode_singular(s):
    if not isinstance(s, dict):
        raise SpecParseError("singular part must be an object")
    t = s.get("type")
    f = lambda k: float(nm.parse_scalar(_need(s, k)))  # noqa: E731
    if t == "point":
        return bs2d.PointMass(f("x0"), f("y0"), f("mass"))
    if t == "line":
        return bs2d.LineMass(f("x0"), f("mass"), decode_poly(_need(s, "p_line"), "w", "float"))
    raise SpecParseError(f"unknown singular part type {t!r} (supported: point, line)")


def decode_table(obj, mode=None) -> bs2d.MomentTable:
    obj = _unwrap(obj, "table")
    rows = obj.get("h") if isinstance(obj, dict) else obj
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise SpecParseError("moment table must be a nonempty list of rows")
    if len({len(r) for r in rows}) != 1:
        raise SpecParseError("moment table rows must have equal length")
    return bs2d.MomentTable(decode_array(rows, mode))


# ---------------------------------------------------------------------------
# CSV tables

def table_to_csv(M: bs2d.MomentTable):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in M.h:
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def _csv_cell(v):
    e = encode_scalar(v)
    return repr(e) if isinstance(e, float) else e


def table_from_csv(text, mode=None) -> bs2d.MomentTable:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    try:
        cells = [[nm.parse_scalar(c.strip()) for c in r] for r in rows]
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise SpecParseError(f"bad CSV cell: {e}") from e
    return decode_table(cells, mode)
