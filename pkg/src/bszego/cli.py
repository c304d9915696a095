"""Command-line interface: ``bszego <command> [options]``.

Exit codes: 0 ok, 1 corpus fixture failure, 2 parse error, 3 non-integrable
weight, 4 no solution, 5 stability certificate failed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import bs1d, bs2d, matop, regression, szego
from . import numerics as nm
from . import serialize as ser
from .errors import (BSzegoError, NoConvergence, NoSolution, NotPositive, NotPositiveDefinite,
                     NotPositiveOnGrid, SpecParseError, StabilityViolation, Undecided)
from .poly import LaurentPoly, laurent_to_x

EXIT_OK, EXIT_FIXTURE, EXIT_PARSE, EXIT_INTEGRABILITY, EXIT_NO_SOLUTION, EXIT_STABILITY = range(6)


@dataclass
class JobConfig:
    command: str
    inputs: list
    output: Optional[str]
    mode: Optional[str]
    cfg: nm.ToleranceConfig
    degrees: dict = field(default_factory=dict)
    grid_start: int = 32

    def __post_init__(self):
        for p in self.inputs:
            if not os.path.isfile(p):
                raise SpecParseError(f"input file {p!r} does not exist")
        for k, v in self.degrees.items():
            if v is not None and v < 0:
                raise SpecParseError(f"degree {k} must be nonnegative")
        if self.grid_start < 1:
            raise SpecParseError("--grid-start must be positive")


@dataclass
class Report:
    """Command echo, produced objects, named residuals and verdicts citing them."""

    command: dict
    objects: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    wall_time: float = 0.0
    error: Optional[str] = None

    def verdict(self, name, residual_name, tol, passed=None):
        value = self.residuals[residual_name]
        if passed is None:
            passed = value is not None and math.isfinite(value) and value <= tol
        self.verdicts.append({"name": name, "residual": residual_name, "tol": tol,
                              "passed": bool(passed)})
        return bool(passed)

    @property
    def passed(self):
        return self.error is None and all(v["passed"] for v in self.verdicts)

    def to_json(self):
        def clean(v):
            return v if v is None or math.isfinite(v) else repr(v)
        out = {"command": self.command, "objects": self.objects,
               "residuals": {k: clean(v) for k, v in self.residuals.items()},
               "verdicts": self.verdicts, "passed": self.passed,
               "wall_time": round(self.wall_time, 6)}
        if self.error:
            out["error"] = self.error
        return out


# ---------------------------------------------------------------------------
# helpers

def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise SpecParseError(f"{path}: invalid JSON ({e})") from e


def _read_table(path, mode):
    if path.endswith(".csv"):
        with open(path, encoding="utf-8") as fh:
            return ser.table_from_csv(fh.read(), mode)
    return ser.decode_table(_read_json(path), mode)


def _write(job: JobConfig, text):
    if job.output:
        with open(job.output, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit(job: JobConfig, rep: Report, t0):
    rep.wall_time = time.perf_counter() - t0
    _write(job, ser.dumps(rep.to_json()))


def _tol(cfg):
    return max(1e3 * cfg.rel_tol, 1e-9)


# ---------------------------------------------------------------------------
# commands

def cmd_moments(job: JobConfig, args, rep: Report):
    spec = ser.decode_spec(_read_json(args.spec), job.mode)
    n, m = spec.degrees()
    kmax = args.kmax if args.kmax is not None else 2 * n
    lmax = args.lmax if args.lmax is not None else 2 * m
    if kmax < 0 or lmax < 0:
        raise SpecParseError("--kmax and --lmax must be nonnegative")
    M = bs2d.spec_moments(spec, kmax, lmax, job.cfg, start=job.grid_start)
    if not np.all(np.isfinite(M.h)):
        raise NoConvergence("moments are not finite")
    rep.objects["table"] = ser.encode_table(M)
    rep.objects["degrees"] = {"n": n, "m": m}
    rep.residuals["quadrature_error"] = float(np.max(M.error))
    scale = max(1.0, float(np.max(np.abs(M.h))))
    rep.verdict("quadrature", "quadrature_error", job.cfg.rel_tol * scale + job.cfg.abs_tol)
    if args.csv:
        if not job.output:
            raise SpecParseError("--csv needs --out for the table")
        with open(job.output, "w", encoding="utf-8") as fh:
            fh.write(ser.table_to_csv(M))
        job.output = None
        del rep.objects["table"]["h"]
        rep.objects["table"]["csv"] = args.out
    return EXIT_OK


def cmd_reconstruct(job: JobConfig, args, rep: Report):
    M = _read_table(args.table, job.mode)
    rows, cols = M.shape
    n = args.n if args.n is not None else (rows - 1) // 2
    m = args.m if args.m is not None else (cols - 1) // 2
    if n < 1 or m < 0:
        raise SpecParseError("reconstruction needs n ≥ 1 and m ≥ 0")
    r = bs2d.reconstruct_weight(M, n, m, job.cfg)
    rec = r.result
    exact_root = (isinstance(rec.scale_sq, Fraction) and rec.p_rat.exact
                  and nm.scalar_sqrt(rec.scale_sq) is not None)
    if exact_root or not rec.p_rat.exact:
        spec = bs2d.WeightSpec("one-sided", q=rec.q, p=rec.p, n1=n - max(rec.p_rat.degs[0], 0))
        rep.objects["spec"] = ser.encode_spec(spec)
    else:
        spec = bs2d.WeightSpec("one-sided", q=rec.q, p=rec.p_rat, n1=n - max(rec.p_rat.degs[0], 0))
        rep.objects["spec"] = ser.encode_spec(spec, rec.scale_sq)
    rep.objects["q"] = ser.encode_poly(rec.q)
    rep.objects["p_rat"] = ser.encode_bivar(rec.p_rat)
    rep.objects["p_scale_sq"] = ser.encode_scalar(rec.scale_sq)
    rep.objects["W"] = ser.encode_matrix_poly(r.W)
    rep.objects["det_psi_monic"] = ser.encode_poly(r.psi.det_poly())
    rep.objects["certificate_details"] = _jsonable(r.certificate.details)
    if rec.degenerate_normalization:
        rep.objects["note"] = "σ(0) = 0: q could not be normalized by q(0) = 1"
    rep.residuals["bezout"] = float(rec.residual)
    rep.residuals["cond_a_violations"] = 0.0 if r.certificate.cond_a else 1.0
    rep.residuals["cond_b_violations"] = 0.0 if r.certificate.cond_b else 1.0
    rep.verdict("bezout_identity", "bezout", 0.0 if M.exact else _tol(job.cfg))
    a = rep.verdict("condition_a", "cond_a_violations", 0.0)
    b = rep.verdict("condition_b", "cond_b_violations", 0.0)
    return EXIT_OK if a and b else EXIT_STABILITY


def cmd_verify(job: JobConfig, args, rep: Report):
    for v in regression.run_all(job.cfg, args.only or None):
        rep.residuals[v.name] = v.residual
        rep.verdict(v.name, v.name, v.tol, v.passed)
        rep.objects.setdefault("fixtures", {})[v.name] = {"note": v.note, "seconds": round(v.seconds, 4)}
        if not args.quiet:
            print(f"{'PASS' if v.passed else 'FAIL'} {v.name} residual={v.residual:.3e} tol={v.tol:.0e}",
                  file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FIXTURE


def cmd_factor(job: JobConfig, args, rep: Report):
    obj = _read_json(args.input)
    if args.kind == "scalar":
        Q = ser.decode_poly(obj.get("poly", obj) if isinstance(obj, dict) else obj, "x", job.mode)
        sf = bs1d.stable_fejer_riesz(Q, job.cfg)
        q = sf.q
        L = LaurentPoly(q.c, 0, q.exact, "z")
        back = laurent_to_x(L * L.invert(), tol=1e-8)
        diff = back - Q if back.exact == Q.exact else back.to_float() - Q.to_float()
        rep.objects["factor"] = ser.encode_poly(q)
        rep.objects["boundary_zeros"] = sorted(float(v) for v in sf.boundary_zeros)
        rep.residuals["factorization"] = float(diff.norm_inf()) / max(1.0, float(Q.to_float().norm_inf()))
    else:
        W = ser.decode_matrix_poly(obj.get("matrix", obj) if isinstance(obj, dict) else obj, job.mode)
        Psi = matop.matrix_fejer_riesz(W, job.cfg)
        back = matop.w_from_psi(Psi, tol=1e-6)
        d = max(back.deg, W.deg)
        res = max(nm.max_abs(nm.to_float(back.coef(k)) - nm.to_float(W.coef(k))) for k in range(d + 1))
        rep.objects["factor"] = ser.encode_matrix_poly(Psi)
        rep.residuals["factorization"] = float(res) / max(1.0, W.norm_inf())
    exact = args.kind == "scalar" and Q.exact and q.exact
    rep.verdict("factorization", "factorization", 0.0 if exact else 1e-8)
    return EXIT_OK if rep.passed else EXIT_NO_SOLUTION


def cmd_basis(job: JobConfig, args, rep: Report):
    spec = ser.decode_spec(_read_json(args.spec), job.mode)
    N, M = args.N, args.M
    if spec.kind == "one-sided":
        if args.side != "tilde":
            raise SpecParseError("the plain basis needs a two-sided weight")
        B = szego.complete_basis_tilde(spec, N, M, job.cfg)
    else:
        Bt, Bp = szego.bases_two_sided(spec, N, M, job.cfg)
        B = Bt if args.side == "tilde" else Bp
    rep.objects["basis"] = [ser.encode_bivar(p) for p in B.polys]
    rep.residuals["gram"] = float(B.gram_residual)
    rep.verdict("orthonormality", "gram", _tol(job.cfg))
    return EXIT_OK if rep.passed else EXIT_NO_SOLUTION


def _jsonable(d):
    if isinstance(d, dict):
        return {str(k): _jsonable(v) for k, v in d.items()}
    if isinstance(d, (list, tuple)):
        return [_jsonable(v) for v in d]
    if isinstance(d, (Fraction, int, float, np.integer, np.floating)) and not isinstance(d, bool):
        return ser.encode_scalar(d)
    if isinstance(d, (bool, np.bool_)) or d is None or isinstance(d, str):
        return d if not isinstance(d, np.bool_) else bool(d)
    return str(d)


# ---------------------------------------------------------------------------
# argument parsing

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=["exact", "float"], default=None,
                        help="arithmetic mode for inputs (default: inferred)")
    common.add_argument("--rel-tol", type=float, default=nm.DEFAULT.rel_tol)
    common.add_argument("--grid-start", type=int, default=32,
                        help="initial Gauss-Chebyshev order for node doubling")
    common.add_argument("--out", default=None, help="output path (default: stdout)")

    ap = argparse.ArgumentParser(prog="bszego", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", parents=[common], help="moment table of a weight spec")
    p.add_argument("spec")
    p.add_argument("--kmax", type=int)
    p.add_argument("--lmax", type=int)
    p.add_argument("--csv", action="store_true", help="write the table as CSV to --out")
    p.set_defaults(func=cmd_moments, inputs=("spec",))

    p = sub.add_parser("reconstruct", parents=[common], help="(q, p) and certificates from a moment table")
    p.add_argument("table")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.set_defaults(func=cmd_reconstruct, inputs=("table",))

    # "verify-paper" is kept as an alias of the public command name
    p = sub.add_parser("verify-corpus", aliases=["verify-paper"], parents=[common],
                       help="run the regression corpus")
    p.add_argument("--only", nargs="*", help="fixture names to run")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_verify, inputs=())

    p = sub.add_parser("factor", parents=[common], help="stable Fejér-Riesz factor")
    p.add_argument("input")
    p.add_argument("--kind", choices=["scalar", "matrix"], default="scalar")
    p.set_defaults(func=cmd_factor, inputs=("input",))

    p = sub.add_parser("basis", parents=[common], help="orthonormal basis via the Szegő map")
    p.add_argument("spec")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--side", choices=["tilde", "plain"], default="tilde")
    p.set_defaults(func=cmd_basis, inputs=("spec",))
    return ap


def main(argv=None):
    t0 = time.perf_counter()
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code not in (0, None) else EXIT_OK
    rep = Report({"name": args.command, "argv": list(sys.argv[1:] if argv is None else argv)})
    job = None
    try:
        cfg = nm.ToleranceConfig(rel_tol=args.rel_tol)
        degrees = {k: getattr(args, k) for k in ("n", "m", "N", "M", "kmax", "lmax") if hasattr(args, k)}
        job = JobConfig(args.command, [getattr(args, a) for a in args.inputs], args.out,
                        args.mode, cfg, degrees, args.grid_start)
        rep.command["mode"] = args.mode or "auto"
        rep.command["rel_tol"] = cfg.rel_tol
        code = args.func(job, args, rep)
    except (SpecParseError, ValueError) as e:
        return _fail(job, args, rep, t0, EXIT_PARSE, e)
    except (NoConvergence, NotPositive, NotPositiveDefinite, ZeroDivisionError, FloatingPointError) as e:
        return _fail(job, args, rep, t0, EXIT_INTEGRABILITY, e)
    except NoSolution as e:
        return _fail(job, args, rep, t0, EXIT_NO_SOLUTION, e)
    except (StabilityViolation, NotPositiveOnGrid, Undecided) as e:
        return _fail(job, args, rep, t0, EXIT_STABILITY, e)
    except BSzegoError as e:
        return _fail(job, args, rep, t0, EXIT_NO_SOLUTION, e)
    _emit(job, rep, t0)
    return code


def _fail(job, args, rep, t0, code, exc):
    rep.error = f"{type(exc).__name__}: {exc}"
    print(f"bszego: {rep.error}", file=sys.stderr)
    if job is None:
        job = argparse.Namespace(output=getattr(args, "out", None))
    try:
        _emit(job, rep, t0)
    except OSError:
        pass
    return code


if __name__ == "__main__":
    sys.exit(main())
