"""Command line front end.

    holmgren fa-eval --a 1.5 --b 0.3 0.4 --c 0.7 0.9 --z -0.2 -0.3
    holmgren fundsol-eval --m 3 --n 1 --k 0 --alpha 0.25 --x 0.5 0.2 0.1 --xi 0.6 0.1 0.3
    holmgren solve run.json
    holmgren verify hypergeom --out report.csv
    holmgren selftest

Exit codes: 0 success, 2 invalid input or refused evaluation, 3 numerical failure
(or, for ``verify``, any failed check).

Run configuration (JSON)::

    {
      "problem":  {"m": 3, "n": 2, "k": 1, "alpha": [0.2, 0.3], "R": 1.0},
      "boundary": {"family": "quadratic", "params": {"i": 1, "j": 3}},
      "grids":    {"sphere": 16, "face": 16},
      "eval_points": [[0.3, 0.3, 0.1]]   or   {"lattice": {"lo": [...], "hi": [...], "count": 3}},
      "tolerances": {"delta": 0.05},
      "output": "solution.csv"
    }

``grids``, ``tolerances`` and ``output`` are optional (defaults: 24 for m = 2,
16 otherwise; delta = 0.05; standard output). Relative ``output`` paths are
resolved against the config file's directory. Thread count comes from the
``HOLMGREN_THREADS`` environment variable (default: all cores); output rows
are always written in input order.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import fundsol as fs
from . import hyperfun as hf
from . import solver as sv
from . import verify as vf
from .geomquad import default_level

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


# ---------------------------------------------------------------------------
# fa-eval


def cmd_fa_eval(args) -> int:
    try:
        params = hf.FAParams(args.a, tuple(args.b), tuple(args.c))
        z = list(args.z)
        if len(z) != params.n:
            raise hf.DomainError(f"expected {params.n} z values, got {len(z)}")
        if args.strategy == "auto":
            res = hf.fa(params, z, args.tol, check=args.check)
        elif args.strategy == "direct":
            res = hf.fa_direct(params, z, args.tol)
        elif args.strategy == "decomposition":
            res = hf.fa_decompose_lemma1(params, z, args.max_order)
        else:
            res = hf.fa_laplace(params, z)
    except (hf.DomainError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    except hf.StrategyMismatch as exc:
        _err(str(exc))
        return EXIT_NUMERIC
    print(f"value,{float(res.value)!r}")
    print(f"strategy,{res.strategy}")
    print(f"terms_used,{res.terms_used}")
    print(f"tail_estimate,{float(res.tail_estimate)!r}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fundsol-eval


def cmd_fundsol_eval(args) -> int:
    try:
        cfg = fs.ProblemConfig(args.m, args.n, args.k, tuple(args.alpha), args.R)
        x = np.asarray(args.x, float)
        xi = np.asarray(args.xi, float)
        if x.size != cfg.m or xi.size != cfg.m:
            raise ValueError(f"x and xi need {cfg.m} coordinates")
        q = args.quantity
        if q == "q":
            out = [fs.q_k(cfg, x, xi)]
        elif q == "grad":
            out = list(fs.grad_q_k(cfg, x, xi))
        elif q == "G":
            out = [fs.green_G_k(cfg, x, xi)]
        elif q == "dGdn":
            out = [fs.dG_dn_sphere(cfg, x, xi)]
        elif q == "poisson":
            out = [sv.poisson_kernel(cfg, x, xi)]
        else:
            i = args.face
            if i is None:
                raise ValueError("--face is required for face kernels")
            out = [sv.tau_kernel(cfg, i, x, xi) if q == "tau" else sv.nu_kernel(cfg, i, x, xi)]
    except (ValueError, hf.DomainError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    for v in out:
        print(repr(float(v)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve


def _field(obj, key, path, kind=None, default=...):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    if key not in obj:
        if default is ...:
            raise ConfigError(f"{path + '.' if path else ''}{key}: missing")
        return default
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"{path + '.' if path else ''}{key}: expected {kind}, got {type(val).__name__}")
    return val


def _number_list(val, path):
    if not isinstance(val, list) or not val:
        raise ConfigError(f"{path}: expected a non-empty list of numbers")
    out = []
    for i, v in enumerate(val):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{path}[{i}]: expected a number, got {v!r}")
        out.append(float(v))
    return out


def load_run_config(path) -> dict:
    """Parse and validate a JSON run configuration."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    prob = _field(raw, "problem", "", dict)
    alpha = _number_list(_field(prob, "alpha", "problem"), "problem.alpha")
    ints = {}
    for key in ("m", "n", "k"):
        v = _field(prob, key, "problem")
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"problem.{key}: expected an integer, got {v!r}")
        ints[key] = v
    R = _field(prob, "R", "problem", (int, float), 1.0)
    try:
        cfg = fs.ProblemConfig(ints["m"], ints["n"], ints["k"], tuple(alpha), float(R))
    except ValueError as exc:
        raise ConfigError(f"problem: {exc}") from None
    bnd = _field(raw, "boundary", "", dict)
    family = _field(bnd, "family", "boundary", str)
    params = _field(bnd, "params", "boundary", dict, {})
    try:
        data, exact = sv.make_family(cfg, family, **params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"boundary: {exc}") from None
    grids = _field(raw, "grids", "", dict, {})
    levels = {}
    for key in ("sphere", "face"):
        v = grids.get(key, default_level(cfg.m))
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError(f"grids.{key}: expected a positive integer, got {v!r}")
        levels[key] = v
    pts_raw = _field(raw, "eval_points", "")
    points = _parse_points(pts_raw, cfg)
    tols = _field(raw, "tolerances", "", dict, {})
    delta = tols.get("delta", sv.DEFAULT_DELTA)
    if isinstance(delta, bool) or not isinstance(delta, (int, float)) or not 0 < delta < 0.5:
        raise ConfigError(f"tolerances.delta: expected a number in (0, 0.5), got {delta!r}")
    out = _field(raw, "output", "", str, None)
    if out is not None:
        out = str((path.parent / out).resolve()) if not Path(out).is_absolute() else out
    return {"cfg": cfg, "data": data, "exact": exact, "levels": levels, "points": points,
            "delta": float(delta), "output": out}


def _parse_points(val, cfg):
    m = cfg.m
    if isinstance(val, list):
        pts = []
        for i, p in enumerate(val):
            q = _number_list(p, f"eval_points[{i}]")
            if len(q) != m:
                raise ConfigError(f"eval_points[{i}]: expected {m} coordinates, got {len(q)}")
            pts.append(q)
        return np.array(pts)
    if isinstance(val, dict) and "lattice" in val:
        lat = val["lattice"]
        lo = _number_list(_field(lat, "lo", "eval_points.lattice"), "eval_points.lattice.lo")
        hi = _number_list(_field(lat, "hi", "eval_points.lattice"), "eval_points.lattice.hi")
        count = _field(lat, "count", "eval_points.lattice", int)
        if len(lo) != m or len(hi) != m:
            raise ConfigError(f"eval_points.lattice: lo and hi need {m} entries")
        if count < 1:
            raise ConfigError("eval_points.lattice.count: must be >= 1")
        axes = [np.linspace(a, b, count) for a, b in zip(lo, hi)]
        g = np.meshgrid(*axes, indexing="ij")
        return np.stack([x.ravel() for x in g], axis=1)
    raise ConfigError("eval_points: expected a list of points or {\"lattice\": {...}}")


def cmd_solve(args) -> int:
    try:
        rc = load_run_config(args.config)
        for i, p in enumerate(rc["points"]):
            try:
                sv.check_margin(rc["cfg"], p, rc["delta"])
            except sv.MarginError as exc:
                raise ConfigError(f"eval_points[{i}]: {exc}") from None
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_INPUT
    cfg = rc["cfg"]
    rep = sv.solve_grid(cfg, rc["data"], rc["points"], rc["levels"], rc["delta"])
    if rep.failures:
        for i, msg in rep.failures:
            _err(f"point {i} {rep.points[i].tolist()}: {msg}")
        return EXIT_NUMERIC
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    faces = [f"D{p}" for p in range(1, cfg.n + 1)]
    wr.writerow([f"xi{j}" for j in range(1, cfg.m + 1)] + ["u"] + faces + ["S"])
    for p, v, c in zip(rep.points, rep.values, rep.contributions):
        wr.writerow([repr(float(x)) for x in p] + [repr(float(v))]
                    + [repr(float(c[f])) for f in faces] + [repr(float(c["S"]))])
    if rc["output"]:
        Path(rc["output"]).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify and selftest


def cmd_verify(args) -> int:
    if args.suite not in list(vf.SUITES) + ["all"]:
        _err(f"unknown suite {args.suite!r}; choose from {sorted(vf.SUITES) + ['all']}")
        return EXIT_INPUT
    results = vf.run_suite(args.suite, args.seed)
    _report(results, args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


def _report(results, out):
    for r in results:
        flag = "pass" if r.passed else "FAIL"
        print(f"{flag:4s} {r.suite:9s} {r.name:48s} {r.value:.3e} <= {r.tolerance:.1e} {r.detail}")
    if out:
        vf.write_csv(results, out)
    npass = sum(r.passed for r in results)
    print(f"{npass}/{len(results)} checks passed")


def cmd_selftest(args) -> int:
    results = vf.run_suite("hypergeom", 0)
    cfg = fs.ProblemConfig(2, 1, 1, (0.25,), 1.0)
    data, u = sv.make_family(cfg, "constant")
    err = abs(sv.solve(cfg, data, [0.3, 0.2]) - 1.0)
    results.append(vf.CheckResult("selftest", "solve_constant", err, 1e-3, err <= 1e-3))
    _report(results, args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="holmgren", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fa-eval", help="evaluate the Lauricella function F_A")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, nargs="+", required=True)
    p.add_argument("--c", type=float, nargs="+", required=True)
    p.add_argument("--z", type=float, nargs="+", required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--strategy", choices=["auto", "direct", "decomposition", "laplace"],
                   default="auto")
    p.add_argument("--max-order", type=int, default=60)
    p.add_argument("--check", action="store_true",
                   help="cross-check strategies where both apply")
    p.set_defaults(func=cmd_fa_eval)

    p = sub.add_parser("fundsol-eval", help="evaluate fundamental solutions and kernels")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, nargs="+", required=True)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--x", type=float, nargs="+", required=True)
    p.add_argument("--xi", type=float, nargs="+", required=True)
    p.add_argument("--quantity", choices=["q", "grad", "G", "dGdn", "poisson", "tau", "nu"],
                   default="q")
    p.add_argument("--face", type=int, help="face index (1-based) for tau/nu kernels")
    p.set_defaults(func=cmd_fundsol_eval)

    p = sub.add_parser("solve", help="solve from a JSON run configuration")
    p.add_argument("config")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", help="hypergeom, fundsol, green, solver or all")
    p.add_argument("--out", help="CSV report path")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("selftest", help="quick installation check")
    p.add_argument("--out")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FloatingPointError, RuntimeError, OverflowError) as exc:
        _err(str(exc))
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
