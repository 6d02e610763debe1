"""Command-line interface.

Subcommands
-----------
moment    one exact moment of the scaled empirical correlation
table     built-in reference tables, recomputed with per-cell deviations
density   polynomial density approximation built from exact moments
simulate  Monte-Carlo draws of the correlation statistic
rate      decay of the distance to normality across sample sizes
power     Monte-Carlo power and size of the sqrt(n)-scaled test

Output is CSV with ``#`` metadata lines, or JSON via --format json; both
are byte-identical for identical command line and seed.  Worker count
(--threads) changes neither values nor bytes.

Exit codes: 0 success, 2 usage error, 3 quadrature did not converge,
4 a recomputed table cell deviates from its reference beyond tolerance.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np
from scipy.special import ndtri

from . import __version__
from .asymptotics import (
    mc_power,
    power_lower_bound,
    rate_fit,
    scaling_constant,
)
from .density_approx import (
    density_minimum,
    evaluate_density,
    legendre_from_moments,
)
from .mgf_moments import limit_second_moment, moment, second_moment_scaled
from .quadrature import IntegrationError
from .simulation import ModelSpec, sample_theta

# tabulated reference values the table subcommand recomputes and
# reports |cell - reference| against
_SECOND_MOMENT_ALPHA = 0.1
_SECOND_MOMENT_ROWS = (
    (10, 1.122613), (20, 1.068110), (30, 1.051453), (40, 1.043226),
    (50, 1.038489), (60, 1.035362), (70, 1.033146), (80, 1.031493),
    (90, 1.030211), (100, 1.029190), (200, 1.024627), (300, 1.023118),
    (400, 1.022367), (500, 1.021917), (600, 1.021616), (700, 1.021402),
    (800, 1.021242),
)
_SECOND_MOMENT_LIMIT = 1.020202
_SECOND_MOMENT_TOL = 2e-4
_SECOND_MOMENT_LIMIT_TOL = 1e-6

_INDEP_MOMENT_N = 30
_INDEP_MOMENT_ALPHA = 0.05
_INDEP_MOMENT_ROWS = (
    (2, 1.038702, 5e-4), (4, 3.026394, 5e-4), (6, 11.938520, 2e-3),
    (8, 73.447734, 1e-2), (10, 545.793589, 1e-2),
)

_CORR_MOMENT_R = 0.1
_CORR_MOMENT_ROWS = (
    (1, 0.538403, 2e-3), (2, 1.309724, 2e-3), (3, 1.697504, 2e-3),
    (4, 4.567613, 2e-3), (5, 8.285348, 1e-2), (6, 24.081011, 1e-2),
    (7, 52.901232, 1e-2), (8, 165.222506, 1e-2), (9, 525.234538, 1e-2),
)

_EXIT_OK = 0
_EXIT_USAGE = 2
_EXIT_NOCONV = 3
_EXIT_TABLE_DIFF = 4

# worker count never touches output bytes, so it stays out of the
# emitted parameter block
_DEFAULT_THREADS = os.cpu_count() or 1


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _emit(command: str, params: dict, seed, results: dict,
          columns: list[str], rows: list[list], fmt: str, out) -> None:
    if fmt == "json":
        doc = {
            "tool": f"ar1corr {__version__}",
            "command": command,
            "params": params,
            "results": results,
            "columns": columns,
            "rows": rows,
        }
        if seed is not None:
            doc["seed"] = seed
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    else:
        lines = [f"# tool: ar1corr {__version__}",
                 f"# command: {command}"]
        lines.append("# params: " + " ".join(
            f"{k}={_fmt(v)}" for k, v in sorted(params.items())))
        if seed is not None:
            lines.append(f"# seed: {seed}")
        for k in sorted(results):
            lines.append(f"# {k}: {_fmt(results[k])}")
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_ns(text: str) -> tuple[int, ...]:
    """Sample-size grids: '50,100,200', '50:250:50', or '50:3200:x2'."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("size range must look like start:stop:step")
        start, stop = int(parts[0]), int(parts[1])
        if start < 2 or stop < start:
            raise ValueError("size range needs 2 <= start <= stop")
        step = parts[2]
        ns = []
        if step.startswith("x"):
            factor = float(step[1:])
            if factor <= 1.0:
                raise ValueError("geometric step must exceed 1")
            x = float(start)
            while round(x) <= stop:
                ns.append(int(round(x)))
                x *= factor
        else:
            inc = int(step)
            if inc < 1:
                raise ValueError("additive step must be positive")
            ns = list(range(start, stop + 1, inc))
        if not ns:
            raise ValueError(f"size range {text!r} is empty")
        return tuple(ns)
    ns = tuple(int(p) for p in text.split(",") if p)
    if not ns or any(n < 2 for n in ns):
        raise ValueError("sizes must be integers >= 2")
    return ns


def _parse_weights(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ValueError(f"bad weight list {text!r}") from None


def _resolve_ca(text: str, alpha: float) -> float:
    """'auto' is the two-sided 5% critical value for sqrt(n) theta_n."""
    if text == "auto":
        return float(-ndtri(0.025)
                     * np.sqrt((1.0 + alpha ** 2) / (1.0 - alpha ** 2)))
    c_a = float(text)
    if c_a <= 0:
        raise ValueError("--ca must be positive or 'auto'")
    return c_a


def _model_spec(args) -> ModelSpec:
    # ModelSpec rejects parameters that do not belong to the family, so
    # stray flags surface as usage errors with its message
    return ModelSpec(args.family, args.n, args.alpha, beta=args.beta,
                     r=args.r, sigma=_parse_weights(args.sigma),
                     tau=_parse_weights(args.tau))


def _cmd_moment(args) -> int:
    route = args.route
    if route == "auto":
        route = "triangle" if (args.m == 2 and args.r == 0.0) else "jet"
    if route == "triangle" and (args.m != 2 or args.r != 0.0):
        raise ValueError("the triangle route only computes m=2 at r=0")
    tol = {} if args.tol_rel is None else {"tol_rel": args.tol_rel}
    if route == "triangle":
        res = second_moment_scaled(args.n, args.alpha, **tol)
    else:
        res = moment(args.m, args.n, args.alpha, args.r, **tol)
    params = {"m": args.m, "n": args.n, "alpha": args.alpha, "r": args.r,
              "route": route}
    results = {"error_estimate": res.quad.error_estimate,
               "nodes": res.quad.nodes_used,
               "converged": res.quad.converged}
    _emit("moment", params, None, results,
          ["m", "n", "alpha", "r", "value"],
          [[args.m, args.n, args.alpha, args.r, res.value]],
          args.format, args.out)
    return _EXIT_OK if res.quad.converged else _EXIT_NOCONV


def _cmd_table(args) -> int:
    rows = []
    all_conv = True
    worst = 0.0
    within = True
    if args.which == "second_moment":
        a = _SECOND_MOMENT_ALPHA
        params = {"alpha": a, "table": args.which}
        columns = ["n", "value", "reference", "abs_dev", "tolerance"]
        for n, ref in _SECOND_MOMENT_ROWS:
            res = second_moment_scaled(n, a)
            all_conv &= res.quad.converged
            dev = abs(res.value - ref)
            worst = max(worst, dev)
            within &= dev <= _SECOND_MOMENT_TOL
            rows.append([n, res.value, ref, dev, _SECOND_MOMENT_TOL])
        lim = limit_second_moment(a)
        dev = abs(lim - _SECOND_MOMENT_LIMIT)
        within &= dev <= _SECOND_MOMENT_LIMIT_TOL
        rows.append(["inf", lim, _SECOND_MOMENT_LIMIT, dev,
                     _SECOND_MOMENT_LIMIT_TOL])
        results = {"max_abs_dev": worst, "all_within": within,
                   "converged": all_conv}
    else:
        n = _INDEP_MOMENT_N
        a = _INDEP_MOMENT_ALPHA
        r = _CORR_MOMENT_R if args.which == "correlated_moments" else 0.0
        spec_rows = (_CORR_MOMENT_ROWS if args.which == "correlated_moments"
                     else _INDEP_MOMENT_ROWS)
        params = {"alpha": a, "n": n, "r": r, "table": args.which}
        columns = ["k", "value", "reference", "rel_dev", "tolerance"]
        for k, ref, tol in spec_rows:
            res = moment(k, n, a, r)
            all_conv &= res.quad.converged
            dev = abs(res.value - ref) / abs(ref)
            worst = max(worst, dev)
            within &= dev <= tol
            rows.append([k, res.value, ref, dev, tol])
        results = {"max_rel_dev": worst, "all_within": within,
                   "converged": all_conv}
    _emit("table", params, None, results, columns, rows,
          args.format, args.out)
    if not all_conv:
        return _EXIT_NOCONV
    return _EXIT_OK if within else _EXIT_TABLE_DIFF


def _cmd_density(args) -> int:
    if args.order < 2:
        raise ValueError("need --order >= 2")
    lo, hi = args.support
    moments = []
    all_conv = True
    for m in range(args.order + 1):
        res = moment(m, args.n, args.alpha, args.r)
        all_conv &= res.quad.converged
        moments.append(res.value)
    d = legendre_from_moments(moments, (lo, hi))
    xs = np.linspace(lo, hi, args.grid_points)
    fs = evaluate_density(d, xs)
    params = {"alpha": args.alpha, "grid_points": args.grid_points,
              "n": args.n, "order": args.order, "r": args.r,
              "support_hi": hi, "support_lo": lo}
    results = {"coefficients": json.dumps([float(c) for c in d.coeffs]),
               "min_density": density_minimum(d),
               "moments": json.dumps(moments),
               "converged": all_conv}
    rows = [[float(x), float(f)] for x, f in zip(xs, fs)]
    _emit("density", params, None, results, ["x", "density"], rows,
          args.format, args.out)
    return _EXIT_OK if all_conv else _EXIT_NOCONV


def _cmd_simulate(args) -> int:
    spec = _model_spec(args)
    out = sample_theta(spec, args.reps, args.seed, scale=args.scale,
                       threads=args.threads)
    params = {"alpha": spec.alpha, "beta": spec.beta, "family": spec.family,
              "n": spec.n, "r": spec.r, "reps": args.reps,
              "scale": args.scale,
              "sigma": ",".join(repr(w) for w in spec.sigma),
              "tau": ",".join(repr(w) for w in spec.tau)}
    mean = float(np.mean(out.values))
    var = float(np.var(out.values))
    results = {"mean": mean, "variance": var,
               "se_mean": float(np.sqrt(var / args.reps)),
               "redraws": out.redraws}
    if args.scale:
        results["scaling_constant"] = scaling_constant(
            spec.family, spec.alpha, spec.beta, spec.r)
    rows = [[i, float(v)] for i, v in enumerate(out.values)]
    _emit("simulate", params, args.seed, results, ["index", "value"],
          rows, args.format, args.out)
    return _EXIT_OK


def _cmd_rate(args) -> int:
    ns = _parse_ns(args.ns)
    template = ModelSpec(args.family, ns[0], args.alpha)
    fit_k = rate_fit(template, ns, args.reps, args.seed,
                     distance="kolmogorov", threads=args.threads)
    fit_w = rate_fit(template, ns, args.reps, args.seed,
                     distance="wasserstein1", threads=args.threads)
    params = {"alpha": args.alpha, "family": args.family,
              "ns": ",".join(str(n) for n in ns), "reps": args.reps}
    results = {
        "slope_kol": fit_k.slope,
        "intercept_kol": fit_k.intercept,
        "residual_kol": fit_k.residual,
        "scaled_residual_kol": fit_k.scaled_residual,
        "slope_w1": fit_w.slope,
        "intercept_w1": fit_w.intercept,
        "residual_w1": fit_w.residual,
        "scaled_residual_w1": fit_w.scaled_residual,
    }
    rows = [[n, k, w, c] for n, k, w, c
            in zip(ns, fit_k.distances, fit_w.distances, fit_k.scaled_const)]
    _emit("rate", params, args.seed, results,
          ["n", "distance_kol", "distance_w1", "scaled_const"], rows,
          args.format, args.out)
    return _EXIT_OK


def _cmd_power(args) -> int:
    c_a = _resolve_ca(args.ca, args.alpha)
    pw = mc_power(args.n, args.alpha, args.r, c_a, args.reps, args.seed,
                  threads=args.threads)
    bound = power_lower_bound(args.n, args.alpha, args.r, c_a,
                              c13=args.c13)
    params = {"alpha": args.alpha, "c13": args.c13, "ca": c_a,
              "n": args.n, "r": args.r, "reps": args.reps}
    results = {"power_mc": pw, "power_lower_bound": bound}
    _emit("power", params, args.seed, results,
          ["n", "alpha", "r", "ca", "power_mc", "power_lower_bound"],
          [[args.n, args.alpha, args.r, c_a, pw, bound]],
          args.format, args.out)
    return _EXIT_OK


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, metavar="PATH")


def _add_family_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", default="gaussian_independent",
                   choices=("gaussian_independent", "gaussian_correlated",
                            "second_chaos"))
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--sigma", default="1", metavar="W1,W2,...")
    p.add_argument("--tau", default="1", metavar="W1,W2,...")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ar1corr",
        description="Moments, densities, and normality diagnostics for "
                    "the empirical correlation of two AR(1) processes.")
    ap.add_argument("--version", action="version",
                    version=f"ar1corr {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("moment", help="one exact moment of sqrt(n) theta_n")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--route", choices=("auto", "jet", "triangle"),
                   default="auto")
    p.add_argument("--tol-rel", type=float, default=None)
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_moment)

    p = sub.add_parser("table", help="recompute a built-in reference table")
    p.add_argument("--which", required=True,
                   choices=("second_moment", "independent_moments",
                            "correlated_moments"))
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_table)

    p = sub.add_parser("density",
                       help="moment-matched polynomial density")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--order", type=int, default=8)
    p.add_argument("--support", type=float, nargs=2,
                   default=(-5.0, 5.0), metavar=("LO", "HI"))
    p.add_argument("--grid-points", type=int, default=201)
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_density)

    p = sub.add_parser("simulate", help="Monte-Carlo theta_n draws")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    _add_family_flags(p)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--scale", action="store_true")
    p.add_argument("--threads", type=int, default=_DEFAULT_THREADS)
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("rate", help="distance-to-normal decay fit")
    p.add_argument("--ns", required=True,
                   help="e.g. 50:3200:x2, 50:250:50, or 50,100,200")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--family", default="gaussian_independent",
                   choices=("gaussian_independent", "second_chaos"))
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=_DEFAULT_THREADS)
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_rate)

    p = sub.add_parser("power", help="power of the scaled correlation test")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--ca", default="auto",
                   help="critical value, or 'auto' for the 5%% level")
    p.add_argument("--c13", type=float, default=0.0)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=_DEFAULT_THREADS)
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_power)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except IntegrationError as exc:
        print(f"ar1corr: quadrature failed: {exc}", file=sys.stderr)
        return _EXIT_NOCONV
    except ValueError as exc:
        print(f"ar1corr: {exc}", file=sys.stderr)
        return _EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
