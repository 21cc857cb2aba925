"""
Command-line front end.

    gpgw fit --model GPGW --data builtin-I --format json
    gpgw compare --data builtin-II --models GPGW,W,E
    gpgw sample --model GPGW --alpha 1 --lambda 1 --theta 1 --b 1 --n 5 --seed 7
    gpgw ttt --data builtin-I
    gpgw curve --model GPGW --alpha 0.5 --lambda 1 --theta 3 --b 1 --which hazard --grid 0.01:5:50
    gpgw datasets

Exit codes: 0 success, 2 usage or input error, 3 optimizer did not converge
(the result is still written).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import analytics
from .datasets import BUILTINS
from .family import PARAM_NAMES, Distribution, Kind, make, spec_for
from .inference import DEFAULT_BATTERY, Comparison, Dataset, FitResult, GofReport, compare, fit, gof, ttt
from .numerics import DomainError

__all__ = ["main", "load_dataset", "parse_grid", "InputError", "EXIT_OK", "EXIT_USAGE", "EXIT_NOT_CONVERGED"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3

CURVES = ("pdf", "cdf", "hazard", "lorenz", "bonferroni")
_SPLIT = re.compile(r"[,\s]+")


class InputError(ValueError):
    """Unreadable data file, bad flag value or inconsistent parameters."""


# ---------------------------------------------------------------------------
# input
# ---------------------------------------------------------------------------

def load_dataset(source: str) -> Dataset:
    """A built-in sample by name, or numbers read from a UTF-8 text file.

    Numbers may be separated by whitespace, commas or newlines; lines whose
    first non-blank character is ``#`` are skipped.
    """
    if source in BUILTINS:
        return BUILTINS[source]
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read data file {source!r}: {exc}") from None
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        for token in _SPLIT.split(line):
            if not token:
                continue
            try:
                v = float(token)
            except ValueError:
                raise InputError(f"{source}, line {lineno}: {token!r} is not a number") from None
            if not (math.isfinite(v) and v > 0.0):
                raise InputError(f"{source}, line {lineno}: {token!r} is not a positive finite value")
            values.append(v)
    if not values:
        raise InputError(f"{source}: no observations found")
    return Dataset(path.name, values)


def parse_grid(text: str) -> np.ndarray:
    """``min:max:points`` to an evenly spaced grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"--grid expects min:max:points, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        points = int(parts[2])
    except ValueError:
        raise InputError(f"--grid expects min:max:points, got {text!r}") from None
    if points < 1:
        raise InputError(f"--grid {text!r} is empty (points must be at least 1)")
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise InputError(f"--grid {text!r} needs finite min <= max")
    return np.linspace(lo, hi, points)


def _param_map(args) -> Dict[str, float]:
    supplied = {"alpha": args.alpha, "lambda": args.lam, "theta": args.theta, "b": args.b, "beta": args.beta}
    return {k: v for k, v in supplied.items() if v is not None}


def _distribution(args) -> Distribution:
    return make(args.model, _param_map(args))


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _num(v):
    """JSON-safe number: NaN and infinities become null."""
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _row(kind: Kind, res: Optional[FitResult], rep: Optional[GofReport], error: Optional[str] = None) -> dict:
    row = {"model": kind.value}
    spec = spec_for(kind)
    for name in PARAM_NAMES:
        row[name] = _num(res.estimates[name]) if res is not None and name in spec.free_params else None
    for name in PARAM_NAMES:
        row[f"se_{name}"] = _num(res.std_errors[name]) if res is not None and name in spec.free_params else None
    fields = ("neg_log_lik", "aic", "caic", "ks", "ks_pvalue", "w_star", "a_star")
    for f in fields:
        row[f] = _num(getattr(rep, f)) if rep is not None else None
    row["k"] = spec.n_free
    row["n"] = res.n if res is not None else None
    row["converged"] = res.converged if res is not None else False
    row["std_errors_available"] = res.std_errors_available if res is not None else False
    row["gradient_norm"] = _num(res.gradient_norm) if res is not None else None
    row["n_starts_used"] = res.n_starts_used if res is not None else None
    row["error"] = error
    return row


def _csv(rows: List[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: "" if v is None else (repr(v) if isinstance(v, float) else v)
                         for k, v in row.items()})
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _fmt(v, spec="{:.4f}"):
    return "-" if v is None else spec.format(v)


def _table(rows: List[dict]) -> str:
    header = ("model", "-L", "AIC", "CAIC", "KS", "p-value", "W*", "A*", "estimates")
    lines = []
    for r in rows:
        if r["error"]:
            lines.append((r["model"], "failed: " + r["error"]))
            continue
        est = ", ".join(f"{name}={r[name]:.6g} ({_fmt(r['se_' + name], '{:.4g}')})"
                        for name in PARAM_NAMES if r[name] is not None)
        if not r["converged"]:
            est += "  [not converged]"
        lines.append((r["model"], _fmt(r["neg_log_lik"], "{:.3f}"), _fmt(r["aic"], "{:.3f}"),
                      _fmt(r["caic"], "{:.3f}"), _fmt(r["ks"]), _fmt(r["ks_pvalue"]),
                      _fmt(r["w_star"]), _fmt(r["a_star"]), est))
    widths = [max([len(header[i])] + [len(l[i]) for l in lines if len(l) > 2]) for i in range(len(header) - 1)]
    out = ["  ".join(h.ljust(w) for h, w in zip(header, widths)) + "  " + header[-1]]
    for l in lines:
        if len(l) == 2:
            out.append(l[0].ljust(widths[0]) + "  " + l[1])
        else:
            out.append("  ".join(c.ljust(w) for c, w in zip(l, widths)) + "  " + l[-1])
    return "\n".join(out) + "\n"


def _columns(names: Sequence[str], columns: Sequence[np.ndarray], fmt: str) -> str:
    if fmt == "json":
        return _json([{k: _num(v) for k, v in zip(names, vals)} for vals in zip(*columns)])
    rows = [dict(zip(names, map(float, vals))) for vals in zip(*columns)]
    if fmt == "csv":
        return _csv(rows)
    out = ["  ".join(f"{n:>14s}" for n in names)]
    out += ["  ".join(f"{r[n]:14.8g}" for n in names) for r in rows]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_fit(args, out) -> int:
    data = load_dataset(args.data)
    res = fit(args.model, data)
    rep = gof(res.distribution(), data, res.log_lik)
    row = _row(res.kind, res, rep)
    row["dataset"] = data.name
    if args.format == "json":
        out.write(_json(row))
    elif args.format == "csv":
        out.write(_csv([row]))
    else:
        out.write(f"dataset {data.name} (n={data.n})\n" + _table([row]))
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_compare(args, out) -> int:
    data = load_dataset(args.data)
    kinds = [m.strip() for m in args.models.split(",") if m.strip()] if args.models else DEFAULT_BATTERY
    if not kinds:
        raise InputError("--models is empty")
    kinds = [spec_for(k).kind for k in kinds]
    ranking: List[Comparison] = compare(kinds, data)
    rows = [_row(c.kind, c.fit, c.gof, c.error) for c in ranking]
    for rank, row in enumerate(rows, start=1):
        row["rank"] = rank if row["error"] is None else None
    if args.format == "json":
        out.write(_json({"dataset": data.name, "n": data.n, "ranking": rows}))
    elif args.format == "csv":
        out.write(_csv(rows))
    else:
        out.write(f"dataset {data.name} (n={data.n}), ranked by AIC\n" + _table(rows))
    any_converged = any(c.fit is not None and c.fit.converged for c in ranking)
    return EXIT_OK if any_converged else EXIT_NOT_CONVERGED


def cmd_sample(args, out) -> int:
    if args.n < 1:
        raise InputError(f"--n must be at least 1, got {args.n}")
    d = _distribution(args)
    x = d.sample(args.n, np.random.default_rng(args.seed))
    out.write("".join(f"{v!r}\n" for v in map(float, x)))
    return EXIT_OK


def cmd_ttt(args, out) -> int:
    curve = ttt(load_dataset(args.data))
    out.write(_columns(("r_over_n", "g"), (curve.r_over_n, curve.g), args.format))
    return EXIT_OK


def _default_grid(d: Distribution, which: str) -> np.ndarray:
    if which in ("lorenz", "bonferroni"):
        return np.linspace(0.01, 1.0, 100)
    lo = float(d.quantile(0.001)) if which == "hazard" else 0.0
    return np.linspace(lo, float(d.quantile(0.999)), 101)


def cmd_curve(args, out) -> int:
    d = _distribution(args)
    grid = parse_grid(args.grid) if args.grid else _default_grid(d, args.which)
    if args.which in ("lorenz", "bonferroni"):
        if np.any((grid <= 0.0) | (grid > 1.0)):
            raise InputError(f"{args.which} grid must lie in (0, 1]")
        points = [analytics.bonferroni_lorenz(d, float(p)) for p in grid]
        values = np.array([getattr(pt, args.which) for pt in points])
        out.write(_columns(("p", args.which), (grid, values), args.format))
        return EXIT_OK
    if args.which == "hazard" and np.any(grid <= 0.0):
        raise InputError("hazard grid must be strictly positive")
    values = np.atleast_1d(getattr(d, {"pdf": "pdf", "cdf": "cdf", "hazard": "hazard"}[args.which])(grid))
    out.write(_columns(("x", args.which), (grid, values), args.format))
    return EXIT_OK


def cmd_datasets(args, out) -> int:
    rows = [{"name": name, "n": ds.n, "mean": float(ds.values.mean()),
             "min": float(ds.values.min()), "max": float(ds.values.max())}
            for name, ds in BUILTINS.items()]
    if args.format == "json":
        out.write(_json(rows))
    elif args.format == "csv":
        out.write(_csv(rows))
    else:
        out.write("".join(f"{r['name']:<12s} n={r['n']:<4d} mean={r['mean']:.4f}  "
                          f"range=[{r['min']:g}, {r['max']:g}]\n" for r in rows))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_format(p, default):
    p.add_argument("--format", choices=("json", "csv", "table"), default=default,
                   help=f"output format (default: {default})")


def _add_params(p):
    p.add_argument("--model", required=True, help="catalog model, e.g. GPGW, PGW, W, EW")
    p.add_argument("--alpha", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--beta", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpgw", description="GPGW lifetime models: fitting, "
                                     "model comparison, sampling and plot-ready curves.")
    sub = parser.add_subparsers(dest="command", required=True)
    data_help = f"one of {', '.join(BUILTINS)} or a text file of positive numbers"

    p = sub.add_parser("fit", help="maximum-likelihood fit of one model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help=data_help)
    _add_format(p, "table")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="fit several models and rank them by AIC")
    p.add_argument("--data", required=True, help=data_help)
    p.add_argument("--models", help=f"comma-separated list (default: {','.join(DEFAULT_BATTERY)})")
    _add_format(p, "table")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sample", help="draw random values, one per line")
    _add_params(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("ttt", help="scaled total time on test transform")
    p.add_argument("--data", required=True, help=data_help)
    _add_format(p, "csv")
    p.set_defaults(func=cmd_ttt)

    p = sub.add_parser("curve", help="evaluate a function on a grid")
    _add_params(p)
    p.add_argument("--which", choices=CURVES, default="pdf")
    p.add_argument("--grid", help="min:max:points (p-grid for lorenz/bonferroni)")
    _add_format(p, "csv")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("datasets", help="list the built-in samples")
    _add_format(p, "table")
    p.set_defaults(func=cmd_datasets)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (InputError, DomainError) as exc:
        print(f"gpgw {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
