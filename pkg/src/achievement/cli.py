"""Command-line front end.

Every command prints one JSON document (or CSV where it makes sense) that
embeds the fully resolved configuration.  Exit codes: 0 success, 2 invalid
input, 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import __version__
from .errors import AchievementError, DomainError
from .function_model import BUILTINS, FunctionSpec, envelope_only, get_function
from .kakeya import khm_scan
from .sequence import Coefficients
from .subsum_engine import (
    cloud_csv_rows,
    cloud_to_dict,
    enumerate_subsums,
    partition_identity,
    render_number,
)
from .thresholds import ap_search, classify, compute_thresholds, subsum_alphabet

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    command: str
    function: Optional[str]
    envelope: Optional[dict]
    coeffs: list
    mode: str
    format: str
    allow_mu_zero: bool
    x: Optional[str] = None
    x_min: Optional[str] = None
    x_max: Optional[str] = None
    steps: Optional[int] = None
    depth: Optional[int] = None
    n_max: Optional[int] = None
    blocks: Optional[int] = None
    out: Optional[str] = None


def parse_number(text: str, exact: bool):
    try:
        q = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"not a number: {text!r}") from None
    return q if exact else float(q)


def parse_envelope(text: str, exact: bool) -> dict:
    keys = {"a": "a", "b": "b", "r": "r", "eps": "epsilon", "epsilon": "epsilon"}
    out = {}
    for item in text.split(","):
        if "=" not in item:
            raise DomainError(f"envelope entries look like a=0.5, got {item!r}")
        key, val = (s.strip() for s in item.split("=", 1))
        if key not in keys:
            raise DomainError(f"unknown envelope constant {key!r}")
        out[keys[key]] = parse_number(val, exact)
    missing = {"a", "b", "r"} - out.keys()
    if missing:
        raise DomainError(f"envelope is missing {', '.join(sorted(missing))}")
    out.setdefault("epsilon", 1)
    return out


def _json_default(v):
    if isinstance(v, Fraction):
        return render_number(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if hasattr(v, "value"):
        return v.value
    raise TypeError(f"not serializable: {type(v).__name__}")


def _plain(v):
    """Numbers as JSON values: exact rationals become "p/q" strings."""
    if isinstance(v, Fraction):
        return render_number(v)
    if isinstance(v, dict):
        return {k: _plain(u) for k, u in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(u) for u in v]
    return v


class Context:
    """Inputs resolved from the command line."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.exact = args.mode == "exact"
        if args.function and args.envelope:
            raise DomainError("give either --function or --envelope, not both")
        if not args.function and not args.envelope:
            raise DomainError("one of --function or --envelope is required")
        if self.exact and args.function != "identity":
            raise DomainError("exact mode requires --function identity")
        if args.function:
            self.spec: FunctionSpec = get_function(args.function)
            env = None
        else:
            env = parse_envelope(args.envelope, self.exact)
            self.spec = envelope_only(env["a"], env["b"], env["r"], env["epsilon"])
        self.env_dict = env
        values = [parse_number(t, self.exact) for t in args.coeffs.split(",") if t.strip()]
        self.coeffs = Coefficients.from_values(values)

    def x(self, text: str):
        x = parse_number(text, self.exact)
        eps = self.spec.envelope.epsilon
        if not 0 < x < 1:
            raise DomainError(f"x must lie in (0, 1), got {text}")
        if x > eps:
            raise DomainError(f"x={text} exceeds epsilon={eps} of {self.spec.name!r}")
        return x

    def config(self) -> RunConfig:
        a = self.args
        return RunConfig(
            command=a.command,
            function=a.function,
            envelope=None if self.env_dict is None else _plain(self.env_dict),
            coeffs=[render_number(k) for k in self.coeffs.k],
            mode=a.mode,
            format=a.format,
            allow_mu_zero=a.allow_mu_zero,
            x=getattr(a, "x", None),
            x_min=getattr(a, "x_min", None),
            x_max=getattr(a, "x_max", None),
            steps=getattr(a, "steps", None),
            depth=getattr(a, "depth", None),
            n_max=getattr(a, "n_max", None),
            blocks=getattr(a, "blocks", None),
            out=a.out,
        )


def _document(ctx: Context, command: str, result: dict) -> dict:
    return {
        "schema": f"achievement.{command}/{SCHEMA_VERSION}",
        "version": __version__,
        "config": asdict(ctx.config()),
        "result": _plain(result),
    }


def _write(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def _dump_csv(schema: str, rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {schema}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


# --- commands ------------------------------------------------------------------


def cmd_thresholds(ctx: Context) -> str:
    th = compute_thresholds(ctx.coeffs, ctx.spec, ctx.args.allow_mu_zero)
    return _dump_json(_document(ctx, "thresholds", th.as_dict()))


def cmd_classify(ctx: Context) -> str:
    x = ctx.x(ctx.args.x)
    verdict = classify(ctx.coeffs, ctx.spec, x, allow_mu_zero=ctx.args.allow_mu_zero)
    return _dump_json(_document(ctx, "classify", verdict.as_dict()))


SWEEP_COLUMNS = ["x", "kind", "label", "d_I", "d_IM", "d_NI", "d_CI", "d_C"]


def sweep_rows(ctx: Context, x_min, x_max, steps: int) -> list[list]:
    """Grid rows (endpoints inclusive) plus one row at every threshold inside the range."""
    th = compute_thresholds(ctx.coeffs, ctx.spec, ctx.args.allow_mu_zero)
    if steps < 2:
        raise DomainError("--steps must be at least 2")
    if ctx.exact:
        grid = [x_min + (x_max - x_min) * Fraction(i, steps - 1) for i in range(steps)]
    else:
        grid = [float(v) for v in np.linspace(x_min, x_max, steps)]
    points = [(x, 0, "grid") for x in grid]
    for name in ("d_I", "d_IM", "d_NI", "d_CI", "d_C"):
        d = getattr(th, name)
        if d is not None and x_min <= d <= x_max and 0 < d < 1:
            points.append((d, 1, f"crossing:{name}"))
    points.sort(key=lambda p: (p[0], p[1], p[2]))
    fmt = "text"
    thr = [th.d_I, th.d_IM, th.d_NI, th.d_CI, th.d_C]
    rows = []
    for x, _, kind in points:
        if x > th.epsilon:
            label = "OutOfDomain"
        else:
            label = classify(ctx.coeffs, ctx.spec, x, thresholds=th).label.value
        rows.append(
            [str(render_number(x, fmt)), kind, label]
            + ["" if d is None else str(render_number(d, fmt)) for d in thr]
        )
    return rows


def cmd_sweep(ctx: Context) -> str:
    a = ctx.args
    x_min, x_max = ctx.x(a.x_min), ctx.x(a.x_max)
    if x_max <= x_min:
        raise DomainError("--x-max must exceed --x-min")
    rows = sweep_rows(ctx, x_min, x_max, a.steps)
    if a.format == "csv":
        return _dump_csv(f"achievement.sweep/{SCHEMA_VERSION}", [SWEEP_COLUMNS] + rows)
    return _dump_json(_document(ctx, "sweep", {"columns": SWEEP_COLUMNS, "rows": rows}))


def cmd_enumerate(ctx: Context) -> str:
    a = ctx.args
    x = ctx.x(a.x)
    cloud = enumerate_subsums(ctx.coeffs, ctx.spec, x, a.depth, mode=a.mode)
    if a.format == "csv":
        return _dump_csv(f"achievement.enumerate/{SCHEMA_VERSION}", cloud_csv_rows(cloud))
    return _dump_json(_document(ctx, "enumerate", cloud_to_dict(cloud)))


def cmd_kakeya(ctx: Context) -> str:
    x = ctx.x(ctx.args.x)
    scan = khm_scan(ctx.coeffs, ctx.spec, x, ctx.args.n_max)
    return _dump_json(_document(ctx, "kakeya", scan.as_dict()))


def cmd_ap_search(ctx: Context) -> str:
    alphabet = subsum_alphabet(ctx.coeffs)
    ap = ap_search(alphabet, allow_mu_zero=ctx.args.allow_mu_zero)
    result = {
        "alphabet": list(alphabet.values),
        "mu": ap.mu,
        "lambda": ap.lam,
        "s": ap.s,
        "mu_zero_allowed": ap.mu_zero_allowed,
        "progression": ap.members(),
    }
    return _dump_json(_document(ctx, "ap-search", result))


def cmd_minkowski_check(ctx: Context) -> str:
    a = ctx.args
    x = ctx.x(a.x)
    checks = partition_identity(ctx.coeffs, ctx.spec, x, a.blocks, mode=a.mode)
    result = {
        "all_equal": all(c.equal and c.tails_equal for c in checks),
        "partitions": [
            {
                "part1": [render_number(v) for v in c.part1],
                "part2": [render_number(v) for v in c.part2],
                "full_points": c.full_points,
                "sum_points": c.sum_points,
                "equal": c.equal,
                "tails_equal": c.tails_equal,
            }
            for c in checks
        ],
    }
    return _dump_json(_document(ctx, "minkowski-check", result))


COMMANDS = {
    "thresholds": cmd_thresholds,
    "classify": cmd_classify,
    "sweep": cmd_sweep,
    "enumerate": cmd_enumerate,
    "kakeya": cmd_kakeya,
    "ap-search": cmd_ap_search,
    "minkowski-check": cmd_minkowski_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="achievement",
        description="Classify and explore achievement sets of generalized multigeometric series.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--function", choices=sorted(BUILTINS), help="built-in function")
    common.add_argument("--envelope", help="envelope-only function, e.g. a=0.5,b=1,r=1,eps=1")
    common.add_argument("--coeffs", required=True, help="comma-separated coefficients, e.g. 4,3,2,2")
    common.add_argument("--mode", choices=["float", "exact"], default="float")
    common.add_argument("--format", choices=["json", "csv"], help="default: csv for sweep, json otherwise")
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument(
        "--allow-mu-zero",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="admit progressions starting at 0 (default: yes)",
    )

    sub.add_parser("thresholds", parents=[common], help="the five thresholds and the progression")
    p = sub.add_parser("classify", parents=[common], help="region verdict at one x")
    p.add_argument("--x", required=True)
    p = sub.add_parser("sweep", parents=[common], help="verdicts over a grid of x")
    p.add_argument("--x-min", default="0.01")
    p.add_argument("--x-max", default="0.99")
    p.add_argument("--steps", type=int, default=99)
    p = sub.add_parser("enumerate", parents=[common], help="finite-depth subsum cloud")
    p.add_argument("--x", required=True)
    p.add_argument("--depth", type=int, required=True)
    p = sub.add_parser("kakeya", parents=[common], help="term-versus-tail scan")
    p.add_argument("--x", required=True)
    p.add_argument("--n-max", type=int, default=64)
    sub.add_parser("ap-search", parents=[common], help="longest progression in the subsum alphabet")
    p = sub.add_parser("minkowski-check", parents=[common], help="partition identity for subsum sets")
    p.add_argument("--x", required=True)
    p.add_argument("--blocks", type=int, default=4)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "sweep" else "json"
    try:
        ctx = Context(args)
        text = COMMANDS[args.command](ctx)
    except AchievementError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _write(text, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
