"""Command-line interface: run, report, cell, oracle."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import cell as cellmod
from . import oracles
from .config import load_config
from .errors import ConfigError, NumericalBlowup, UsageError

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_BLOWUP = 3
EXIT_IO = 4


def _err(msg: str) -> None:
    print(f"lsreinit: {msg}", file=sys.stderr)


def cmd_run(args) -> int:
    from .experiments import run_experiment

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_SCHEMA
    except OSError as exc:
        _err(f"cannot read config: {exc}")
        return EXIT_IO
    try:
        out = run_experiment(cfg, args.out)
    except NumericalBlowup as exc:
        _err(f"numerical blowup at t={exc.time!r}")
        return EXIT_BLOWUP
    except (ConfigError, UsageError) as exc:
        _err(f"config error: {exc}")
        return EXIT_SCHEMA
    except OSError as exc:
        _err(f"I/O error: {exc}")
        return EXIT_IO
    print(out)
    return EXIT_OK


def _halved(a: float, b: float) -> bool:
    return b != 0 and abs(a / b - 2.0) < 1e-9


def format_report(report: dict) -> str:
    """Convergence table: parameter, error, observed order log2(e_k / e_{k+1}).

    The order column is filled only where the parameter was halved.
    """
    name = report.get("table_parameter") or "parameter"
    rows = [r for r in report.get("table", []) if r.get("error") is not None]
    lines = [f"experiment: {report.get('experiment')}"]
    if rows:
        lines.append(f"{name:>14} {'error':>14} {'order':>8}")
    prev = None
    for r in rows:
        e, p = r["error"], r["parameter"]
        order = ""
        if prev is not None and prev[1] > 0 and e > 0 and _halved(prev[0], p):
            order = f"{math.log2(prev[1] / e):8.3f}"
        lines.append(f"{p:>14.6g} {e:>14.6e} {order:>8}")
        prev = (p, e)
    if report.get("experiment") == "theta-sweep" and rows:
        errs = [r["error"] for r in rows]
        flag = all(b < a for a, b in zip(errs, errs[1:]))
        lines.append(f"strictly decreasing: {'yes' if flag else 'no'}")
    for key, val in sorted(report.get("errors", {}).items()):
        if isinstance(val, (int, float, bool)):
            lines.append(f"{key}: {val}")
        elif key == "verdicts":
            for v in val:
                lines.append(f"verdict x={v['x']} t={v['t']}: {v['verdict']}")
    for w in report.get("warnings", []):
        lines.append(f"warning: {w}")
    return "\n".join(lines)


def cmd_report(args) -> int:
    d = Path(args.dir)
    if not (d / "manifest.csv").is_file():
        _err(f"{d}: no manifest.csv")
        return EXIT_IO
    try:
        report = json.loads((d / "report.json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        _err(f"{d}: cannot read report.json: {exc}")
        return EXIT_IO
    print(format_report(report))
    return EXIT_OK


def cmd_cell(args) -> int:
    try:
        prof = cellmod.two_phase_profile(args.a, args.b, args.theta)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_SCHEMA
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["lambda", repr(cellmod.cell_lambda(prof))])
    w.writerow(["tau", "v"])
    for s, v in cellmod.corrector_table(prof, args.v0, args.samples):
        w.writerow([repr(s), repr(v)])
    return EXIT_OK


def _oracle_rows(name: str, rows, resolution: int):
    if name == "two-bumps":
        yield ["x", "t", "w", "d"]
        for x, t in rows:
            w, d = oracles.example_two_bumps(x, t)
            yield [x, t, w, d]
    elif name == "bounded-speed":
        yield ["x", "t", "w", "d"]
        for x, t in rows:
            yield [x, t, oracles.example_bounded_speed_w(x, t), oracles.example_bounded_speed_d(x, t)]
    elif name == "hopf-lax-two-bumps":
        yield ["x", "t", "w"]
        for x, t in rows:
            yield [x, t, oracles.hopf_lax_w(oracles.two_bump_u0, x, t, resolution)]
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(name)


def cmd_oracle(args) -> int:
    rows = []
    try:
        for k, line in enumerate(sys.stdin):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                if k == 0:
                    continue  # header row
                raise
            if len(vals) != 2:
                raise ValueError(f"expected 'x,t', got {line!r}")
            rows.append(vals)
    except ValueError as exc:
        _err(f"bad input: {exc}")
        return EXIT_SCHEMA
    w = csv.writer(sys.stdout, lineterminator="\n")
    for row in _oracle_rows(args.name, rows, args.resolution):
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lsreinit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment from a JSON config")
    r.add_argument("config")
    r.add_argument("--out", help="artifact directory (default: outputs.dir of the config)")
    r.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="print the convergence table of a run directory")
    rep.add_argument("dir")
    rep.set_defaults(func=cmd_report)

    c = sub.add_parser("cell", help="cell problem for a two-phase profile a | b")
    c.add_argument("--a", type=float, required=True)
    c.add_argument("--b", type=float, required=True)
    c.add_argument("--theta", type=float, required=True)
    c.add_argument("--v0", type=float, default=0.0)
    c.add_argument("--samples", type=int, default=11)
    c.set_defaults(func=cmd_cell)

    o = sub.add_parser("oracle", help="evaluate an exact solution at 'x,t' rows from stdin")
    o.add_argument("name", choices=["two-bumps", "bounded-speed", "hopf-lax-two-bumps"])
    o.add_argument("--resolution", type=int, default=10_000)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
