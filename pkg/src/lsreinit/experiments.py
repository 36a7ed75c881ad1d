"""Experiment runners behind ``lsreinit run``.

Each runner returns a result dict; :func:`run_experiment` writes the
artifacts: CSVs, ``report.json`` (deterministic), ``timings.json``,
``manifest.csv`` and ``plot.py``.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import cell as cellmod
from .config import RunConfig
from .evolve import (matched_error, relax_corrector, solve_averaged, solve_base, solve_iterative,
                     solve_theta)
from .geometry import (ExtinctionParams, classify_continuity, discrete_lipschitz,
                       extract_interface, front_points, gradient_deviation, hausdorff,
                       signed_distance_field)
from .errors import ConfigError
from .grid import Field, Trajectory, linf_distance, make_grid, sample, write_trajectory
from .model import CorrectorSpec, H1Spec, Schedule
from .problems import make_problem
from .scheme import CflPolicy


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LEVELSET_THREADS", "1")))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    """Order-preserving map; runs in worker processes when LEVELSET_THREADS > 1."""
    n = min(_threads(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------------- set-up

class Setup:
    """Objects built from a config: grid, u0, H1, corrector, policy."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.grid = make_grid(cfg.grid.lo, cfg.grid.hi, cfg.grid.n, cfg.grid.ghost)
        self.problem = make_problem(cfg.problem.name, cfg.problem.params)
        if self.grid.dim not in self.problem.dims:
            raise ConfigError(f"problem {self.problem.name!r} does not support dim={self.grid.dim}")
        self.u0 = sample(self.problem.u0, self.grid)
        self.h1 = H1Spec(cfg.h1.velocity, dict(cfg.h1.params))
        c = cfg.corrector
        self.corr = CorrectorSpec(c.eps0, c.h_variant, c.beta_kind).resolved(self.grid.min_dx)
        self.policy = CflPolicy(cfg.cfl, cfg.integrator)
        self.L0 = self.problem.L0 if self.problem.L0 is not None else discrete_lipschitz(self.u0)

    def exact_applies(self) -> bool:
        ev = self.problem.exact_velocity
        if ev is None:
            return False
        ref = H1Spec(ev[0], dict(ev[1]))
        return ref == self.h1 or (ref.velocity == self.h1.velocity
                                  and ref.L1 == self.h1.L1 and ref.L2 == self.h1.L2)

    def exact(self, which: str, t: float) -> Field | None:
        f = self.problem.exact_w if which == "w" else self.problem.exact_d
        if f is None or not self.exact_applies():
            return None
        return sample(lambda *c: f(t, *c), self.grid, t)

    def region(self):
        r = self.cfg.region_radius
        if r is None:
            return None
        return lambda *c: np.sqrt(sum(ci ** 2 for ci in c)) <= r

    def constants(self, **extra) -> dict:
        out = {"L0": self.L0, "L1": self.h1.L1, "L2": self.h1.L2,
               "eps0": self.corr.eps0, "dx": list(self.grid.dx)}
        out.update(extra)
        return out

    def cone_warnings(self, T: float) -> list:
        pts = front_points(self.u0)
        if len(pts) == 0:
            return []
        reach = self.h1.L2 * T
        g = self.grid
        margin = min(min(pts[:, k].min() - g.lo[k], g.hi[k] - pts[:, k].max()) for k in range(g.dim))
        if reach >= margin:
            return [f"cone-margin: fronts may travel L2*T={reach:.4g} but start {margin:.4g} "
                    f"from the boundary"]
        return []


def _orders(errors):
    out = [None]
    for a, b in zip(errors, errors[1:]):
        out.append(math.log2(a / b) if a > 0 and b > 0 else None)
    return out


# ------------------------------------------------------------- runners

def _evolve(setup: Setup, out: Path) -> dict:
    cfg = setup.cfg
    T = cfg.T
    traj = solve_base(setup.u0, setup.h1, T, setup.policy, cfg.snap_every, snap_times=cfg.snap_times)
    runs = {"base": traj}
    if cfg.theta is not None:
        runs["theta"] = solve_theta(setup.u0, setup.h1, setup.corr, float(cfg.theta), T,
                                    setup.policy, cfg.snap_every, snap_times=cfg.snap_times)
    table, errors = [], {}
    for snap in traj:
        ex = setup.exact("w", snap.time)
        if ex is not None and snap.time > 0:
            e = linf_distance(snap, ex, setup.region())
            table.append({"parameter": snap.time, "error": e})
    if table:
        errors["w_linf_max"] = max(r["error"] for r in table)
    errors["lipschitz_final"] = discrete_lipschitz(traj.final)
    return {"trajectories": runs, "table": table, "table_parameter": "t", "errors": errors,
            "constants": setup.constants(theta=cfg.theta, dt=traj.meta["dt_max"])}


def _sweep_member(args):
    cfg_json, theta = args
    setup = Setup(RunConfig.model_validate_json(cfg_json))
    cfg = setup.cfg
    traj = solve_theta(setup.u0, setup.h1, setup.corr, theta, cfg.T, setup.policy,
                       cfg.snap_every, snap_times=cfg.snap_times)
    return traj


def _theta_sweep(setup: Setup, out: Path) -> dict:
    cfg = setup.cfg
    thetas = [float(t) for t in cfg.theta]
    trajs = _parallel_map(_sweep_member, [(cfg.model_dump_json(), th) for th in thetas])
    ref = setup.exact("d", cfg.T)
    table = []
    for th, tr in zip(thetas, trajs):
        row = {"parameter": th, "lipschitz_max": max(discrete_lipschitz(s) for s in tr)}
        if ref is not None:
            row["error"] = linf_distance(tr.final, ref, setup.region())
        table.append(row)
    errors = {}
    if ref is not None:
        errs = [r["error"] for r in table]
        errors["strictly_decreasing"] = all(b < a for a, b in zip(errs, errs[1:]))
        errors["final_error"] = errs[-1]
    runs = {f"theta_{th:g}": tr for th, tr in zip(thetas, trajs)}
    return {"trajectories": runs, "table": table, "table_parameter": "theta", "errors": errors,
            "constants": setup.constants(theta=thetas, dt=[tr.meta["dt_max"] for tr in trajs])}


def _reinit(setup: Setup, out: Path) -> dict:
    rc = setup.cfg.reinit
    final, steps, change = relax_corrector(setup.u0, setup.corr, setup.policy, rc.tol, rc.max_steps)
    errors = {
        "gradient_deviation": gradient_deviation(final, rc.band),
        "initial_gradient_deviation": gradient_deviation(setup.u0, rc.band),
        "interface_shift": hausdorff(extract_interface(setup.u0), extract_interface(final)),
        "steps": steps, "last_change": change, "converged": change < rc.tol,
    }
    traj = Trajectory([setup.u0, final], {"solver": "corrector"})
    return {"trajectories": {"reinit": traj}, "table": [], "errors": errors,
            "constants": setup.constants(theta=None)}


def _homog_member(args):
    cfg_json, eps = args
    setup = Setup(RunConfig.model_validate_json(cfg_json))
    cfg = setup.cfg
    sched = Schedule.from_eps(eps, float(cfg.theta))
    it = solve_iterative(setup.u0, setup.h1, setup.corr, sched, cfg.T, setup.policy)
    av = solve_averaged(setup.u0, setup.h1, setup.corr, sched.theta, cfg.T, setup.policy,
                        snap_times=it.times[1:-1])
    return it, av, sched


def _homogenize(setup: Setup, out: Path) -> dict:
    cfg = setup.cfg
    res = _parallel_map(_homog_member, [(cfg.model_dump_json(), e) for e in cfg.eps])
    table = []
    for eps, (it, av, sched) in zip(cfg.eps, res):
        table.append({"parameter": eps, "error": matched_error(it, av, setup.region()),
                      "error_at_T": float(np.max(np.abs(it.final.values - av.final.values))),
                      "k1": sched.k1, "k2": sched.k2, "dt_split": sched.dt_split})
    for row, order in zip(table, _orders([r["error"] for r in table])):
        row["order"] = order
    runs = {f"iterative_eps_{e:g}": it for e, (it, _, _) in zip(cfg.eps, res)}
    runs["averaged"] = res[-1][1]
    return {"trajectories": runs, "table": table, "table_parameter": "eps",
            "errors": {"orders": [r["order"] for r in table[1:]]},
            "constants": setup.constants(theta=cfg.theta)}


def _distance(setup: Setup, out: Path) -> dict:
    cfg = setup.cfg
    traj = solve_base(setup.u0, setup.h1, cfg.T, setup.policy, cfg.snap_every, snap_times=cfg.snap_times)
    table = []
    sdfs = []
    for snap in traj:
        sdf = signed_distance_field(snap, cfg.zero_tol)
        sdfs.append(sdf)
        ex = setup.exact("d", snap.time)
        if ex is not None:
            table.append({"parameter": snap.time, "error": linf_distance(sdf, ex, setup.region())})
    return {"trajectories": {"base": traj, "distance": Trajectory(sdfs)}, "table": table,
            "table_parameter": "t", "errors": {"zero_tol": cfg.zero_tol},
            "constants": setup.constants(dt=traj.meta["dt_max"])}


def _continuity(setup: Setup, out: Path) -> dict:
    cfg = setup.cfg
    cc = cfg.continuity
    times = sorted(set(cfg.snap_times) | {p[-1] for p in cc.points if p[-1] < cfg.T})
    traj = solve_base(setup.u0, setup.h1, cfg.T, setup.policy, cfg.snap_every or 1, snap_times=times)
    params = ExtinctionParams(cc.eps_ball, cc.delta, cc.zero_tol, cc.settle)
    rows = []
    for p in cc.points:
        x, t = p[:-1], p[-1]
        v = classify_continuity(traj, x, t, params)
        rows.append({"x": list(v.point), "t": v.time, "verdict": v.verdict,
                     "n_nearest": v.n_nearest, "n_extinction": v.n_extinction, "params": v.params})
    lines = [",".join(["x", "y"][:setup.grid.dim] + ["t", "verdict", "n_nearest", "n_extinction"])]
    for r in rows:
        lines.append(",".join([repr(c) for c in r["x"]] + [repr(r["t"]), r["verdict"],
                                                            str(r["n_nearest"]), str(r["n_extinction"])]))
    (out / "verdicts.csv").write_text("\n".join(lines) + "\n")
    return {"trajectories": {"base": traj}, "table": [], "errors": {"verdicts": rows},
            "files": ["verdicts.csv"], "constants": setup.constants(dt=traj.meta["dt_max"])}


def _cell(cfg: RunConfig, out: Path) -> dict:
    c = cfg.cell
    prof = cellmod.two_phase_profile(c.a, c.b, c.theta)
    lam = cellmod.cell_lambda(prof)
    table = cellmod.corrector_table(prof, c.v0, c.samples)
    (out / "cell.csv").write_text("tau,v\n" + "".join(f"{s!r},{v!r}\n" for s, v in table))
    return {"trajectories": {}, "table": [], "files": ["cell.csv"],
            "errors": {"lambda": lam, "periodicity": abs(table[-1][1] - table[0][1])},
            "constants": {"theta": c.theta, "a": c.a, "b": c.b}}


RUNNERS = {"evolve": _evolve, "theta-sweep": _theta_sweep, "reinit": _reinit,
           "homogenize": _homogenize, "distance": _distance, "continuity": _continuity}

PLOT_SCRIPT = '''"""Plot the CSV artifacts of this run directory (needs matplotlib)."""
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

here = Path(__file__).resolve().parent
for manifest in sorted(here.glob("*/manifest.csv")):
    rows = list(csv.DictReader(manifest.open()))
    fig, ax = plt.subplots()
    for row in rows[:: max(1, len(rows) // 8)]:
        data = np.loadtxt(manifest.parent / row["file"], delimiter=",", comments="#", ndmin=2)
        if data.shape[1] == 2:
            ax.plot(data[:, 0], data[:, 1], label=f"t={float(row['time']):.3g}")
        else:
            n = len(np.unique(data[:, 0]))
            ax.contour(data[:, 0].reshape(n, -1), data[:, 1].reshape(n, -1),
                       data[:, 2].reshape(n, -1), levels=[0.0])
    ax.set_title(manifest.parent.name)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize="small")
    fig.savefig(here / f"{manifest.parent.name}.png", dpi=120)
if "--show" in sys.argv:
    plt.show()
'''


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def run_experiment(cfg: RunConfig, out_dir=None) -> Path:
    """Execute ``cfg`` and write all artifacts; returns the artifact directory."""
    out = Path(out_dir or cfg.outputs.dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    warnings = []
    if cfg.experiment == "cell":
        result = _cell(cfg, out)
    else:
        setup = Setup(cfg)
        if cfg.T is not None:
            warnings += setup.cone_warnings(cfg.T)
        result = RUNNERS[cfg.experiment](setup, out)
    elapsed = time.perf_counter() - t0

    files = list(result.get("files", []))
    if cfg.outputs.trajectories:
        for name, traj in result["trajectories"].items():
            write_trajectory(traj, out / name)
            files.append(f"{name}/manifest.csv")
    if result["table"]:
        keys = ["parameter"] + sorted({k for r in result["table"] for k in r} - {"parameter"})
        lines = [",".join(keys)]
        for r in result["table"]:
            lines.append(",".join("" if r.get(k) is None else repr(r.get(k)) for k in keys))
        (out / "table.csv").write_text("\n".join(lines) + "\n")
        files.append("table.csv")

    report = {
        "experiment": cfg.experiment,
        "inputs": cfg.model_dump(mode="json"),
        "constants": result["constants"],
        "errors": result["errors"],
        "table_parameter": result.get("table_parameter"),
        "table": result["table"],
        "warnings": warnings,
    }
    (out / "report.json").write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n")
    (out / "timings.json").write_text(json.dumps({"total_seconds": elapsed}, indent=2) + "\n")
    (out / "plot.py").write_text(PLOT_SCRIPT)
    files += ["report.json", "timings.json", "plot.py"]
    (out / "manifest.csv").write_text(
        "index,time,file\n" + "".join(f"{i},,{f}\n" for i, f in enumerate(files)))
    return out
