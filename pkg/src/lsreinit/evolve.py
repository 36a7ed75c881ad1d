"""Solvers for the base evolution, the theta-equation, the split-in-time
iterative scheme and the averaged equation."""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .errors import ConfigError, NumericalBlowup, UsageError
from .grid import Field, Trajectory, linf_distance
from .model import CorrectorSpec, H1Spec, Schedule
from .scheme import Advection, CflPolicy, Corrector, admissible_dt, advance


def _integrate(u0: Field, segments, policy: CflPolicy, snap_every: int,
               dt_fixed: float | None, snap_times: Iterable[float], meta: dict) -> Trajectory:
    """March through contiguous segments ``(t_start, t_end, parts, dt_parts)``.

    Snapshots: the initial field, every segment end, each requested time, and
    every ``snap_every`` accepted steps.  Steps are shortened to land exactly
    on those times.
    """
    grid = u0.grid
    t_end = segments[-1][1]
    tol = 1e-12 * max(1.0, abs(t_end))
    wanted = sorted(float(s) for s in snap_times)
    if wanted and (wanted[0] < u0.time - tol or wanted[-1] > t_end + tol):
        raise UsageError("requested snapshot times lie outside the run")

    values = np.array(u0.values, dtype=float)
    t = u0.time
    snaps = [u0]
    steps = 0
    dt_lo, dt_hi = math.inf, 0.0

    def snap():
        if t > snaps[-1].time + tol:
            snaps.append(Field(grid, values.copy(), t))

    for a, b, parts, dt_parts in segments:
        targets = [s for s in wanted if a + tol < s < b - tol] + [b]
        for target in targets:
            while t < target - tol:
                limit = admissible_dt(values, grid, dt_parts, policy)
                if dt_fixed is not None:
                    if dt_fixed > limit * (1 + 1e-12):
                        raise UsageError(
                            f"fixed dt={dt_fixed:.6g} exceeds the CFL bound {limit:.6g} at t={t:.6g}")
                    dt = dt_fixed
                else:
                    dt = limit
                if not math.isfinite(dt):
                    # nothing moves in this segment
                    t = target
                    break
                if dt <= 1e-14 * max(1.0, abs(t_end)):
                    raise NumericalBlowup(t, f"time step underflow (dt={dt:.3g}) at t={t:.6g}")
                land = t + dt >= target - tol
                h = target - t if land else dt
                values = advance(values, grid, t, h, parts, policy.integrator)
                t = target if land else t + h
                if not np.all(np.isfinite(values)):
                    raise NumericalBlowup(t)
                steps += 1
                dt_lo, dt_hi = min(dt_lo, h), max(dt_hi, h)
                if snap_every and steps % snap_every == 0:
                    snap()
            snap()

    meta = dict(meta)
    meta.update(steps=steps, dt_min=dt_lo if steps else 0.0, dt_max=dt_hi,
                cfl=policy.cfl_number, integrator=policy.integrator)
    return Trajectory(snaps, meta)


def _check_T(T):
    if not (T > 0 and math.isfinite(T)):
        raise ConfigError(f"T must be positive, got {T}")


def solve_base(u0: Field, h1: H1Spec, T: float, policy: CflPolicy = CflPolicy(),
               snap_every: int = 0, dt: float | None = None, snap_times=()) -> Trajectory:
    """w_t = c(x, t)|grad w| from u0.time to u0.time + T."""
    _check_T(T)
    parts = [(1.0, Advection(h1))]
    seg = [(u0.time, u0.time + T, parts, parts)]
    return _integrate(u0, seg, policy, snap_every, dt, snap_times, {"solver": "base"})


def _theta_parts(h1, corr, theta):
    return [(1.0, Advection(h1)), (float(theta), Corrector(corr))]


def solve_theta(u0: Field, h1: H1Spec, corr: CorrectorSpec, theta: float, T: float,
                policy: CflPolicy = CflPolicy(), snap_every: int = 0,
                dt: float | None = None, snap_times=()) -> Trajectory:
    """u_t = H1 + theta * beta(u) h(grad u).

    The step is the CFL bound for the whole right-hand side, recomputed from
    the current field each step unless a fixed ``dt`` is given.  theta = 0 is
    accepted and reproduces :func:`solve_base` step for step.
    """
    _check_T(T)
    if theta < 0:
        raise ConfigError(f"theta must be >= 0, got {theta}")
    corr = corr.resolved(u0.grid.min_dx)
    parts = _theta_parts(h1, corr, theta)
    seg = [(u0.time, u0.time + T, parts, parts)]
    meta = {"solver": "theta", "theta": float(theta), "eps0": corr.eps0,
            "h_variant": corr.h_variant, "beta_kind": corr.beta_kind}
    return _integrate(u0, seg, policy, snap_every, dt, snap_times, meta)


def solve_averaged(u0: Field, h1: H1Spec, corr: CorrectorSpec, theta: float, T: float,
                   policy: CflPolicy = CflPolicy(), snap_every: int = 0,
                   dt: float | None = None, snap_times=()) -> Trajectory:
    """u_t = (H1(x, t/(1+theta), p) + theta * beta(u) h(p)) / (1 + theta).

    Steps are sized by the CFL bound of the theta-equation (the same rule as
    :func:`solve_theta`), not by the (1+theta)-times larger bound of the
    averaged operator itself.  With the larger step the averaged scheme is an
    exact time-rescaling of the theta scheme, and comparing them would only
    measure rounding.
    """
    _check_T(T)
    if not theta > 0:
        raise ConfigError(f"theta must be positive, got {theta}")
    corr = corr.resolved(u0.grid.min_dx)
    s = 1.0 / (1.0 + theta)
    parts = [(s, Advection(h1, time_scale=s)), (theta * s, Corrector(corr))]
    seg = [(u0.time, u0.time + T, parts, _theta_parts(h1, corr, theta))]
    meta = {"solver": "averaged", "theta": float(theta), "eps0": corr.eps0,
            "h_variant": corr.h_variant, "beta_kind": corr.beta_kind}
    return _integrate(u0, seg, policy, snap_every, dt, snap_times, meta)


def phase_boundaries(sched: Schedule, T: float, t0: float = 0.0) -> list:
    """(start, switch, end) of every period, the last one truncated at T."""
    out = []
    i = 0
    end = t0 + T
    tol = 1e-12 * max(1.0, abs(end))
    while t0 + i * sched.eps < end - tol:
        a = t0 + i * sched.eps
        m = min(a + sched.evolve_time, end)
        b = min(t0 + (i + 1) * sched.eps, end)
        out.append((a, m, b))
        i += 1
    return out


def solve_iterative(u0: Field, h1: H1Spec, corr: CorrectorSpec, sched: Schedule, T: float,
                    policy: CflPolicy = CflPolicy(), snap_every: int = 0,
                    snap_times=()) -> Trajectory:
    """Alternate k1*dt_split of H1(x, t/(1+theta), p) with k2*dt_split of
    beta(u) h(p) in every period of length eps, each phase sub-stepped at its
    own CFL bound."""
    _check_T(T)
    corr = corr.resolved(u0.grid.min_dx)
    s = 1.0 / (1.0 + sched.theta)
    evolve_parts = [(1.0, Advection(h1, time_scale=s))]
    correct_parts = [(1.0, Corrector(corr))]
    segments = []
    tol = 1e-12 * max(1.0, T)
    for a, m, b in phase_boundaries(sched, T, u0.time):
        if m > a + tol:
            segments.append((a, m, evolve_parts, evolve_parts))
        if b > m + tol:
            segments.append((m, b, correct_parts, correct_parts))
    meta = {"solver": "iterative", "theta": sched.theta, "eps": sched.eps, "k1": sched.k1,
            "k2": sched.k2, "dt_split": sched.dt_split, "eps0": corr.eps0,
            "h_variant": corr.h_variant, "beta_kind": corr.beta_kind}
    return _integrate(u0, segments, policy, snap_every, None, snap_times, meta)


def relax_corrector(u0: Field, corr: CorrectorSpec, policy: CflPolicy, tol: float = 1e-6,
                    max_steps: int = 100_000) -> tuple:
    """Run u_t = beta(u) h(grad u) until the per-step sup change drops below tol.

    Returns (final field, steps taken, last change).
    """
    parts = [(1.0, Corrector(corr.resolved(u0.grid.min_dx)))]
    u = np.array(u0.values)
    t = u0.time
    change = math.inf
    steps = 0
    while steps < max_steps:
        dt = admissible_dt(u, u0.grid, parts, policy)
        if not dt > 1e-14:
            raise NumericalBlowup(t, f"time step underflow (dt={dt:.3g}) at t={t:.6g}")
        new = advance(u, u0.grid, t, dt, parts, policy.integrator)
        if not np.all(np.isfinite(new)):
            raise NumericalBlowup(t + dt)
        change = float(np.max(np.abs(new - u)))
        u, t = new, t + dt
        steps += 1
        if change < tol:
            break
    return Field(u0.grid, u, t), steps, change


def rescale_compare(traj_avg: Trajectory, traj_theta: Trajectory, theta: float) -> float:
    """Sup over matched snapshots of |u_avg(tau) - u_theta(tau/(1+theta))|.

    Every averaged snapshot at time tau is paired with the theta-equation
    snapshot at tau/(1+theta); a missing partner (off by more than one step)
    is an error.
    """
    if traj_avg.grid != traj_theta.grid:
        raise UsageError("trajectories live on different grids")
    tol = max(traj_theta.meta.get("dt_max", 0.0), 1e-12)
    times = traj_theta.times
    worst = 0.0
    for snap in traj_avg.snapshots:
        target = snap.time / (1.0 + theta)
        i = int(np.argmin(np.abs(times - target)))
        if abs(times[i] - target) > tol:
            raise UsageError(f"no theta snapshot near t={target:.6g} (nearest {times[i]:.6g})")
        worst = max(worst, linf_distance(snap, traj_theta.snapshots[i]))
    return worst


def matched_error(traj_a: Trajectory, traj_b: Trajectory, region=None) -> float:
    """Sup of linf_distance over the snapshot times the two runs share."""
    tol = 1e-9 * max(1.0, traj_a.times[-1])
    tb = traj_b.times
    worst = 0.0
    n = 0
    for snap in traj_a.snapshots:
        j = int(np.argmin(np.abs(tb - snap.time)))
        if abs(tb[j] - snap.time) <= tol:
            worst = max(worst, linf_distance(snap, traj_b.snapshots[j], region))
            n += 1
    if n == 0:
        raise UsageError("the trajectories share no snapshot times")
    return worst
