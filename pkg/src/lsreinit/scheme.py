"""Monotone upwind discretisation and explicit time stepping.

Sign convention: ``speed_sign`` is the sign of the coefficient multiplying
|grad u| on the right-hand side of ``u_t = a |grad u|``.  With a > 0 the
level sets move towards lower values, so information comes from the lower
neighbour and the Godunov flux picks ``min(D-, 0)`` and ``max(D+, 0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalBlowup, UsageError
from .grid import Field, Grid, one_sided_differences
from .model import CorrectorSpec, H1Spec, beta, h_of_norm

# relative slack when comparing a requested dt with the admissible one
_DT_SLACK = 1e-12


@dataclass(frozen=True)
class CflPolicy:
    cfl_number: float = 0.5
    integrator: str = "rk2"

    def __post_init__(self):
        if not (0 < self.cfl_number <= 1):
            raise ConfigError(f"cfl_number must lie in (0, 1], got {self.cfl_number}")
        if self.integrator not in ("euler", "rk2"):
            raise ConfigError(f"integrator must be 'euler' or 'rk2', got {self.integrator!r}")


def godunov_magnitude(Dminus, Dplus, speed_sign):
    """Upwind |grad u| from one-sided differences.

    ``Dminus`` and ``Dplus`` have the axis as their first dimension; extra
    trailing dimensions are treated node-wise and ``speed_sign`` broadcasts
    over them.  A zero sign is treated as +1 (the caller multiplies by zero).
    """
    Dm = np.asarray(Dminus, dtype=float)
    Dp = np.asarray(Dplus, dtype=float)
    pos = np.sum(np.maximum(np.minimum(Dm, 0.0) ** 2, np.maximum(Dp, 0.0) ** 2), axis=0)
    neg = np.sum(np.maximum(np.maximum(Dm, 0.0) ** 2, np.minimum(Dp, 0.0) ** 2), axis=0)
    out = np.sqrt(np.where(np.asarray(speed_sign) < 0, neg, pos))
    return out if out.ndim else float(out)


def gradient_bound(values: np.ndarray, grid: Grid) -> float:
    """Upper bound for every Godunov gradient magnitude of ``values``."""
    Dm, Dp = one_sided_differences(values, grid.dx, grid.ghost)
    return float(np.sqrt(np.max(np.sum(np.maximum(np.abs(Dm), np.abs(Dp)) ** 2, axis=0))))


def _inv_dx(grid: Grid) -> float:
    return math.sqrt(sum(h ** -2 for h in grid.dx))


# ----------------------------------------------------------- operators

class Advection:
    """The geometric term c(x, t s) |grad u|, with optional time dilation ``s``."""

    def __init__(self, h1: H1Spec, time_scale: float = 1.0):
        self.h1 = h1
        self.time_scale = float(time_scale)
        self._coords = None

    def rate(self, values: np.ndarray, grid: Grid, t: float, diffs=None) -> np.ndarray:
        if self._coords is None or self._coords[0] != grid:
            self._coords = (grid, grid.nodes())
        c = self.h1.c(self._coords[1], t * self.time_scale)
        Dm, Dp = diffs if diffs is not None else one_sided_differences(values, grid.dx, grid.ghost)
        return c * godunov_magnitude(Dm, Dp, np.sign(c))

    def cfl_terms(self, values: np.ndarray, grid: Grid) -> tuple:
        """(transport speed, reaction rate) bounds used by the CFL condition."""
        return self.h1.L2, 0.0


class Corrector:
    """The reinitialisation term beta(u) h(|grad u|), upwinded against sign(beta)."""

    def __init__(self, corr: CorrectorSpec):
        if corr.eps0 is None:
            raise ConfigError("corrector eps0 must be resolved before stepping")
        self.corr = corr

    def rate(self, values: np.ndarray, grid: Grid, t: float, diffs=None) -> np.ndarray:
        b = beta(self.corr, values)
        Dm, Dp = diffs if diffs is not None else one_sided_differences(values, grid.dx, grid.ghost)
        g = godunov_magnitude(Dm, Dp, -np.sign(b))
        return b * h_of_norm(self.corr, g)

    def cfl_terms(self, values: np.ndarray, grid: Grid) -> tuple:
        u_bound = float(np.max(np.abs(values)))
        speed = self.corr.beta_sup(u_bound)
        reaction = 0.0
        if self.corr.h_variant == "signed":
            g = gradient_bound(values, grid)
            reaction = self.corr.beta_lipschitz * max(g - 1.0, 0.0)
        return speed, reaction


def rhs_advection(field: Field, h1: H1Spec, t: float | None = None) -> Field:
    t = field.time if t is None else t
    return field.with_values(Advection(h1).rate(field.values, field.grid, t))


def rhs_corrector(field: Field, corr: CorrectorSpec) -> Field:
    corr = corr.resolved(field.grid.min_dx)
    return field.with_values(Corrector(corr).rate(field.values, field.grid, field.time))


def cfl_dt(
    grid: Grid,
    h1: H1Spec | None,
    corr: CorrectorSpec | None,
    theta: float,
    policy: CflPolicy,
    grad_bound: float = 1.0,
    u_bound: float | None = None,
) -> float:
    """Largest dt keeping the forward Euler update monotone, times cfl_number.

    dt = cfl / ((L2 + theta*supb) * sqrt(sum dx^-2) + theta * Lb * max(G - 1, 0))

    where supb bounds |beta|, Lb is its Lipschitz constant and G bounds the
    discrete gradient.  The last term only appears for the signed variant,
    where h can be negative.  In 1D this is cfl*dx / (L2 + theta*supb*(1+k))
    with gradient scale k = Lb*dx*max(G-1, 0)/supb.
    """
    if theta < 0:
        raise ConfigError(f"theta must be >= 0, got {theta}")
    L2 = h1.L2 if h1 is not None else 0.0
    speed, reaction = L2, 0.0
    if corr is not None and theta > 0:
        corr = corr.resolved(grid.min_dx)
        speed += theta * corr.beta_sup(u_bound)
        if corr.h_variant == "signed":
            reaction = theta * corr.beta_lipschitz * max(grad_bound - 1.0, 0.0)
    denom = speed * _inv_dx(grid) + reaction
    if denom <= 0:
        raise ConfigError("no transport: CFL bound is unbounded")
    return policy.cfl_number / denom


def admissible_dt(values: np.ndarray, grid: Grid, parts, policy: CflPolicy) -> float:
    """cfl_dt for an assembled list of (weight, operator) evaluated on ``values``."""
    denom = 0.0
    inv = _inv_dx(grid)
    for w, op in parts:
        if w == 0:
            continue
        speed, reaction = op.cfl_terms(values, grid)
        denom += abs(w) * (speed * inv + reaction)
    if denom <= 0:
        return math.inf
    return policy.cfl_number / denom


def _rate(values, grid, t, parts):
    diffs = one_sided_differences(values, grid.dx, grid.ghost)
    total = np.zeros_like(values)
    for w, op in parts:
        if w != 0:
            total += w * op.rate(values, grid, t, diffs)
    return total


def advance(values: np.ndarray, grid: Grid, t: float, dt: float, parts, integrator: str) -> np.ndarray:
    """One unchecked step on raw arrays; returns the new values."""
    u1 = values + dt * _rate(values, grid, t, parts)
    if integrator == "euler":
        return u1
    u2 = u1 + dt * _rate(u1, grid, t + dt, parts)
    return 0.5 * (values + u2)


def step(field: Field, rhs_parts, dt: float, policy: CflPolicy) -> Field:
    """Advance ``field`` by ``dt`` under sum(weight * operator).

    Refuses a dt above the admissible bound for the assembled operator.
    """
    if not dt > 0:
        raise UsageError(f"dt must be positive, got {dt}")
    limit = admissible_dt(field.values, field.grid, rhs_parts, policy)
    if dt > limit * (1 + _DT_SLACK):
        raise UsageError(f"dt={dt:.6g} exceeds the CFL bound {limit:.6g}")
    new = advance(field.values, field.grid, field.time, dt, rhs_parts, policy.integrator)
    if not np.all(np.isfinite(new)):
        raise NumericalBlowup(field.time + dt)
    return Field(field.grid, new, field.time + dt)
