"""Named initial data, with exact solutions where they are known."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError
from .oracles import (example_bounded_speed_d, example_bounded_speed_w, example_two_bumps,
                      tent_u0, two_bump_u0)


def _r(coords):
    return np.sqrt(sum(np.asarray(c, dtype=float) ** 2 for c in coords))


@dataclass(frozen=True)
class Problem:
    """Initial data u0 plus optional exact w(., t) and d(., t).

    ``exact_velocity`` names the velocity the exact formulas assume; ``L0``
    is the Lipschitz constant of u0.
    """

    name: str
    u0: Callable
    L0: float | None  # None: estimate on the grid
    exact_w: Callable | None = None
    exact_d: Callable | None = None
    exact_velocity: tuple | None = None
    dims: tuple = (1, 2)


def _two_bumps(**kw):
    if kw:
        raise ConfigError(f"two_bumps takes no parameters, got {sorted(kw)}")
    return Problem(
        "two_bumps", lambda x: two_bump_u0(x), 1.0,
        exact_w=lambda t, x: example_two_bumps(x, t)[0],
        exact_d=lambda t, x: example_two_bumps(x, t)[1],
        exact_velocity=("constant", {"a": 1.0}), dims=(1,))


def _bounded_speed(**kw):
    if kw:
        raise ConfigError(f"bounded_speed takes no parameters, got {sorted(kw)}")
    return Problem(
        "bounded_speed", lambda x: tent_u0(x), 1.0,
        exact_w=lambda t, x: example_bounded_speed_w(x, t),
        exact_d=lambda t, x: example_bounded_speed_d(x, t),
        exact_velocity=("bump", {}), dims=(1,))


def _linear(slope=1.0, offset=0.0):
    a = np.atleast_1d(np.asarray(slope, dtype=float))
    norm = float(np.linalg.norm(a))

    def u0(*coords):
        return sum(ak * c for ak, c in zip(a, coords)) + offset

    # c = 1: w(x, t) = u0(x) + |a| t
    return Problem("linear", u0, norm,
                   exact_w=lambda t, *coords: u0(*coords) + norm * t,
                   exact_velocity=("constant", {"a": 1.0}), dims=(a.size,))


def _circle(radius=1.0, scale=1.0):
    def u0(*coords):
        return scale * (_r(coords) - radius)

    return Problem("circle", u0, abs(scale))


def _radial_quadratic(radius=1.0):
    def u0(*coords):
        return 0.5 * (_r(coords) ** 2 - radius ** 2)

    return Problem("radial_quadratic", u0, None)


def _tent(**kw):
    if kw:
        raise ConfigError(f"tent takes no parameters, got {sorted(kw)}")
    return Problem("tent", lambda *c: tent_u0(_r(c)), 1.0)


PROBLEMS = {
    "two_bumps": _two_bumps,
    "bounded_speed": _bounded_speed,
    "linear": _linear,
    "circle": _circle,
    "radial_quadratic": _radial_quadratic,
    "tent": _tent,
}


def make_problem(name: str, params: dict | None = None) -> Problem:
    if name not in PROBLEMS:
        raise ConfigError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}")
    try:
        return PROBLEMS[name](**(params or {}))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for problem {name!r}: {exc}") from exc
