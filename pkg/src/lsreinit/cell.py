"""The one-dimensional cell problem v'(tau) + lambda = H(tau), tau in [0, 1]."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import ConfigError
from .model import CorrectorSpec, H1Spec, beta, eval_h1, h_value

QUAD_TOL = 1e-10


@dataclass(frozen=True)
class PeriodicProfile:
    """H on [0, 1] given piecewise: a constant or a callable per interval."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(self.values)
        if len(bp) < 2 or bp[0] != 0.0 or bp[-1] != 1.0:
            raise ConfigError("breakpoints must run from 0 to 1")
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise ConfigError("breakpoints must be strictly increasing")
        if len(vals) != len(bp) - 1:
            raise ConfigError(f"need {len(bp) - 1} interval values, got {len(vals)}")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, c: float) -> "PeriodicProfile":
        return cls((0.0, 1.0), (float(c),))

    @classmethod
    def function(cls, f: Callable[[float], float]) -> "PeriodicProfile":
        return cls((0.0, 1.0), (f,))

    @property
    def piecewise_constant(self) -> bool:
        return not any(callable(v) for v in self.values)

    def __call__(self, tau: float) -> float:
        frac = tau - math.floor(tau)
        if frac == 0.0:
            frac = 1.0  # intervals are (tau_i, tau_{i+1}]
        i = int(np.searchsorted(self.breakpoints, frac, side="left")) - 1
        i = min(max(i, 0), len(self.values) - 1)
        v = self.values[i]
        return float(v(frac)) if callable(v) else float(v)

    def _piece(self, i: int, a: float, b: float) -> float:
        v = self.values[i]
        if not callable(v):
            return (b - a) * v
        return integrate.quad(v, a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)[0]

    def integral(self, tau: float) -> float:
        """int_0^tau H for tau in [0, 1]; tau = 1 uses the same sum as lambda."""
        total = 0.0
        for i, (a, b) in enumerate(zip(self.breakpoints, self.breakpoints[1:])):
            if tau >= b:
                total += self._piece(i, a, b)
            else:
                if tau > a:
                    total += self._piece(i, a, tau)
                break
        return total


def cell_lambda(profile: PeriodicProfile) -> float:
    """The eigenvalue lambda = int_0^1 H."""
    return profile.integral(1.0)


def cell_corrector(profile: PeriodicProfile, v0: float, tau: float) -> float:
    """v(tau) = v0 - lambda tau + int_0^tau H, which is 1-periodic."""
    if not 0.0 <= tau <= 1.0:
        raise ConfigError(f"tau must lie in [0, 1], got {tau}")
    lam = cell_lambda(profile)
    if tau == 1.0:
        return v0 + (profile.integral(1.0) - lam)
    return v0 - lam * tau + profile.integral(tau)


def two_phase_profile(a: float, b: float, theta: float) -> PeriodicProfile:
    """H = a on (0, 1/(1+theta)], b on (1/(1+theta), 1]."""
    if not theta > 0:
        raise ConfigError(f"theta must be positive, got {theta}")
    return PeriodicProfile((0.0, 1.0 / (1.0 + theta), 1.0), (float(a), float(b)))


def freeze_h12(h1: H1Spec, corr: CorrectorSpec, theta: float, x, t: float, r: float, p) -> PeriodicProfile:
    """The combined Hamiltonian at fixed (x, t, r, p) as a profile in tau."""
    a = eval_h1(h1, x, t / (1.0 + theta), p)
    b = float(beta(corr, r)) * h_value(corr, p)
    return two_phase_profile(a, b, theta)


def corrector_table(profile: PeriodicProfile, v0: float = 0.0, samples: int = 11) -> list:
    """(tau, v(tau)) on a uniform grid of [0, 1]."""
    taus = np.linspace(0.0, 1.0, samples)
    return [(float(s), cell_corrector(profile, v0, float(s))) for s in taus]
