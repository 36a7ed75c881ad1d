"""Hamiltonians: the geometric H1, the corrector beta(r) h(p), their
time-periodic combination and its average."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import ConfigError

# Lipschitz constant of r|r|/sqrt(eps0^2 + r^2); independent of eps0.
# The derivative s(s^2+2)/(s^2+1)^(3/2) in s = r/eps0 peaks at s = sqrt(2).
SQUARED_BETA_LIP = 4.0 * math.sqrt(2.0) / (3.0 * math.sqrt(3.0))


def _radius(coords) -> np.ndarray:
    return np.sqrt(sum(np.asarray(c, dtype=float) ** 2 for c in coords))


# ----------------------------------------------------------- velocities
#
# Each entry builds (c, L1, L2, D) from keyword parameters.  c takes node
# coordinate arrays (one per axis) and a scalar time.  L1 bounds the
# Lipschitz constant of c in x, L2 bounds |c| (and is kept positive), and
# D(t) is the time-dependent Lipschitz rate.

def _constant(a: float = 1.0):
    a = float(a)

    def c(coords, t):
        return np.full(np.shape(coords[0]), a)

    return c, 0.0, abs(a) if a != 0 else 1.0, None


def _bump(amplitude: float = 1.0, base: float = 1.0):
    # c(x) = amplitude * (1 - |x|)_+ + base
    amp, base = float(amplitude), float(base)

    def c(coords, t):
        return amp * np.maximum(1.0 - _radius(coords), 0.0) + base

    L2 = max(abs(base), abs(base + amp))
    return c, abs(amp), L2 if L2 > 0 else 1.0, None


def _radial_ramp(a: float = 1.0, b: float = 0.5, rmax: float = 1.0):
    # c(x) = a + b * min(|x|, rmax)
    a, b, rmax = float(a), float(b), float(rmax)
    if rmax <= 0:
        raise ConfigError("radial_ramp needs rmax > 0")

    def c(coords, t):
        return a + b * np.minimum(_radius(coords), rmax)

    L2 = max(abs(a), abs(a + b * rmax))
    return c, abs(b), L2 if L2 > 0 else 1.0, None


def _pulsating(a: float = 1.0, b: float = 0.5, omega: float = 2 * math.pi):
    # c(t) = a + b sin(omega t), uniform in space
    a, b, omega = float(a), float(b), float(omega)

    def c(coords, t):
        return np.full(np.shape(coords[0]), a + b * math.sin(omega * t))

    return c, 0.0, (abs(a) + abs(b)) or 1.0, None


VELOCITIES: dict[str, Callable] = {
    "constant": _constant,
    "bump": _bump,
    "radial_ramp": _radial_ramp,
    "pulsating": _pulsating,
}


@dataclass(frozen=True)
class H1Spec:
    """H1(x, t, p) = c(x, t) |p| for a registered velocity ``c``."""

    velocity: str = "constant"
    params: dict = field(default_factory=dict)
    kind: str = "velocity"

    def __post_init__(self):
        if self.kind != "velocity":
            raise ConfigError(f"unsupported H1 kind {self.kind!r}")
        if self.velocity not in VELOCITIES:
            raise ConfigError(
                f"unknown velocity {self.velocity!r}; choose from {sorted(VELOCITIES)}"
            )
        try:
            built = VELOCITIES[self.velocity](**self.params)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for {self.velocity!r}: {exc}") from exc
        object.__setattr__(self, "_built", built)

    def __hash__(self):
        return hash((self.velocity, tuple(sorted(self.params.items()))))

    def c(self, coords, t: float) -> np.ndarray:
        """Velocity at node coordinate arrays ``coords`` and time ``t``."""
        return self._built[0](coords, t)

    @property
    def L1(self) -> float:
        return self._built[1]

    @property
    def L2(self) -> float:
        return self._built[2]

    def D(self, t: float) -> float:
        rate = self._built[3]
        return self.L1 if rate is None else rate(t)


def _coords(x) -> tuple:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return tuple(np.array([v]) for v in x)


def _norm(p) -> float:
    return float(np.linalg.norm(np.atleast_1d(np.asarray(p, dtype=float))))


def eval_h1(spec: H1Spec, x, t: float, p) -> float:
    """c(x, t) |p| at a single position."""
    return float(spec.c(_coords(x), t)[0]) * _norm(p)


# ----------------------------------------------------------- corrector

@dataclass(frozen=True)
class CorrectorSpec:
    """Parameters of H2(r, p) = beta(r) h(p).

    ``eps0=None`` means "the grid spacing", resolved with :meth:`resolved`.
    """

    eps0: float | None = None
    h_variant: str = "signed"
    beta_kind: str = "smooth-sign"

    def __post_init__(self):
        if self.eps0 is not None and not (self.eps0 > 0 and math.isfinite(self.eps0)):
            raise ConfigError(f"eps0 must be positive, got {self.eps0}")
        if self.h_variant not in ("signed", "plus"):
            raise ConfigError(f"h_variant must be 'signed' or 'plus', got {self.h_variant!r}")
        if self.beta_kind not in ("smooth-sign", "smooth-sign-squared"):
            raise ConfigError(f"unknown beta_kind {self.beta_kind!r}")

    def resolved(self, dx: float) -> "CorrectorSpec":
        if self.eps0 is not None:
            return self
        return CorrectorSpec(float(dx), self.h_variant, self.beta_kind)

    @property
    def _eps(self) -> float:
        if self.eps0 is None:
            raise ConfigError("eps0 unresolved; call resolved(dx) first")
        return self.eps0

    @property
    def beta_lipschitz(self) -> float:
        if self.beta_kind == "smooth-sign":
            return 1.0 / self._eps
        return SQUARED_BETA_LIP

    def beta_sup(self, u_bound: float | None = None) -> float:
        """sup |beta| over |r| <= u_bound (over all r for smooth-sign)."""
        if self.beta_kind == "smooth-sign":
            return 1.0
        if u_bound is None:
            raise ConfigError("smooth-sign-squared is unbounded; pass u_bound")
        return float(abs(beta(self, u_bound)))


def beta(spec: CorrectorSpec, r):
    """Smoothed sign of ``r``: odd, nondecreasing, zero at zero."""
    e = spec._eps
    r = np.asarray(r, dtype=float)
    if spec.beta_kind == "smooth-sign":
        out = r / np.hypot(e, r)
    else:
        out = r * (np.abs(r) / np.hypot(e, r))
    return out if out.ndim else float(out)


def h_of_norm(spec: CorrectorSpec, g):
    """h as a function of the gradient magnitude."""
    out = 1.0 - np.asarray(g, dtype=float)
    if spec.h_variant == "plus":
        out = np.maximum(out, 0.0)
    return out if out.ndim else float(out)


def h_value(spec: CorrectorSpec, p) -> float:
    return h_of_norm(spec, _norm(p))


# ----------------------------------------------------------- schedule

@dataclass(frozen=True)
class Schedule:
    """Splitting of each period into k1 evolution and k2 correction steps."""

    k1: int
    k2: int
    dt_split: float

    def __post_init__(self):
        for name in ("k1", "k2"):
            v = getattr(self, name)
            if int(v) != v or v <= 0:
                raise ConfigError(f"{name} must be a positive integer, got {v}")
        if not (self.dt_split > 0 and math.isfinite(self.dt_split)):
            raise ConfigError(f"dt_split must be positive, got {self.dt_split}")

    @property
    def eps(self) -> float:
        return (self.k1 + self.k2) * self.dt_split

    @property
    def theta(self) -> float:
        return self.k2 / self.k1

    @property
    def fraction(self) -> float:
        """Share of each period spent on H1, equal to 1/(1+theta)."""
        return self.k1 / (self.k1 + self.k2)

    @property
    def evolve_time(self) -> float:
        return self.k1 * self.dt_split

    @property
    def correct_time(self) -> float:
        return self.k2 * self.dt_split

    @classmethod
    def from_eps(cls, eps: float, theta: float, max_den: int = 1000) -> "Schedule":
        """Schedule with period ``eps`` and ratio ``theta`` (rationalised)."""
        q = Fraction(theta).limit_denominator(max_den)
        if q <= 0:
            raise ConfigError(f"theta must be positive, got {theta}")
        k1, k2 = q.denominator, q.numerator
        return cls(k1, k2, eps / (k1 + k2))


def combined_h12(h1: H1Spec, corr: CorrectorSpec, sched: Schedule, x, t, tau, r, p) -> float:
    """The 1-periodic-in-tau Hamiltonian that alternates H1 and H2."""
    theta = sched.theta
    frac = tau - math.floor(tau)
    if 0.0 < frac <= sched.fraction:
        return eval_h1(h1, x, t / (1.0 + theta), p)
    return float(beta(corr, r)) * h_value(corr, p)


def averaged_h(h1: H1Spec, corr: CorrectorSpec, theta: float, x, t, r, p) -> float:
    """Time average of the combined Hamiltonian over one period."""
    if not theta > 0:
        raise ConfigError(f"theta must be positive, got {theta}")
    a = eval_h1(h1, x, t / (1.0 + theta), p)
    b = float(beta(corr, r)) * h_value(corr, p)
    return (a + theta * b) / (1.0 + theta)
