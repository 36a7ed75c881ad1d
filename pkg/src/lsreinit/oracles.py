"""Closed-form solutions and a priori bounds used as ground truth."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import integrate, optimize

LOG2 = math.log(2.0)


def two_bump_u0(x):
    """max{(1-|x-2|)_+, (1-|x+2|)_+}."""
    x = np.asarray(x, dtype=float)
    return np.maximum(np.maximum(1 - np.abs(x - 2), 0), np.maximum(1 - np.abs(x + 2), 0))


def tent_u0(x):
    """(1-|x|)_+."""
    return np.maximum(1 - np.abs(np.asarray(x, dtype=float)), 0)


def _refine_1d(u0, a, b, x_best, step, xatol):
    lo, hi = max(a, x_best - step), min(b, x_best + step)
    if hi <= lo:
        return float(u0(x_best))
    res = optimize.minimize_scalar(lambda y: -float(u0(y)), bounds=(lo, hi),
                                   method="bounded", options={"xatol": xatol})
    return -float(res.fun)


def hopf_lax_w(u0: Callable, x, t: float, resolution: int = 10_000) -> float:
    """max of u0 over the closed ball |y - x| <= t (1D or 2D).

    Dense sampling at ``resolution`` points per unit length (or area), then
    a bounded Brent search around the best sample.  Ball endpoints are always
    included because a monotone u0 peaks there.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if t == 0:
        return float(u0(*x))
    if x.size == 1:
        x0 = float(x[0])
        m = max(int(math.ceil(2 * t * resolution)), 2) + 1
        ys = np.linspace(x0 - t, x0 + t, m)
        vals = np.asarray(u0(ys), dtype=float)
        i = int(np.argmax(vals))
        best = float(vals[i])
        step = ys[1] - ys[0]
        refined = _refine_1d(u0, x0 - t, x0 + t, ys[i], step, 1e-12 * max(1.0, t))
        return max(best, refined)
    # 2D: polar sampling of the disc plus the boundary circle
    area = math.pi * t * t
    m = max(int(math.ceil(math.sqrt(area * resolution))), 16)
    r = t * np.sqrt(np.linspace(0.0, 1.0, m))
    a = np.linspace(0.0, 2 * math.pi, 4 * m, endpoint=False)
    R, A = np.meshgrid(r, a, indexing="ij")
    px, py = x[0] + R * np.cos(A), x[1] + R * np.sin(A)
    vals = np.asarray(u0(px, py), dtype=float)
    k = np.unravel_index(int(np.argmax(vals)), vals.shape)
    best = float(vals[k])
    y0 = np.array([px[k], py[k]])

    def neg(y):
        d = y - x
        n = math.hypot(*d)
        if n > t:
            y = x + d * (t / n)
        return -float(u0(*y))

    res = optimize.minimize(neg, y0, method="Nelder-Mead",
                            options={"xatol": 1e-12, "fatol": 1e-14,
                                     "initial_simplex": [y0, y0 + [t / m, 0], y0 + [0, t / m]]})
    return max(best, -float(res.fun))


def example_two_bumps(x, t: float):
    """Exact (w, d) for c = 1 and the two-bump initial data.

    The inner zero component {|x| <= 1-t} vanishes at t = 1, after which
    the distance jumps to (t+3-|x|)_+.
    """
    x = np.asarray(x, dtype=float)
    reach = np.maximum(np.maximum(t + 1 - np.abs(x - 2), 0), np.maximum(t + 1 - np.abs(x + 2), 0))
    w = np.minimum(reach, 1.0)
    d = reach if t <= 1 else np.maximum(t + 3 - np.abs(x), 0)
    if w.ndim == 0:
        return float(w), float(d)
    return w, d


def example_bounded_speed_w(x, t: float):
    """Exact w for c(x) = (1-|x|)_+ + 1 and u0 = (1-|x|)_+."""
    a = np.abs(np.asarray(x, dtype=float))
    outer = np.where(a <= t + 1, np.exp(t - a + 1) - 1, 0.0)
    if t <= LOG2:
        core = 2 * (1 - math.exp(-t))
        w = np.where(a <= core, 1.0,
                     np.where(a <= 1, (2 - a) * math.exp(t) - 1, outer))
    else:
        w = np.where(a <= t + 1 - LOG2, 1.0, outer)
    return float(w) if w.ndim == 0 else w


def example_bounded_speed_d(x, t: float):
    """Signed distance for the same example: (t+1-|x|)_+."""
    d = np.maximum(t + 1 - np.abs(np.asarray(x, dtype=float)), 0)
    return float(d) if d.ndim == 0 else d


def lipschitz_bound(t: float, L0: float, D=None) -> float:
    """max{L0, 1} exp(int_0^t D)."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if D is None:
        integral = 0.0
    elif callable(D):
        integral = integrate.quad(D, 0.0, t, epsabs=1e-12, epsrel=1e-12)[0]
    else:
        integral = float(D) * t
    return max(L0, 1.0) * math.exp(integral)


def barrier_bounds(w_val, d_val, t: float, L0: float, L1: float, Lip_w: float):
    """Lower and upper barriers for u^theta in terms of w and d.

    On the positive side eps*w <= u <= l e^{L1 t} d with eps = min(1/Lip_w, 1)
    and l = max(L0, 1); on the negative side the roles swap.
    """
    w_val = np.asarray(w_val, dtype=float)
    d_val = np.asarray(d_val, dtype=float)
    eps = min(1.0 / Lip_w, 1.0) if Lip_w > 0 else 1.0
    a = eps * w_val
    b = max(L0, 1.0) * math.exp(L1 * t) * d_val
    pos = w_val >= 0
    lower = np.where(pos, a, b)
    upper = np.where(pos, b, a)
    if lower.ndim == 0:
        return float(lower), float(upper)
    return lower, upper
