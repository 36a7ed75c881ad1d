"""Uniform Cartesian grids, fields on them, and one-sided differences."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError, RangeError, UsageError


def _as_tuple(v, dim=None) -> tuple:
    if np.ndim(v) == 0:
        v = (v,) if dim is None else (v,) * dim
    return tuple(v)


@dataclass(frozen=True)
class Grid:
    """Node-centred grid on a box in 1D or 2D, endpoints included.

    Coordinates along axis ``k`` are ``lo[k] + i * dx[k]`` with ``dx`` fixed
    once at construction, so every consumer sees the same floats.

    ``ghost`` closes the one-sided differences at the faces: ``"linear"``
    extrapolates (exact on linear fields), ``"constant"`` repeats the face
    value (zero outer slope).  Only the latter keeps the upwind scheme
    monotone at inflow faces, since a linearly extrapolated ghost
    2u_0 - u_1 decreases when u_1 increases.
    """

    lo: tuple
    hi: tuple
    n: tuple
    ghost: str = "linear"

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def dx(self) -> tuple:
        return tuple((h - l) / (m - 1) for l, h, m in zip(self.lo, self.hi, self.n))

    @property
    def shape(self) -> tuple:
        return tuple(self.n)

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def min_dx(self) -> float:
        return min(self.dx)

    def axis(self, k: int) -> np.ndarray:
        return self.lo[k] + np.arange(self.n[k]) * self.dx[k]

    def nodes(self) -> tuple:
        """Coordinate arrays of shape ``self.shape``, one per axis."""
        axes = [self.axis(k) for k in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def points(self) -> np.ndarray:
        """All node positions as an array of shape ``(size, dim)``, row-major."""
        return np.stack([c.ravel() for c in self.nodes()], axis=1)

    def index_of(self, x) -> tuple:
        """Index of the node nearest to position ``x``."""
        x = _as_tuple(x, self.dim)
        idx = []
        for k in range(self.dim):
            i = int(round((x[k] - self.lo[k]) / self.dx[k]))
            idx.append(min(max(i, 0), self.n[k] - 1))
        return tuple(idx)

    def contains(self, x) -> bool:
        x = _as_tuple(x, self.dim)
        return all(l <= v <= h for l, v, h in zip(self.lo, x, self.hi))


GHOSTS = ("linear", "constant")


def make_grid(lo, hi, n, ghost: str = "linear") -> Grid:
    """Build a grid from per-axis bounds and node counts (scalars allowed in 1D)."""
    if ghost not in GHOSTS:
        raise ConfigError(f"ghost must be one of {GHOSTS}, got {ghost!r}")
    lo_t = tuple(float(v) for v in _as_tuple(lo))
    hi_t = tuple(float(v) for v in _as_tuple(hi))
    n_t = tuple(_as_tuple(n))
    if not (len(lo_t) == len(hi_t) == len(n_t)):
        raise ConfigError("lo, hi and n must have the same length")
    if len(n_t) not in (1, 2):
        raise ConfigError(f"only 1D and 2D grids are supported, got dim={len(n_t)}")
    for k, (l, h, m) in enumerate(zip(lo_t, hi_t, n_t)):
        if int(m) != m or m < 3:
            raise ConfigError(f"n[{k}]={m} must be an integer >= 3")
        if not (np.isfinite(l) and np.isfinite(h)) or not h > l:
            raise ConfigError(f"degenerate bounds on axis {k}: lo={l}, hi={h}")
    return Grid(lo_t, hi_t, tuple(int(m) for m in n_t), ghost)


@dataclass(frozen=True, eq=False)
class Field:
    """Node values of a scalar function at one time."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.size != self.grid.size:
            raise DataError(f"expected {self.grid.size} values, got {vals.size}")
        vals = vals.reshape(self.grid.shape)
        bad = ~np.isfinite(vals)
        if bad.any():
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise DataError(f"non-finite value at node {idx}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "time", float(self.time))

    def with_values(self, values, time: float | None = None) -> "Field":
        return Field(self.grid, values, self.time if time is None else time)


def sample(f: Callable, grid: Grid, t: float = 0.0) -> Field:
    """Evaluate ``f`` at every node.

    ``f`` receives the node coordinate arrays (one per axis) and should be
    vectorised; scalar functions are retried node by node.
    """
    coords = grid.nodes()
    try:
        vals = np.broadcast_to(np.asarray(f(*coords), dtype=float), grid.shape).copy()
    except (TypeError, ValueError):
        pts = grid.points()
        vals = np.array([float(f(*p)) for p in pts]).reshape(grid.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        pos = tuple(float(c[idx]) for c in coords)
        raise DataError(f"non-finite sample at node {idx}, position {pos}")
    return Field(grid, vals, t)


def one_sided_differences(values: np.ndarray, dx: Sequence[float], ghost: str = "linear") -> tuple:
    """Backward and forward differences on every node.

    Returns arrays ``(Dm, Dp)`` of shape ``(dim,) + values.shape``.  At a face
    the missing difference is copied from the available one (a linearly
    extrapolated ghost node) or set to zero for ``ghost="constant"``.
    """
    dim = values.ndim
    Dm = np.empty((dim,) + values.shape)
    Dp = np.empty((dim,) + values.shape)
    for k in range(dim):
        d = np.diff(values, axis=k) / dx[k]
        lo = [slice(None)] * dim
        hi = [slice(None)] * dim
        lo[k] = slice(0, 1)
        hi[k] = slice(-1, None)
        first, last = d[tuple(lo)], d[tuple(hi)]
        if ghost == "constant":
            first, last = np.zeros_like(first), np.zeros_like(last)
        Dm[k] = np.concatenate([first, d], axis=k)
        Dp[k] = np.concatenate([d, last], axis=k)
    return Dm, Dp


def one_sided_gradients(field: Field, index) -> tuple:
    """Backward and forward difference vectors at a single node."""
    index = _as_tuple(index)
    if len(index) != field.grid.dim:
        raise UsageError(f"index {index} does not match grid dimension {field.grid.dim}")
    v = field.values
    dim = field.grid.dim
    Dm = np.empty(dim)
    Dp = np.empty(dim)
    for k in range(dim):
        i = index[k]
        m = field.grid.n[k]
        if not 0 <= i < m:
            raise UsageError(f"index {index} out of range")

        def at(j):
            idx = list(index)
            idx[k] = j
            return v[tuple(idx)]

        h = field.grid.dx[k]
        back = (at(i) - at(i - 1)) / h if i > 0 else None
        fwd = (at(i + 1) - at(i)) / h if i < m - 1 else None
        missing = 0.0 if field.grid.ghost == "constant" else None
        Dm[k] = back if back is not None else (fwd if missing is None else missing)
        Dp[k] = fwd if fwd is not None else (back if missing is None else missing)
    return Dm, Dp


def _region_mask(grid: Grid, region) -> np.ndarray:
    if region is None:
        return np.ones(grid.shape, dtype=bool)
    if callable(region):
        mask = np.asarray(region(*grid.nodes()), dtype=bool)
        return np.broadcast_to(mask, grid.shape)
    mask = np.asarray(region, dtype=bool)
    if mask.shape == grid.shape:
        return mask
    if mask.ndim == 1 and mask.size == grid.size:
        return mask.reshape(grid.shape)
    # a list of node indices
    out = np.zeros(grid.size, dtype=bool)
    out[np.asarray(region, dtype=int).ravel()] = True
    return out.reshape(grid.shape)


def linf_distance(a: Field, b: Field, region=None) -> float:
    """Sup-norm distance between two fields on the same grid.

    ``region`` may be a boolean mask, a predicate on node coordinates, or a
    sequence of flat node indices.
    """
    if a.grid != b.grid:
        raise UsageError("fields live on different grids")
    mask = _region_mask(a.grid, region)
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(a.values - b.values)[mask]))


@dataclass
class Trajectory:
    """Time-ordered snapshots of one solver run."""

    snapshots: list
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if not self.snapshots:
            raise DataError("a trajectory needs at least one snapshot")
        g = self.snapshots[0].grid
        for a, b in zip(self.snapshots, self.snapshots[1:]):
            if not b.time > a.time:
                raise DataError(f"snapshot times not increasing: {a.time} then {b.time}")
            if b.grid != g:
                raise DataError("snapshots live on different grids")

    @property
    def grid(self) -> Grid:
        return self.snapshots[0].grid

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def final(self) -> Field:
        return self.snapshots[-1]

    def __len__(self):
        return len(self.snapshots)

    def __iter__(self):
        return iter(self.snapshots)

    def at(self, t: float, atol: float | None = None) -> Field:
        """Snapshot whose time matches ``t`` within ``atol``."""
        times = self.times
        if atol is None:
            atol = 1e-9 * max(1.0, abs(times[-1]))
        i = int(np.argmin(np.abs(times - t)))
        if abs(times[i] - t) > atol:
            raise RangeError(f"no snapshot at t={t} (nearest {times[i]})")
        return self.snapshots[i]

    def between(self, t0: float, t1: float) -> list:
        """Snapshots with time in the half-open window (t0, t1]."""
        tol = 1e-12 * max(1.0, abs(t1))
        return [s for s in self.snapshots if t0 + tol < s.time <= t1 + tol]


# ---------------------------------------------------------------- CSV I/O

def write_field_csv(field: Field, path) -> None:
    pts = field.grid.points()
    data = np.column_stack([pts, field.values.ravel()])
    header = f"t={field.time!r}"
    np.savetxt(path, data, delimiter=",", header=header, comments="# ", fmt="%.17g")


def read_field_csv(path, grid: Grid | None = None) -> Field:
    """Read a field CSV.  Without ``grid`` the grid is inferred from the nodes."""
    path = Path(path)
    with path.open() as fh:
        first = fh.readline().strip()
    if not first.startswith("#") or "t=" not in first:
        raise DataError(f"{path}: missing '# t=<time>' header")
    t = float(first.split("t=", 1)[1])
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    dim = data.shape[1] - 1
    if grid is None:
        lo, hi, n = [], [], []
        for k in range(dim):
            ax = np.unique(data[:, k])
            lo.append(ax[0])
            hi.append(ax[-1])
            n.append(ax.size)
        grid = make_grid(lo, hi, n)
    return Field(grid, data[:, dim], t)


def write_trajectory(traj: Trajectory, directory, prefix: str = "snap") -> Path:
    """Write one CSV per snapshot and a ``manifest.csv`` of (index, time, file)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, snap in enumerate(traj.snapshots):
        name = f"{prefix}_{i:05d}.csv"
        write_field_csv(snap, directory / name)
        rows.append(f"{i},{snap.time!r},{name}")
    manifest = directory / "manifest.csv"
    manifest.write_text("index,time,file\n" + "\n".join(rows) + "\n")
    return manifest


def read_trajectory(directory) -> Trajectory:
    directory = Path(directory)
    manifest = directory / "manifest.csv"
    lines = manifest.read_text().strip().splitlines()[1:]
    snaps = []
    grid = None
    for line in lines:
        _, _, name = line.split(",", 2)
        f = read_field_csv(directory / name, grid)
        grid = f.grid
        snaps.append(f)
    return Trajectory(snaps)

