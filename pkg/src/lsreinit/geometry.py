"""Zero sets, signed distance, extinction points and propagation cones."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import ndimage

from .errors import EmptyInterfaceError, RangeError, ResolutionError, UsageError
from .grid import Field, Grid, Trajectory

ZERO_TOL = 1e-12
_CHUNK = 2_000_000  # distance-matrix entries per block


@dataclass(frozen=True, eq=False)
class InterfaceSet:
    """Zero-level point cloud of a field at one time."""

    time: float
    points: np.ndarray  # shape (m, dim)
    source: Grid

    def __len__(self):
        return len(self.points)


def _sign(values: np.ndarray, zero_tol: float) -> np.ndarray:
    return np.where(values > zero_tol, 1, np.where(values < -zero_tol, -1, 0))


def extract_interface(field: Field, zero_tol: float = ZERO_TOL) -> InterfaceSet:
    """Nodes with |u| <= zero_tol plus linear zero crossings on grid edges."""
    g = field.grid
    v = field.values
    coords = g.nodes()
    s = _sign(v, zero_tol)
    pts = [np.stack([c[s == 0] for c in coords], axis=1)]
    for k in range(g.dim):
        lo = [slice(None)] * g.dim
        hi = [slice(None)] * g.dim
        lo[k] = slice(0, -1)
        hi[k] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        cross = s[lo] * s[hi] < 0
        if not cross.any():
            continue
        va, vb = v[lo][cross], v[hi][cross]
        frac = va / (va - vb)
        p = np.stack([c[lo][cross] for c in coords], axis=1)
        p[:, k] += frac * g.dx[k]
        pts.append(p)
    points = np.concatenate(pts, axis=0)
    if len(points) == 0:
        raise EmptyInterfaceError(f"field at t={field.time} has no zero level")
    return InterfaceSet(field.time, points, g)


def _min_distance(queries: np.ndarray, points: np.ndarray):
    """Exact nearest distance and index from each query to the point cloud."""
    m = len(points)
    rows = max(1, _CHUNK // max(m, 1))
    dist = np.empty(len(queries))
    arg = np.empty(len(queries), dtype=int)
    for i in range(0, len(queries), rows):
        q = queries[i:i + rows]
        d2 = np.sum((q[:, None, :] - points[None, :, :]) ** 2, axis=2)
        j = np.argmin(d2, axis=1)
        arg[i:i + rows] = j
        dist[i:i + rows] = np.sqrt(d2[np.arange(len(q)), j])
    return dist, arg


def signed_distance_field(field: Field, zero_tol: float = ZERO_TOL) -> Field:
    """Signed distance to the extracted zero set, sign taken from the field."""
    iface = extract_interface(field, zero_tol)
    dist, _ = _min_distance(field.grid.points(), iface.points)
    s = _sign(field.values, zero_tol).ravel()
    return field.with_values((s * dist).reshape(field.grid.shape))


def nearest_points(x, iface: InterfaceSet, tol: float = 1e-9) -> np.ndarray:
    """Interface points within ``tol`` of the minimal distance to ``x``."""
    if len(iface) == 0:
        raise EmptyInterfaceError("empty interface")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = np.sqrt(np.sum((iface.points - x) ** 2, axis=1))
    return iface.points[d <= d.min() + tol]


def hausdorff(a: InterfaceSet, b: InterfaceSet) -> float:
    """Symmetric Hausdorff distance between two point clouds."""
    dab, _ = _min_distance(a.points, b.points)
    dba, _ = _min_distance(b.points, a.points)
    return float(max(dab.max(), dba.max()))


def _ball_mask(grid: Grid, x, radius: float) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    coords = grid.nodes()
    r2 = sum((c - xi) ** 2 for c, xi in zip(coords, x))
    return r2 <= radius * radius * (1 + 1e-12)


def _snapshot_spacing(traj: Trajectory) -> float:
    times = traj.times
    if len(times) < 2:
        raise ResolutionError("trajectory has a single snapshot")
    return float(np.median(np.diff(times)))


@dataclass(frozen=True)
class ExtinctionParams:
    """Discretisation of 'there exist eps, delta' in the extinction test.

    ``eps_ball`` and ``delta`` default to 3*dx and 10 snapshot spacings.
    ``zero_tol`` decides which values count as zero.  Snapshots in the first
    ``settle * delta`` of the window are skipped, which lets a front that is
    collapsing at time t finish doing so at grid resolution.  ``tie_tol`` is
    the nearest-point tie tolerance.
    """

    eps_ball: float | None = None
    delta: float | None = None
    zero_tol: float = ZERO_TOL
    settle: float = 0.0
    tie_tol: float | None = None

    def resolve(self, traj: Trajectory) -> "ExtinctionParams":
        dx = traj.grid.min_dx
        return ExtinctionParams(
            3 * dx if self.eps_ball is None else self.eps_ball,
            10 * _snapshot_spacing(traj) if self.delta is None else self.delta,
            self.zero_tol,
            self.settle,
            dx if self.tie_tol is None else self.tie_tol,
        )


def detect_extinction(traj: Trajectory, x, t: float, eps_ball: float | None = None,
                      delta: float | None = None, zero_tol: float = ZERO_TOL,
                      settle: float = 0.0) -> bool:
    """True if the zero level has left the ball B_eps(x) throughout (t, t+delta].

    Discretely: every snapshot in the window has all nodes of the closed ball
    strictly one-signed (|u| > zero_tol with a common sign).
    """
    p = ExtinctionParams(eps_ball, delta, zero_tol, settle).resolve(traj)
    grid = traj.grid
    if p.eps_ball < 2 * grid.min_dx * (1 - 1e-12):
        raise UsageError(f"eps_ball={p.eps_ball} is below two grid spacings")
    times = traj.times
    if t < times[0] - 1e-12 or t + p.delta > times[-1] * (1 + 1e-12) + 1e-12:
        raise RangeError(f"window [{t}, {t + p.delta}] exceeds the trajectory [{times[0]}, {times[-1]}]")
    iface = extract_interface(traj.at(t, atol=_snapshot_spacing(traj) * 0.5 + 1e-12), p.zero_tol)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    dmin = np.min(np.sqrt(np.sum((iface.points - x) ** 2, axis=1)))
    if dmin > p.eps_ball:
        raise UsageError(f"point {x.tolist()} is {dmin:.3g} away from the interface at t={t}")
    window = traj.between(t + p.settle * p.delta, t + p.delta)
    if len(window) < 2:
        raise ResolutionError(f"only {len(window)} snapshot(s) in the window ({t}, {t + p.delta}]")
    mask = _ball_mask(grid, x, p.eps_ball)
    for snap in window:
        s = _sign(snap.values[mask], p.zero_tol)
        if not (np.all(s == 1) or np.all(s == -1)):
            return False
    return True


@dataclass(frozen=True)
class ContinuityVerdict:
    point: tuple
    time: float
    verdict: str  # "continuous" or "discontinuous"
    witness: list = dc_field(default_factory=list)  # (nearest point, is_extinction)
    params: dict = dc_field(default_factory=dict)

    @property
    def n_nearest(self) -> int:
        return len(self.witness)

    @property
    def n_extinction(self) -> int:
        return sum(1 for _, e in self.witness if e)


def _tie_groups(points: np.ndarray, radius: float) -> list:
    """Greedy clustering so that near-duplicate tie points are tested once."""
    reps = []
    for p in points:
        if not any(np.linalg.norm(p - q) <= radius for q in reps):
            reps.append(p)
    return reps


def classify_continuity(traj: Trajectory, x, t: float,
                        params: ExtinctionParams = ExtinctionParams()) -> ContinuityVerdict:
    """Continuity of the signed distance at (x, t): continuous iff some
    nearest interface point is not an extinction point."""
    p = params.resolve(traj)
    snap = traj.at(t, atol=_snapshot_spacing(traj) * 0.5 + 1e-12)
    iface = extract_interface(snap, p.zero_tol)
    near = nearest_points(x, iface, p.tie_tol)
    witness = []
    for z in _tie_groups(near, p.eps_ball):
        ext = detect_extinction(traj, z, t, p.eps_ball, p.delta, p.zero_tol, p.settle)
        witness.append((tuple(float(c) for c in z), bool(ext)))
    verdict = "continuous" if any(not e for _, e in witness) else "discontinuous"
    x = tuple(float(c) for c in np.atleast_1d(x))
    record = {"eps_ball": p.eps_ball, "delta": p.delta, "zero_tol": p.zero_tol,
              "settle": p.settle, "tie_tol": p.tie_tol, "dx": traj.grid.min_dx}
    return ContinuityVerdict(x, float(t), verdict, witness, record)


def cone_check(traj: Trajectory, x, t: float, r: float, speed: float,
               zero_tol: float = ZERO_TOL) -> bool:
    """Finite-propagation certificate around a one-signed ball.

    Every snapshot at time t + tau/speed with 0 < tau < r must keep the sign
    of B_r(x) on the shrunken ball B_{r - tau}(x).
    """
    grid = traj.grid
    snap = traj.at(t, atol=_snapshot_spacing(traj) * 0.5 + 1e-12)
    mask = _ball_mask(grid, x, r)
    s0 = _sign(snap.values[mask], zero_tol)
    if not (np.all(s0 == 1) or np.all(s0 == -1)):
        raise UsageError(f"ball of radius {r} at {x} is not one-signed at t={t}")
    sign = int(s0[0])
    t_top = t + r / speed
    if traj.times[-1] < t_top - 1e-12 * max(1.0, t_top):
        raise RangeError(f"trajectory ends at {traj.times[-1]}, cone reaches {t_top}")
    for later in traj.between(t, t_top):
        tau = (later.time - t) * speed
        if tau >= r:
            continue
        inner = _ball_mask(grid, x, r - tau)
        if not inner.any():
            continue
        if not np.all(_sign(later.values[inner], zero_tol) == sign):
            return False
    return True


def _central_gradient_norm(values: np.ndarray, grid: Grid) -> np.ndarray:
    grads = np.gradient(values, *grid.dx, edge_order=2)
    if grid.dim == 1:
        grads = [grads]
    return np.sqrt(sum(gk ** 2 for gk in grads))


def _kinks_from_distance(sdf: Field, kink_tol: float) -> np.ndarray:
    grid = sdf.grid
    dist = np.abs(sdf.values)
    g = _central_gradient_norm(dist, grid)
    # the distance itself has a kink on the zero set; that one is not excluded
    kinks = (g < 1.0 - kink_tol) & (dist > 2 * grid.min_dx)
    reach = 2 * grid.min_dx
    half = [int(np.floor(reach / h + 1e-9)) for h in grid.dx]
    offs = np.meshgrid(*[np.arange(-m, m + 1) * h for m, h in zip(half, grid.dx)], indexing="ij")
    disk = sum(o ** 2 for o in offs) <= reach ** 2 * (1 + 1e-9)
    return ndimage.binary_dilation(kinks, structure=disk)


def kink_mask(field: Field, zero_tol: float = ZERO_TOL, kink_tol: float = 0.25) -> np.ndarray:
    """Nodes within two grid spacings of a kink of the distance function.

    A kink is where the central-difference gradient of the exact distance to
    the zero set drops visibly below 1 (two nearest-point branches meet).
    """
    return _kinks_from_distance(signed_distance_field(field, zero_tol), kink_tol)


def gradient_deviation(field: Field, band: float, zero_tol: float = ZERO_TOL) -> float:
    """max | |grad u|_central - 1 | over the band |d| <= band, away from kinks."""
    if not band > 0:
        raise UsageError(f"band must be positive, got {band}")
    sdf = signed_distance_field(field, zero_tol)
    sel = (np.abs(sdf.values) <= band) & ~_kinks_from_distance(sdf, 0.25)
    if not sel.any():
        raise UsageError(f"no nodes within band {band} of the interface")
    g = _central_gradient_norm(field.values, field.grid)
    return float(np.max(np.abs(g - 1.0)[sel]))


def discrete_lipschitz(field: Field) -> float:
    """Max over adjacent node pairs of |u_i - u_j| / dx."""
    out = 0.0
    for k in range(field.grid.dim):
        out = max(out, float(np.max(np.abs(np.diff(field.values, axis=k))) / field.grid.dx[k]))
    return out


def front_points(field: Field, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Boundary of the nonzero region: edge crossings plus zero nodes that
    touch a nonzero neighbour.  Used for the cone-margin check."""
    g = field.grid
    s = _sign(field.values, zero_tol)
    zero = s == 0
    edge = np.zeros_like(zero)
    for k in range(g.dim):
        nz = ~zero
        lo = [slice(None)] * g.dim
        hi = [slice(None)] * g.dim
        lo[k] = slice(0, -1)
        hi[k] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        edge[lo] |= zero[lo] & nz[hi]
        edge[hi] |= zero[hi] & nz[lo]
    coords = g.nodes()
    pts = [np.stack([c[edge] for c in coords], axis=1)]
    try:
        iface = extract_interface(field, zero_tol)
        on_node = np.zeros(len(iface.points), dtype=bool)
        # crossings are the points that are not grid nodes with |u| <= tol
        n_zero = int(zero.sum())
        on_node[:n_zero] = True
        pts.append(iface.points[~on_node])
    except EmptyInterfaceError:
        pass
    return np.concatenate(pts, axis=0)
