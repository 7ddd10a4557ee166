"""Closed planar curves moving by the nonlocal sharp-interface law

    V = kappa + Phi_beta(V)/c0 - Lambda,   Lambda = mean over the curve of (kappa + Phi_beta(V)/c0),

where V is the normal velocity along the inward normal and kappa > 0 on a
convex curve. Lambda keeps the enclosed area fixed (the line integral of V
vanishes). beta = 0 gives volume-preserving curvature flow.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.optimize import brentq

from .reduced import VelocityBranchDiagram


class CurveError(RuntimeError):
    pass


class SelfIntersectionError(CurveError):
    def __init__(self, msg: str, nodes: np.ndarray):
        super().__init__(msg)
        self.nodes = nodes


class FixedPointError(CurveError):
    pass


def _segments_cross(p: np.ndarray) -> bool:
    """True if two non-adjacent segments of the closed polygon p intersect."""
    n = len(p)
    a = p
    d = np.roll(p, -1, axis=0) - a
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    r, s = d[i], d[j]
    qp = a[j] - a[i]
    den = r[:, 0] * s[:, 1] - r[:, 1] * s[:, 0]
    ok = np.abs(den) > 1e-300
    safe = np.where(ok, den, 1.0)
    t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / safe
    u = (qp[:, 0] * r[:, 1] - qp[:, 1] * r[:, 0]) / safe
    return bool(np.any(ok & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)))


@dataclass(eq=False)
class ClosedCurve:
    """Periodic node list X_i; geometry from a periodic cubic spline in the
    chord-length parameter. Either orientation is accepted: normals point
    inward and kappa is positive on convex curves in both cases."""

    nodes: np.ndarray
    _spline: CubicSpline = field(init=False, repr=False)
    _sigma: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X = np.asarray(self.nodes, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2 or X.shape[0] < 8:
            raise CurveError("nodes must be an (n, 2) array with n >= 8")
        if not np.all(np.isfinite(X)):
            raise CurveError("non-finite node coordinates")
        self.nodes = X
        seg = np.linalg.norm(np.diff(np.vstack([X, X[:1]]), axis=0), axis=1)
        if np.any(seg <= 0):
            raise CurveError("repeated nodes")
        self._sigma = np.concatenate([[0.0], np.cumsum(seg)])
        self._spline = CubicSpline(self._sigma, np.vstack([X, X[:1]]), bc_type="periodic")

    @property
    def n(self) -> int:
        return self.nodes.shape[0]

    @property
    def signed_area(self) -> float:
        x, y = self.nodes.T
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    @property
    def area(self) -> float:
        return abs(self.signed_area)

    @property
    def orientation(self) -> int:
        """+1 for counter-clockwise, -1 for clockwise."""
        return 1 if self.signed_area > 0 else -1

    def _derivs(self, s=None):
        s = self._sigma[:-1] if s is None else s
        return self._spline(s, 1), self._spline(s, 2)

    @property
    def tangents(self) -> np.ndarray:
        d1, _ = self._derivs()
        return d1 / np.linalg.norm(d1, axis=1)[:, None]

    @property
    def normals(self) -> np.ndarray:
        """Inward unit normals."""
        T = self.tangents
        return self.orientation * np.column_stack([-T[:, 1], T[:, 0]])

    @property
    def curvature(self) -> np.ndarray:
        d1, d2 = self._derivs()
        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        return self.orientation * cross / np.linalg.norm(d1, axis=1) ** 3

    def _dense_arclength(self, m: int = 16):
        """Arclength of the spline at a refined parameter grid (Gauss points per segment)."""
        x, w = np.polynomial.legendre.leggauss(4)
        a, b = self._sigma[:-1, None], self._sigma[1:, None]
        pts = (0.5 * (b - a) * x + 0.5 * (a + b))
        speed = np.linalg.norm(self._spline(pts.ravel(), 1), axis=1).reshape(pts.shape)
        seglen = (0.5 * (b - a) * w * speed).sum(axis=1)
        return np.concatenate([[0.0], np.cumsum(seglen)])

    @property
    def length(self) -> float:
        return float(self._dense_arclength()[-1])

    @property
    def ds(self) -> np.ndarray:
        """Per-node arclength weights (periodic trapezoid rule)."""
        s = self._dense_arclength()
        seg = np.diff(s)
        return 0.5 * (seg + np.roll(seg, 1))

    @property
    def isoperimetric_ratio(self) -> float:
        return self.length**2 / (4 * np.pi * self.area)

    def spacing_ratio(self) -> tuple[float, float]:
        seg = np.linalg.norm(np.diff(np.vstack([self.nodes, self.nodes[:1]]), axis=0), axis=1)
        m = seg.mean()
        return float(seg.min() / m), float(seg.max() / m)

    def is_simple(self) -> bool:
        return not _segments_cross(self.nodes)

    def redistribute(self, n: int | None = None) -> "ClosedCurve":
        """Resample to n nodes equally spaced in arclength (periodic spline)."""
        n = self.n if n is None else n
        s = self._dense_arclength()
        target = np.linspace(0.0, s[-1], n, endpoint=False)
        # invert s(sigma) by piecewise-linear interpolation, then one Newton pass
        sig = np.interp(target, s, self._sigma)
        for _ in range(3):
            seg_idx = np.clip(np.searchsorted(self._sigma, sig, side="right") - 1, 0, self.n - 1)
            x, w = np.polynomial.legendre.leggauss(4)
            a = self._sigma[seg_idx][:, None]
            b = sig[:, None]
            pts = 0.5 * (b - a) * x + 0.5 * (a + b)
            sp = np.linalg.norm(self._spline(pts.ravel(), 1), axis=1).reshape(pts.shape)
            s_at = s[seg_idx] + (0.5 * (b - a) * w * sp).sum(axis=1)
            speed = np.linalg.norm(self._spline(sig, 1), axis=1)
            sig = sig - (s_at - target) / speed
        return ClosedCurve(self._spline(sig))

    def reversed(self) -> "ClosedCurve":
        return ClosedCurve(self.nodes[::-1].copy())


def circle(R: float = 1.0, n: int = 128, center=(0.0, 0.0)) -> ClosedCurve:
    t = 2 * np.pi * np.arange(n) / n
    return ClosedCurve(np.column_stack([center[0] + R * np.cos(t), center[1] + R * np.sin(t)]))


def ellipse(a: float = 2.0, b: float = 1.0, n: int = 128) -> ClosedCurve:
    t = 2 * np.pi * np.arange(n) / n
    return ClosedCurve(np.column_stack([a * np.cos(t), b * np.sin(t)])).redistribute()


# ----------------------------------------------------------------------------
# normal velocity

@dataclass(eq=False)
class CurveVelocityField:
    V: np.ndarray
    lambda0: float
    branch: np.ndarray  # stable-interval index per node (all 0 when beta = 0)
    iterations: int
    residual: float  # |line integral of V| / |Gamma|
    jumps: list = field(default_factory=list)  # (node, V_before, V_after)


class _BranchSolver:
    """Vectorised per-node roots of g(V) = y on a stable interval, using a
    cubic Hermite interpolant of the tabulated g (slope c0 outside the table)."""

    def __init__(self, diag: VelocityBranchDiagram):
        self.diag = diag
        self.c0 = diag.c0
        self.v = diag.v_grid
        self.spl = CubicHermiteSpline(diag.v_grid, diag.g_values, diag.dg_values)
        self.intervals = diag.stable_set

    def g(self, V):
        V = np.asarray(V, dtype=float)
        out = self.spl(np.clip(V, self.v[0], self.v[-1]))
        lo, hi = V < self.v[0], V > self.v[-1]
        out = np.where(lo, self.diag.g_values[0] + self.c0 * (V - self.v[0]), out)
        out = np.where(hi, self.diag.g_values[-1] + self.c0 * (V - self.v[-1]), out)
        return out

    def dg(self, V):
        V = np.asarray(V, dtype=float)
        inside = (V >= self.v[0]) & (V <= self.v[-1])
        return np.where(inside, self.spl(np.clip(V, self.v[0], self.v[-1]), 1), self.c0)

    def _bounds(self, idx, y):
        a = np.array([self.intervals[i][0] for i in idx])
        b = np.array([self.intervals[i][1] for i in idx])
        big = abs(self.v[-1]) + (np.abs(y).max() + np.abs(self.diag.g_values).max()) / self.c0 + 1.0
        return np.where(np.isfinite(a), a, -big), np.where(np.isfinite(b), b, big)

    def has_root(self, idx, y):
        a, b = self._bounds(idx, y)
        return (self.g(a) <= y) & (y <= self.g(b))

    def solve(self, idx, y):
        a, b = self._bounds(idx, y)
        for _ in range(200):
            m = 0.5 * (a + b)
            below = self.g(m) < y
            a = np.where(below, m, a)
            b = np.where(below, b, m)
            if np.all(b - a <= 1e-14 * (1 + np.abs(m))):
                break
        return 0.5 * (a + b)


def _g_ends(solver: "_BranchSolver", idx):
    a = np.array([solver.intervals[i][0] for i in idx])
    b = np.array([solver.intervals[i][1] for i in idx])
    ga = np.where(np.isfinite(a), solver.g(np.where(np.isfinite(a), a, 0.0)), -np.inf)
    gb = np.where(np.isfinite(b), solver.g(np.where(np.isfinite(b), b, 0.0)), np.inf)
    return ga, gb


def _initial_branches(solver: "_BranchSolver", y, ref):
    """Per node, the stable interval whose root is nearest to ref."""
    n = y.size
    best = np.full(n, np.inf)
    idx = np.zeros(n, dtype=int)
    for j in range(len(solver.intervals)):
        jj = np.full(n, j)
        ok = solver.has_root(jj, y)
        if np.any(ok):
            r = np.full(n, np.nan)
            r[ok] = solver.solve(jj[ok], y[ok])
            d = np.where(ok, np.abs(r - ref), np.inf)
            better = d < best
            idx[better] = j
            best[better] = d[better]
    return idx


def solve_normal_velocity(curve: ClosedCurve, diag: VelocityBranchDiagram | None = None,
                          previous: CurveVelocityField | None = None, tol: float = 1e-12,
                          max_iter: int = 200) -> CurveVelocityField:
    """Per-node c0 V - Phi(V) = c0 (kappa - Lambda) with Lambda chosen so that
    the line integral of V vanishes. diag=None (or beta = 0) is curvature flow.

    Each node keeps the stable branch it had at the previous step. For a fixed
    branch assignment the mean velocity R(Lambda) is continuous and decreasing
    on the window where every node still has a root, so Lambda is found by a
    bracketed solve there. If R has no zero on that window, the nodes pinned
    at the window edge have passed their fold and jump to the adjacent stable
    branch, as in the scalar reduced model.
    """
    kappa = curve.curvature
    w = curve.ds
    L = w.sum()
    if diag is None or diag.beta == 0.0:
        lam = float(np.dot(w, kappa) / L)
        V = kappa - lam
        return CurveVelocityField(V, lam, np.zeros(curve.n, dtype=int), 1,
                                  abs(float(np.dot(w, V))) / L)
    solver = _BranchSolver(diag)
    c0 = diag.c0
    nint = len(solver.intervals)
    if previous is not None and previous.branch.size == curve.n:
        idx = previous.branch.copy()
        V_ref = previous.V
    else:
        lam0 = float(np.dot(w, kappa) / L)
        idx = _initial_branches(solver, c0 * (kappa - lam0), 0.0)
        V_ref = np.zeros(curve.n)
    count = [0]

    def R(lam, idx):
        count[0] += 1
        return float(np.dot(w, solver.solve(idx, c0 * (kappa - lam)))) / L

    jumps = []
    for _ in range(max_iter):
        ga, gb = _g_ends(solver, idx)
        lo = float(np.max(kappa - gb / c0))
        hi = float(np.min(kappa - ga / c0))
        if lo > hi:
            # incompatible constraints: nodes without a root at the midpoint jump
            mid = 0.5 * (lo + hi)
            y = c0 * (kappa - mid)
            bad = ~solver.has_root(idx, y)
            new = _initial_branches(solver, y[bad], V_ref[bad])
            for i, j in zip(np.nonzero(bad)[0], new):
                jumps.append((int(i), float(V_ref[i]), None))
                idx[i] = j
            continue
        if np.isfinite(lo) and np.isfinite(hi):
            pass
        else:
            centre = previous.lambda0 if previous is not None else float(np.dot(w, kappa) / L)
            centre = min(max(centre, lo), hi)
            span = 1.0
            if not np.isfinite(lo):
                lo = centre - span
                while R(lo, idx) < 0:
                    span *= 2
                    lo = centre - span
            if not np.isfinite(hi):
                hi = max(centre, lo) + span
                while R(hi, idx) > 0:
                    span *= 2
                    hi = max(centre, lo) + span
        Rlo, Rhi = R(lo, idx), R(hi, idx)
        if Rlo >= 0 >= Rhi:
            lam = lo if Rlo == 0 else hi if Rhi == 0 else float(
                brentq(lambda x: R(x, idx), lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200))
            V = solver.solve(idx, c0 * (kappa - lam))
            res = abs(float(np.dot(w, V))) / L
            if res > max(tol, 1e-10):
                raise FixedPointError(f"Lambda solve stalled (residual {res:.3e})")
            jumps = [(i, vb, float(V[i])) for i, vb, _ in jumps]
            return CurveVelocityField(V, lam, idx, count[0], res, jumps)
        if Rlo < 0:
            # Lambda must go below lo: nodes pinned at the top of their branch jump up
            pinned = np.isclose(kappa - gb / c0, lo, rtol=0, atol=1e-12 * (1 + abs(lo)))
            step = 1
        else:
            pinned = np.isclose(kappa - ga / c0, hi, rtol=0, atol=1e-12 * (1 + abs(hi)))
            step = -1
        for i in np.nonzero(pinned)[0]:
            j = idx[i] + step
            if not 0 <= j < nint:
                raise FixedPointError("no stable branch left for a node")
            jumps.append((int(i), float(V_ref[i]), None))
            idx[i] = j
    raise FixedPointError(f"Lambda solve did not settle in {max_iter} branch updates")


# ----------------------------------------------------------------------------
# time stepping

DT_CAP = 0.2  # hard ceiling dt <= DT_CAP ds^2
DT_SAFETY = 0.1  # default; spline curvature of a sawtooth is -12/ds^2, so dt < ds^2/6


def stable_dt(curve: ClosedCurve, safety: float = DT_SAFETY) -> float:
    return safety * (curve.length / curve.n) ** 2


def step_curve(curve: ClosedCurve, velocity: CurveVelocityField, dt: float,
               redistribute: bool = True) -> ClosedCurve:
    """X <- X + dt V nu, then uniform-arclength resampling."""
    bound = stable_dt(curve, DT_CAP)
    if dt > bound * (1 + 1e-12):
        raise CurveError(f"dt={dt:g} exceeds the explicit bound 0.2 ds^2 = {bound:g}")
    X = curve.nodes + dt * velocity.V[:, None] * curve.normals
    if _segments_cross(X):
        raise SelfIntersectionError("self-intersection after step", X)
    new = ClosedCurve(X)
    return new.redistribute() if redistribute else new


@dataclass(eq=False)
class CurveHistory:
    times: np.ndarray
    area: np.ndarray
    length: np.ndarray
    isoperimetric: np.ndarray
    lambda0: np.ndarray
    flux_residual: np.ndarray  # max |line integral of V| / |Gamma| per sample interval
    snapshots: dict  # t -> (curve, velocity field)
    jumps: list  # (t, node, V_before, V_after)
    final: ClosedCurve


def evolve_curve(curve: ClosedCurve, diag: VelocityBranchDiagram | None, T: float,
                 dt: float | None = None, n_samples: int = 100, snapshot_times=()) -> CurveHistory:
    """Explicit evolution to time T; dt defaults to 0.1 ds^2 (recomputed each step)."""
    t = 0.0
    field_prev = None
    times, A, Ls, iso, lams, flux = [], [], [], [], [], []
    snaps, jumps = {}, []
    pending = sorted(snapshot_times)
    dt_sample = T / n_samples
    next_sample = 0.0
    worst = 0.0
    while True:
        vf = solve_normal_velocity(curve, diag, field_prev)
        worst = max(worst, vf.residual)
        for j in vf.jumps:
            jumps.append((t,) + j)
        while pending and pending[0] <= t + 1e-12:
            snaps[pending.pop(0)] = (curve, vf)
        if t >= next_sample - 1e-12:
            times.append(t)
            A.append(curve.area)
            Ls.append(curve.length)
            iso.append(curve.isoperimetric_ratio)
            lams.append(vf.lambda0)
            flux.append(worst)
            worst = 0.0
            next_sample += dt_sample
        if t >= T - 1e-12:
            break
        h = min(dt if dt is not None else stable_dt(curve), T - t)
        if pending:
            h = min(h, max(pending[0] - t, 1e-15))
        curve = step_curve(curve, vf, h)
        field_prev = vf
        t += h
    return CurveHistory(np.asarray(times), np.asarray(A), np.asarray(Ls), np.asarray(iso),
                        np.asarray(lams), np.asarray(flux), snaps, jumps, curve)
