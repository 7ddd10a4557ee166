"""Reduced (eps -> 0) interface laws.

* the scalar law g(V) := c0 V - Phi_beta(V) = -F, its roots, folds and the
  stable set {Phi_beta' < c0};
* branch evolution under a forcing signal with fold jumps;
* hysteresis loops for the two linear ramps;
* traveling-wave velocities 2 c0 V = Phi_beta(V) - Phi_beta(-V);
* the singularly perturbed nonlocal kinetic equation for f_eps.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import kernels
from .forcing import hysteresis_ramps, sample
from .orientation import PhiEvaluator
from .standing_wave import StandingWaveProfile


class DiagramError(ValueError):
    pass


class BranchError(ValueError):
    pass


class KineticInstabilityError(RuntimeError):
    pass


# ----------------------------------------------------------------------------
# branch diagram

@dataclass(eq=False)
class VelocityBranchDiagram:
    phi: PhiEvaluator
    v_grid: np.ndarray
    g_values: np.ndarray
    dg_values: np.ndarray
    extrema: list  # (V*, F*) with F* = -g(V*), ascending in V
    extremum_kinds: list  # "max" / "min" of g
    stable_set: list  # closed intervals (a, b), possibly infinite ends
    @property
    def c0(self) -> float:
        return self.phi.c0

    @property
    def beta(self) -> float:
        return self.phi.beta

    @property
    def fold_forcings(self) -> list[float]:
        return [F for _, F in self.extrema]

    @property
    def forbidden_intervals(self) -> list[tuple[float, float]]:
        """Open velocity intervals with Phi' > c0 (complement of the stable set)."""
        out = []
        for (a, _), (b, _), k in zip(self.extrema[:-1], self.extrema[1:], self.extremum_kinds):
            if k == "max":
                out.append((a, b))
        return out

    @property
    def V_min(self):
        return self.extrema[0][0] if self.extrema else None

    @property
    def V_max(self):
        return self.extrema[1][0] if len(self.extrema) > 1 else None

    @property
    def F_min(self):
        return min(self.fold_forcings) if self.extrema else None

    @property
    def F_max(self):
        return max(self.fold_forcings) if self.extrema else None

    def g(self, V: float) -> float:
        return self.c0 * V - self.phi.phi(V)

    def g_and_derivative(self, V: float) -> tuple[float, float]:
        p, dp = self.phi.phi_and_derivative(V)
        return self.c0 * V - p, self.c0 - dp

    def stable_index(self, V: float, slack: float = 0.0):
        """Index of the stable interval containing V (None inside a forbidden one)."""
        for i, (a, b) in enumerate(self.stable_set):
            if a - slack <= V <= b + slack:
                return i
        return None

    def branch_name(self, idx) -> str:
        if idx is None:
            return "forbidden"
        if idx == 0:
            return "left"
        if idx == len(self.stable_set) - 1:
            return "right"
        return "middle"

    def to_dict(self) -> dict:
        return {
            "beta": self.beta, "delta": self.phi.delta, "c0": self.c0,
            "extrema": [{"V": V, "F": F, "kind_of_g": k}
                        for (V, F), k in zip(self.extrema, self.extremum_kinds)],
            "stable_set": [[a, b] for a, b in self.stable_set],
            "forbidden_intervals": [[a, b] for a, b in self.forbidden_intervals],
            "V_scan": float(self.v_grid[-1]), "n": int(self.v_grid.size),
        }


def build_diagram(phi: PhiEvaluator, V_scan: float = 30.0, n: int = 2001) -> VelocityBranchDiagram:
    """Sample g on [-V_scan, V_scan] and locate its extrema (folds)."""
    Vs = np.linspace(-V_scan, V_scan, n)
    ph, dph = phi.table(Vs)
    c0 = phi.c0
    g = c0 * Vs - ph
    dg = c0 - dph
    if dg[0] <= 0 or dg[-1] <= 0:
        raise DiagramError(f"g' is not positive at the scan ends; increase V_scan (now {V_scan})")
    idx = np.nonzero(np.sign(dg[:-1]) != np.sign(dg[1:]))[0]
    extrema, kinds = [], []
    for i in idx:
        if i == 0 or i >= n - 2:
            raise DiagramError(f"extremum at the scan boundary; increase V_scan (now {V_scan})")
        Vs_ = brentq(lambda v: c0 - phi.phi_derivative(v), Vs[i], Vs[i + 1], xtol=1e-12, rtol=1e-15)
        extrema.append((float(Vs_), float(-(c0 * Vs_ - phi.phi(Vs_)))))
        kinds.append("max" if dg[i] > 0 else "min")
    stable, left = [], -np.inf
    for (V, _), k in zip(extrema, kinds):
        if k == "max":
            stable.append((left, V))
        else:
            left = V
    stable.append((left, np.inf))
    return VelocityBranchDiagram(phi, Vs, g, dg, extrema, kinds, stable)


def _exact_root(diag: VelocityBranchDiagram, F: float, a: float, b: float) -> float:
    return float(brentq(lambda v: diag.g(v) + F, a, b, xtol=1e-13, rtol=1e-15, maxiter=200))


def _beyond(diag: VelocityBranchDiagram, F: float, side: int):
    """Root outside the scanned range (g is increasing there), or None."""
    V0 = diag.v_grid[-1] if side > 0 else diag.v_grid[0]
    r0 = diag.g_values[-1 if side > 0 else 0] + F
    if side * r0 >= 0:
        return None
    a, step = V0, max(abs(V0), 1.0)
    for _ in range(60):
        b = a + side * step
        if side * (diag.g(b) + F) > 0:
            lo, hi = (a, b) if side > 0 else (b, a)
            return _exact_root(diag, F, lo, hi)
        a, step = b, 2 * step
    raise DiagramError("no root found beyond the scan range")


def solve_velocity(diag: VelocityBranchDiagram, F: float) -> list[float]:
    """All roots of g(V) = -F in ascending order, refined on the exact g."""
    r = diag.g_values + F
    roots = []
    lo = _beyond(diag, F, -1)
    if lo is not None:
        roots.append(lo)
    for i in np.nonzero(r == 0.0)[0]:
        roots.append(float(diag.v_grid[i]))
    idx = np.nonzero(r[:-1] * r[1:] < 0)[0]
    for i in idx:
        roots.append(_exact_root(diag, F, diag.v_grid[i], diag.v_grid[i + 1]))
    hi = _beyond(diag, F, +1)
    if hi is not None:
        roots.append(hi)
    # tangential roots at folds (no sign change)
    for V, Fs in diag.extrema:
        if abs(Fs - F) <= 1e-9 * (1 + abs(F)) and all(abs(V - x) > 1e-6 for x in roots):
            roots.append(V)
    return sorted(roots)


def _candidate_roots(diag: VelocityBranchDiagram, F: float) -> list[float]:
    """Approximate roots of g = -F from the sampled values (linear interpolation)."""
    r = diag.g_values + F
    c = list(diag.v_grid[r == 0.0])
    for i in np.nonzero(r[:-1] * r[1:] < 0)[0]:
        a, b = diag.v_grid[i], diag.v_grid[i + 1]
        c.append(a - r[i] * (b - a) / (r[i + 1] - r[i]))
    for side in (-1, 1):
        b = _beyond(diag, F, side)
        if b is not None:
            c.append(b)
    for V, Fs in diag.extrema:
        if abs(Fs - F) <= 1e-9 * (1 + abs(F)):
            c.append(V)
    return sorted(set(float(x) for x in c))


def _newton(diag: VelocityBranchDiagram, F: float, V: float, bracket: tuple[float, float]) -> float:
    """Newton on the exact g from an interpolated guess, kept inside bracket."""
    a, b = bracket
    for _ in range(30):
        g, dg = diag.g_and_derivative(V)
        r = g + F
        if abs(r) <= 1e-11 * (1 + abs(F)):
            return V
        Vn = V - r / dg if dg > 0 else np.nan
        if not np.isfinite(Vn) or not (a <= Vn <= b):
            break
        V = Vn
    # g is increasing on a stable interval: expand a bracket around V
    r = diag.g(V) + F
    step = 1e-3 * (1 + abs(V))
    side = -1.0 if r > 0 else 1.0
    x0 = V
    for _ in range(80):
        x1 = min(max(x0 + side * step, a), b)
        if (diag.g(x1) + F) * r <= 0:
            return _exact_root(diag, F, min(x0, x1), max(x0, x1))
        x0, step = x1, 2 * step
    raise BranchError(f"root refinement failed near V={V}")


# ----------------------------------------------------------------------------
# branch evolution

@dataclass(eq=False)
class BranchHistory:
    t: np.ndarray
    F: np.ndarray
    V: np.ndarray
    branch: list
    jump_flag: np.ndarray
    jump_events: list  # (t, F, V_before, V_after)

    def rows(self):
        for k in range(self.t.size):
            yield (self.t[k], self.F[k], self.V[k], self.branch[k], int(self.jump_flag[k]))


def _interval_bounds(diag, idx):
    a, b = diag.stable_set[idx]
    return a, b


def evolve_branch(diag: VelocityBranchDiagram, F_signal, t: Sequence[float],
                  V_init: float) -> BranchHistory:
    """Follow a root of g(V) = -F(t) with the fold-jump selection rule.

    Between folds V(t) stays on its stable interval (the root nearest the
    previous value); when that interval no longer contains a root, V jumps to
    the nearest root in another stable interval and the event is recorded.
    The rule is applied step by step, so non-monotone forcings are allowed.
    """
    t = np.asarray(t, dtype=float)
    F = np.asarray(F_signal, dtype=float) if not callable(F_signal) else sample(F_signal, t)
    if F.shape != t.shape:
        raise ValueError("forcing samples must match the time grid")
    g0 = diag.g(V_init)
    if abs(g0 + F[0]) > 1e-6 * (1 + abs(F[0])):
        raise BranchError(f"V_init={V_init} is not a root of g(V)=-F(0) (residual {g0 + F[0]:.2e})")
    idx = diag.stable_index(V_init, slack=1e-9)
    if idx is None:
        raise BranchError(f"V_init={V_init} lies in a forbidden interval")
    V = np.empty(t.size)
    names, flags, events = [], np.zeros(t.size, dtype=bool), []
    Vprev = float(V_init)
    for k in range(t.size):
        cands = _candidate_roots(diag, F[k])
        a, b = _interval_bounds(diag, idx)
        same = [c for c in cands if a - 1e-9 <= c <= b + 1e-9]
        if same:
            Vk = min(same, key=lambda c: abs(c - Vprev))
            Vk = _newton(diag, F[k], Vk, (a, b))
        else:
            other = []
            for c in cands:
                j = diag.stable_index(c, slack=1e-9)
                if j is not None and j != idx:
                    other.append((abs(c - Vprev), c, j))
            if not other:
                raise BranchError(f"no stable root available at t={t[k]}")
            _, Vk, idx = min(other)
            a, b = _interval_bounds(diag, idx)
            Vk = _newton(diag, F[k], Vk, (a, b))
            flags[k] = True
            events.append((float(t[k]), float(F[k]), Vprev, float(Vk)))
        V[k] = Vk
        names.append(diag.branch_name(idx))
        Vprev = Vk
    return BranchHistory(t, F, V, names, flags, events)


@dataclass(eq=False)
class HysteresisResult:
    down: object
    up: object
    area: float

    @property
    def jump_forcings(self) -> dict:
        return {"down": [e[1] for e in self.down.jump_events],
                "up": [e[1] for e in self.up.jump_events]}


def loop_area(F_a, V_a, F_b, V_b, n: int = 4001) -> float:
    """Area between two V(F) curves over their common forcing range."""
    F_a, V_a, F_b, V_b = map(np.asarray, (F_a, V_a, F_b, V_b))
    lo = max(F_a.min(), F_b.min())
    hi = min(F_a.max(), F_b.max())
    if hi <= lo:
        return 0.0
    Fg = np.linspace(lo, hi, n)

    def resample(F, V):
        o = np.argsort(F, kind="stable")
        return np.interp(Fg, F[o], V[o])

    return float(np.trapezoid(np.abs(resample(F_a, V_a) - resample(F_b, V_b)), Fg))


def hysteresis_loop(diag: VelocityBranchDiagram, n_steps: int = 2001,
                    F_start: float = -1.0, F_end: float = -2.25) -> HysteresisResult:
    """Run both ramps.  The decreasing ramp starts on the smallest root and
    the increasing one on the largest root of its initial forcing."""
    t = np.linspace(0.0, 1.0, n_steps)
    down, up = hysteresis_ramps(F_start, F_end)
    Vd0 = solve_velocity(diag, float(down(0.0)))[0]
    Vu0 = solve_velocity(diag, float(up(0.0)))[-1]
    hd = evolve_branch(diag, down, t, Vd0)
    hu = evolve_branch(diag, up, t, Vu0)
    return HysteresisResult(hd, hu, loop_area(hd.F, hd.V, hu.F, hu.V))


@dataclass(frozen=True)
class JumpEvent:
    t: float  # entry into the forbidden interval
    F: float
    V_before: float
    V_after: float
    t_mid: float  # crossing of the interval midpoint
    F_mid: float


def detect_jumps(t, F, V, diag: VelocityBranchDiagram) -> list[JumpEvent]:
    """Jumps of a V trace across the forbidden intervals of ``diag``.

    A jump is a crossing of the midpoint of a forbidden interval.  Its
    forcing is taken where the trace last entered that interval before the
    midpoint crossing, i.e. where it left the stable branch it had followed.
    Times and forcings are linearly interpolated between samples.
    """
    t, F, V = map(np.asarray, (t, F, V))
    out = []

    def cross(level, i):
        w = (level - V[i]) / (V[i + 1] - V[i])
        return float(t[i] + w * (t[i + 1] - t[i])), float(F[i] + w * (F[i + 1] - F[i]))

    for a, b in diag.forbidden_intervals:
        mid = 0.5 * (a + b)
        s = np.sign(V - mid)
        for i in np.nonzero(s[:-1] * s[1:] < 0)[0]:
            down = V[i + 1] < V[i]
            edge = b if down else a
            j = i
            while j > 0 and (V[j] < edge if down else V[j] > edge):
                j -= 1
            te, Fe = cross(edge, j) if (V[j] - edge) * (V[j + 1] - edge) <= 0 else (float(t[j]), float(F[j]))
            tm, Fm = cross(mid, i)
            k = i + 1
            while k < V.size - 1 and a < V[k] < b:
                k += 1
            out.append(JumpEvent(te, Fe, float(V[j]), float(V[k]), tm, Fm))
    return sorted(out, key=lambda e: e.t)


# ----------------------------------------------------------------------------
# traveling waves

@dataclass(frozen=True)
class TravelingWaveSolution:
    V0: float
    lambda0: float
    nondegenerate: bool
    h_prime: float


def _tw_solution(phi: PhiEvaluator, V: float, tol: float) -> TravelingWaveSolution:
    pp, dpp = phi.phi_and_derivative(V)
    pm, dpm = phi.phi_and_derivative(-V)
    hp = 2 * phi.c0 - dpp - dpm
    return TravelingWaveSolution(float(V), 0.5 * (pp + pm), bool(abs(hp) > tol), float(hp))


def tw_velocities(phi: PhiEvaluator, V_scan: float = 40.0, n: int = 801,
                  tol: float = 1e-8) -> list[TravelingWaveSolution]:
    """All roots of h(V) = 2 c0 V - Phi(V) + Phi(-V); V = 0 always included."""
    Vs = np.linspace(0.0, V_scan, n)[1:]
    pp, _ = phi.table(Vs)
    pm, _ = phi.table(-Vs)
    hv = 2 * phi.c0 * Vs - pp + pm
    scale = max(1e-14, 1e-10 * phi.c0)

    def h(v):
        return 2 * phi.c0 * v - phi.phi(v) + phi.phi(-v)

    roots = []
    for i in np.nonzero(hv[:-1] * hv[1:] < 0)[0]:
        roots.append(brentq(h, Vs[i], Vs[i + 1], xtol=1e-13, rtol=1e-15))
    # a root between 0 and the first sample
    if hv[0] * phi.c0 < 0 and abs(hv[0]) > scale:
        hp0 = 2 * (phi.c0 - phi.phi_derivative(0.0))
        if hp0 * hv[0] < 0:
            roots.append(brentq(h, 1e-9 * Vs[0], Vs[0], xtol=1e-15))
    out = [_tw_solution(phi, 0.0, tol)]
    for r in sorted(roots):
        out.append(_tw_solution(phi, r, tol))
        out.append(_tw_solution(phi, -r, tol))
    return sorted(out, key=lambda s: s.V0)


def tw_threshold(profile: StandingWaveProfile, delta: float = 1.0, V_scan: float = 40.0,
                 n: int = 801) -> tuple[float, float]:
    """Smallest beta with a nonzero root of h, and the velocity where it appears.

    By linearity Phi_beta = beta Phi_1, so V > 0 is a root exactly when
    beta = 2 c0 V / (Phi_1(V) - Phi_1(-V)).  The threshold is the minimum of
    this map over V > 0 (its V -> 0 limit is c0 / Phi_1'(0)); returns
    (inf, nan) when the odd part of Phi_1 never has the right sign.
    """
    unit = PhiEvaluator(profile, 1.0, delta)
    c0 = profile.c0
    Vs = np.linspace(0.0, V_scan, n)[1:]
    pp, _ = unit.table(Vs)
    pm, _ = unit.table(-Vs)
    odd = pp - pm
    d0 = unit.phi_derivative(0.0)
    B = np.where(odd > 0, 2 * c0 * Vs / np.where(odd > 0, odd, 1.0), np.inf)
    B0 = c0 / d0 if d0 > 0 else np.inf
    i = int(np.argmin(B))
    if not np.isfinite(B[i]) and not np.isfinite(B0):
        return np.inf, np.nan
    if B0 <= B[i]:
        return float(B0), 0.0

    def Bf(v):
        o = unit.phi(v) - unit.phi(-v)
        return 2 * c0 * v / o if o > 0 else np.inf

    lo = Vs[i - 1] if i > 0 else 0.5 * Vs[0]
    hi = Vs[min(i + 1, Vs.size - 1)]
    res = minimize_scalar(Bf, bounds=(lo, hi), method="bounded", options={"xatol": 1e-8})
    return float(min(res.fun, B[i])), float(res.x)


# ----------------------------------------------------------------------------
# kinetic equation

@dataclass(eq=False)
class KineticHistory:
    t: np.ndarray
    F: np.ndarray
    V: np.ndarray
    f: np.ndarray
    epsilon: float
    beta: float
    dt_used: list


def simulate_kinetic(profile: StandingWaveProfile, beta: float, epsilon: float,
                     F_signal: Callable, f_init, T: float, dt: float | None = None,
                     chunk: int = 2000, record_every: int = 1,
                     guard_factor: float = 1e6) -> KineticHistory:
    """Integrate eps f_t = f'' + V f' - f - beta theta0' with
    c0 V = int (theta0')^2 f - F(t).

    Implicit diffusion, damping and advection (with the velocity lagged by
    one step).  When dt is None it is set per chunk of steps to
    eps h / (2 (|V|max + 1)), |V|max from the previous chunk.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    f = np.array(f_init, dtype=float, copy=True)
    if f.shape != profile.z.shape:
        raise ValueError("f_init must live on the standing-wave grid")
    f[0] = f[-1] = 0.0
    dth = np.ascontiguousarray(profile.dtheta)
    wq = np.ascontiguousarray(profile.quad_weights * profile.weight)
    c0, h = profile.c0, profile.h
    guard = guard_factor * max(1.0, np.max(np.abs(f)), beta * np.max(dth))
    ts, Fs, Vs, dts = [], [], [], []
    t = 0.0
    Vmax = abs((wq @ f - float(F_signal(0.0))) / c0)
    while t < T - 1e-14:
        step = dt if dt is not None else epsilon * h / (2.0 * (1.2 * Vmax + 1.0))
        nsteps = min(chunk, int(np.ceil((T - t) / step - 1e-9)))
        tk = t + step * np.arange(nsteps)
        Fk = np.ascontiguousarray(sample(F_signal, tk))
        Vout = np.empty(nsteps)
        status = kernels.kinetic_run(f, dth, wq, c0, h, epsilon, beta, step, Fk, Vout, guard)
        if status >= 0:
            raise KineticInstabilityError(
                f"kinetic field exceeded {guard:.3g} at t={tk[status]:.6g} "
                f"(step {status} of chunk, dt={step:.3g}, V={Vout[status]:.4g})")
        ts.append(tk[::record_every])
        Fs.append(Fk[::record_every])
        Vs.append(Vout[::record_every])
        dts.append(step)
        Vmax = float(np.max(np.abs(Vout)))
        t = t + step * nsteps
    # final state
    Fend = float(F_signal(t))
    ts.append(np.array([t]))
    Fs.append(np.array([Fend]))
    Vs.append(np.array([(wq @ f - Fend) / c0]))
    return KineticHistory(np.concatenate(ts), np.concatenate(Fs), np.concatenate(Vs),
                          f, float(epsilon), float(beta), dts)
