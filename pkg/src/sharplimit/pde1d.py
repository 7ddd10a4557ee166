"""Finite-difference solver for the 1D phase-field / orientation system

    rho_t = rho_xx - W'(rho)/eps^2 - P rho_x + F(t)/eps,
    P_t   = delta eps P_xx - P/eps - beta rho_x,

on [-L_x, L_x] (Neumann for rho, Dirichlet for P) with interface tracking,
energy diagnostics, far-field offsets and a co-moving window.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.signal import savgol_filter

from . import kernels
from .forcing import ForcingSignal, constant, sample
from .orientation import PhiEvaluator
from .potential import make_potential
from .standing_wave import StandingWaveProfile, compute_standing_wave


class ConfigError(ValueError):
    pass


class InterfaceError(RuntimeError):
    pass


class BlowUpError(RuntimeError):
    pass


@dataclass
class SolverConfig:
    epsilon: float = 0.01
    beta: float = 150.0
    delta: float = 1.0
    L_x: float = 4.0
    h_x: float | None = None  # default eps / 10
    dt: float | None = None  # default 0.1 eps h_x
    T: float = 1.0
    potential: str = "standard"
    potential_scale: float = 1.0
    forcing: ForcingSignal = field(default_factory=lambda: constant(0.0))
    init: str = "standing"  # standing | psi | pulse
    x0: float = 0.0  # initial interface (or pulse centre)
    init_velocity: float | None = None  # psi / pulse: velocity used for P
    pulse_halfwidth: float = 0.5
    mass_constraint: bool = False
    comoving: bool = True
    n_samples: int = 500
    guard: float = 1e6
    profile_L: float = 40.0
    profile_h: float = 0.01

    def __post_init__(self):
        if isinstance(self.forcing, dict):
            self.forcing = ForcingSignal.from_dict(self.forcing)
        if self.h_x is None:
            self.h_x = self.epsilon / 10.0
        if self.dt is None:
            self.dt = 0.1 * self.epsilon * self.h_x
        self.validate()

    def validate(self):
        if self.epsilon <= 0 or self.h_x <= 0 or self.dt <= 0 or self.T <= 0:
            raise ConfigError("epsilon, h_x, dt and T must be positive")
        if self.epsilon / self.h_x < 8 - 1e-9:
            raise ConfigError(f"interface under-resolved: eps/h_x = {self.epsilon / self.h_x:.2f} < 8")
        # linearised stiff term keeps the rho matrix an M-matrix only if dt < eps^2 / max(-W'')
        if self.dt > self.epsilon**2:
            raise ConfigError(f"dt={self.dt:g} exceeds the stiff bound eps^2={self.epsilon**2:g}")
        if self.init not in ("standing", "psi", "pulse"):
            raise ConfigError(f"unknown init {self.init!r}")
        if self.n_samples < 5:
            raise ConfigError("n_samples must be >= 5")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["forcing"] = self.forcing.to_dict()
        return d


@dataclass(eq=False)
class FieldState:
    x: np.ndarray  # absolute coordinates of the window
    rho: np.ndarray
    P: np.ndarray
    t: float
    offset: int = 0  # number of cells the window has moved


@dataclass(eq=False)
class InterfaceTrack:
    times: np.ndarray
    x_eps: np.ndarray
    V_eps: np.ndarray
    F: np.ndarray
    far_left: np.ndarray
    far_right: np.ndarray
    width: np.ndarray | None = None  # pulse width (pulse runs only)


@dataclass(eq=False)
class EnergyDiagnostics:
    times: np.ndarray
    E_eps: np.ndarray
    F_eps: np.ndarray
    G_eps: np.ndarray
    rho_max: np.ndarray

    @property
    def growth(self) -> float:
        """max_t (E + F_eps)(t) / (E + F_eps)(0)."""
        s = self.E_eps + self.F_eps
        return float(np.max(s) / s[0])


@dataclass(eq=False)
class FarFieldOffsets:
    times: np.ndarray
    chi_plus: np.ndarray
    chi_minus: np.ndarray


@dataclass(eq=False)
class RunResult:
    config: SolverConfig
    track: InterfaceTrack
    energy: EnergyDiagnostics
    final: FieldState
    snapshots: dict
    steps: int
    wall_dt: float


# ----------------------------------------------------------------------------
# set-up

_PROFILES: dict = {}


def standing_profile(config: SolverConfig) -> StandingWaveProfile:
    key = (config.potential, config.potential_scale, config.profile_L, config.profile_h)
    if key not in _PROFILES:
        W = make_potential(config.potential, config.potential_scale)
        _PROFILES[key] = compute_standing_wave(W, config.profile_L, config.profile_h)
    return _PROFILES[key]


def grid(config: SolverConfig) -> np.ndarray:
    m = int(round(config.L_x / config.h_x))
    return np.arange(-m, m + 1) * config.h_x


def _psi_on(profile, beta, delta, V, y):
    psi = PhiEvaluator(profile, beta, delta).solve_psi(V).values
    return np.interp(y, profile.z, psi, left=0.0, right=0.0)


def init_standing(config: SolverConfig) -> FieldState:
    """rho = theta0((x-x0)/eps) with P = theta0'((x-x0)/eps) ("standing"),
    P = psi((x-x0)/eps; V) ("psi"), or a two-front pulse ("pulse")."""
    prof = standing_profile(config)
    x = grid(config)
    eps = config.epsilon
    a = config.pulse_halfwidth if config.init == "pulse" else 0.0
    if config.L_x - abs(config.x0) - a < 10 * eps:
        raise ConfigError("interface closer than 10 eps to the boundary")
    if config.init == "pulse":
        if a < 10 * eps:
            raise ConfigError("pulse half-width must exceed 10 eps")
        yl = (x - config.x0 + a) / eps
        yr = (config.x0 + a - x) / eps
        rho = prof.evaluate(yl) * prof.evaluate(yr)
        V = config.init_velocity or 0.0
        P = (_psi_on(prof, config.beta, config.delta, V, yl)
             - _psi_on(prof, config.beta, config.delta, -V, yr))
    else:
        y = (x - config.x0) / eps
        rho = prof.evaluate(y)
        if config.init == "psi":
            P = _psi_on(prof, config.beta, config.delta, config.init_velocity or 0.0, y)
        else:
            P = prof.evaluate(y, derivative=True)
    P[0] = P[-1] = 0.0
    return FieldState(x, np.ascontiguousarray(rho), np.ascontiguousarray(P), 0.0, 0)


# ----------------------------------------------------------------------------
# stepping

def _poly(config):
    W = standing_profile(config).potential
    return W, W.coefficients(1), W.coefficients(2)


def _advance(state: FieldState, config: SolverConfig, Fk: np.ndarray) -> np.ndarray:
    W, w1, w2 = _poly(config)
    Fout = np.empty_like(Fk)
    status = kernels.pde_run(state.rho, state.P, w1, w2, config.h_x, config.epsilon,
                             config.beta, config.delta * config.epsilon, config.dt,
                             Fk, bool(config.mass_constraint), Fout, config.guard)
    if status >= 0:
        raise BlowUpError(f"field exceeded {config.guard:g} at t={state.t + status * config.dt:.6g} "
                          f"(step {status} of chunk); max|rho|={np.nanmax(np.abs(state.rho)):.3g}, "
                          f"max|P|={np.nanmax(np.abs(state.P)):.3g}")
    state.t = state.t + Fk.size * config.dt
    return Fout


def step(state: FieldState, config: SolverConfig) -> FieldState:
    """One IMEX step (returns a new state)."""
    new = FieldState(state.x.copy(), state.rho.copy(), state.P.copy(), state.t, state.offset)
    _advance(new, config, np.array([float(config.forcing(state.t))]))
    return new


# ----------------------------------------------------------------------------
# diagnostics

def plateaus(rho: np.ndarray, frac: float = 0.1) -> tuple[float, float]:
    k = max(1, int(frac * rho.size))
    return float(np.mean(rho[:k])), float(np.mean(rho[-k:]))


def _crossings(x, rho, level):
    s = rho - level
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    ex = np.nonzero(s == 0.0)[0]
    pts = [x[i] - s[i] * (x[i + 1] - x[i]) / (s[i + 1] - s[i]) for i in idx]
    pts += [x[i] for i in ex]
    return sorted(pts)


def extract_interface(state: FieldState, offsets: FarFieldOffsets | None = None):
    """Midpoint crossing of a single transition.

    Returns (x_eps, (far_left, far_right)); plateaus are averages over the
    outer 10% of each side.  ``offsets`` is accepted for reporting only.
    """
    left, right = plateaus(state.rho)
    pts = _crossings(state.x, state.rho, 0.5 * (left + right))
    if len(pts) != 1:
        raise InterfaceError(f"interface not unique ({len(pts)} crossings)")
    return pts[0], (left, right)


def extract_pulse(state: FieldState):
    """Left and right fronts of a pulse at the level halfway between the
    outer plateau and the inner maximum."""
    left, right = plateaus(state.rho)
    outer = 0.5 * (left + right)
    level = 0.5 * (outer + float(np.max(state.rho)))
    pts = _crossings(state.x, state.rho, level)
    if len(pts) != 2:
        raise InterfaceError(f"pulse fronts not unique ({len(pts)} crossings)")
    return pts[0], pts[1], (left, right)


def energies(state: FieldState, config: SolverConfig, W=None) -> tuple[float, float, float]:
    """(E_eps, F_eps, G_eps) with the trapezoidal rule; G uses k = 1."""
    if W is None:
        W = standing_profile(config).potential
    h = config.h_x
    wq = np.full(state.rho.size, h)
    wq[0] = wq[-1] = 0.5 * h
    rx = np.gradient(state.rho, h)
    eps = config.epsilon
    E = 0.5 * eps * (wq @ rx**2) + (wq @ W.eval(state.rho)) / eps
    P2 = state.P**2
    Fe = wq @ (P2 + P2**2)
    G = E + wq @ (4.0 * P2 + P2**2)
    return float(E), float(Fe), float(G)


def far_field_offsets(W, epsilon: float, F_signal, times) -> FarFieldOffsets:
    """Solve eps^2 chi' = -W'(well + eps chi)/eps + F(t) for both wells."""
    times = np.asarray(times, dtype=float)
    F0 = float(F_signal(times[0]))

    def solve(well):
        def rhs(t, c):
            return [(-W.d1(well + epsilon * c[0]) / epsilon + float(F_signal(t))) / epsilon**2]

        def jac(t, c):
            return [[-W.d2(well + epsilon * c[0]) / epsilon**2]]

        sol = solve_ivp(rhs, (times[0], times[-1]), [F0 / W.d2(well)], t_eval=times,
                        method="Radau", jac=jac, rtol=1e-8, atol=1e-10)
        return sol.y[0]

    return FarFieldOffsets(times, solve(1.0), solve(0.0))


def velocity_from_positions(times, x, window: int = 5) -> np.ndarray:
    """Centered local-polynomial (Savitzky-Golay) derivative of x(t)."""
    times = np.asarray(times)
    if times.size < window:
        return np.gradient(x, times)
    return savgol_filter(np.asarray(x), window, 2, deriv=1, delta=times[1] - times[0],
                         mode="interp")


def _shift(state: FieldState, k: int):
    """Move the window by k cells (k > 0: to the right)."""
    if k == 0:
        return
    for arr, fill in ((state.rho, None), (state.P, 0.0)):
        if k > 0:
            edge = arr[-1] if fill is None else fill
            arr[:-k] = arr[k:].copy()
            arr[-k:] = edge
        else:
            edge = arr[0] if fill is None else fill
            arr[-k:] = arr[:k].copy()
            arr[:-k] = edge
    state.P[0] = state.P[-1] = 0.0
    state.offset += k
    state.x = state.x + k * (state.x[1] - state.x[0])


def run_experiment(config: SolverConfig, state: FieldState | None = None,
                   snapshot_times=(), progress=None) -> RunResult:
    """Full run with n_samples equally spaced diagnostics."""
    import time as _time

    wall0 = _time.perf_counter()
    if state is None:
        state = init_standing(config)
    W = standing_profile(config).potential
    nsteps = int(round(config.T / config.dt))
    per = max(1, nsteps // config.n_samples)
    pulse = config.init == "pulse"
    snap_steps = {int(round(s / config.dt)): s for s in snapshot_times}
    ts, xs, Fs, fl, fr, wd = [], [], [], [], [], []
    Es, Fe, Gs, rmax = [], [], [], []
    snapshots = {}
    shift_tol = 0.1 * config.L_x
    F_last = float(config.forcing(0.0))

    def record(Fval):
        if pulse:
            xl, xr, (a, b) = extract_pulse(state)
            xc = 0.5 * (xl + xr)
            wd.append(xr - xl)
        else:
            xc, (a, b) = extract_interface(state)
        ts.append(state.t)
        xs.append(xc)
        Fs.append(Fval)
        fl.append(a)
        fr.append(b)
        e = energies(state, config, W)
        Es.append(e[0])
        Fe.append(e[1])
        Gs.append(e[2])
        rmax.append(float(np.max(np.abs(state.rho))))
        return xc

    if config.mass_constraint:
        F_last = float(kernels_mass_forcing(state, config, W))
    record(F_last)
    done = 0
    while done < nsteps:
        n = min(per, nsteps - done)
        nxt = [s for s in snap_steps if done < s <= done + n]
        if nxt:
            n = min(nxt) - done
        tk = state.t + config.dt * np.arange(n)
        Fk = np.ascontiguousarray(sample(config.forcing, tk))
        Fout = _advance(state, config, Fk)
        done += n
        if done in snap_steps:
            snapshots[snap_steps[done]] = (state.x.copy(), state.rho.copy(), state.P.copy())
        if done % per == 0 or done == nsteps:
            xc = record(float(Fout[-1]))
            if config.comoving:
                k = int(round((xc - (state.x[0] + state.x[-1]) / 2) / config.h_x))
                if abs(k) * config.h_x > shift_tol:
                    _shift(state, k)
            if progress is not None:
                progress(state.t, xc)
    ts = np.asarray(ts)
    xs = np.asarray(xs)
    track = InterfaceTrack(ts, xs, velocity_from_positions(ts, xs), np.asarray(Fs),
                           np.asarray(fl), np.asarray(fr), np.asarray(wd) if pulse else None)
    energy = EnergyDiagnostics(ts, np.asarray(Es), np.asarray(Fe), np.asarray(Gs), np.asarray(rmax))
    return RunResult(config, track, energy, state, snapshots, nsteps,
                     _time.perf_counter() - wall0)


def kernels_mass_forcing(state: FieldState, config: SolverConfig, W) -> float:
    """Forcing that keeps the integral of rho fixed (same formula as the kernel)."""
    h = config.h_x
    wq = np.full(state.rho.size, h)
    wq[0] = wq[-1] = 0.5 * h
    dr = np.zeros_like(state.rho)
    dr[1:-1] = (state.rho[2:] - state.rho[:-2]) / (2 * h)
    length = h * (state.rho.size - 1)
    return config.epsilon * (wq @ (W.d1(state.rho) / config.epsilon**2 + state.P * dr)) / length


def tw_residual(state: FieldState, config: SolverConfig, V: float, lam: float) -> float:
    """Weighted residual of the steady moving-frame equations for a pulse.

    rho'' + V rho' - W'(rho)/eps^2 - P rho' + lam/eps and
    eps delta P'' + V P' - P/eps - beta rho', each scaled by eps^2 (rho) and
    eps (P), measured in an L2 norm weighted by rho_x^2 / int rho_x^2.
    """
    h = config.h_x
    eps = config.epsilon
    W = standing_profile(config).potential
    r = state.rho
    P = state.P
    r1 = np.gradient(r, h)
    r2 = np.gradient(r1, h)
    P1 = np.gradient(P, h)
    P2 = np.gradient(P1, h)
    res_r = eps**2 * (r2 + V * r1 - W.d1(r) / eps**2 - P * r1 + lam / eps)
    res_P = eps * (config.delta * eps * P2 + V * P1 - P / eps - config.beta * r1)
    w = r1**2
    w = w / np.sum(w)
    core = slice(2, -2)
    return float(np.sqrt(np.sum((w * (res_r**2 + res_P**2))[core])))


def sharp_interface_reference(config: SolverConfig, times, V_init=None, diagram=None):
    """V_0(t) from the reduced law for the run's forcing (branch evolution)."""
    from .reduced import build_diagram, evolve_branch, solve_velocity

    prof = standing_profile(config)
    if diagram is None:
        diagram = build_diagram(PhiEvaluator(prof, config.beta, config.delta))
    times = np.asarray(times, dtype=float)
    F = sample(config.forcing, times)
    if V_init is None:
        V_init = solve_velocity(diagram, float(F[0]))[-1]
    return evolve_branch(diagram, F, times, V_init)


def suggested_dt(config: SolverConfig, Pmax: float) -> float:
    """Transport bound dt <= 1/max|P|^2 for explicit centred transport with
    implicit diffusion, together with the stiff bound eps^2."""
    return min(config.epsilon**2, 1.0 / max(Pmax, 1e-12) ** 2)


__all__ = ["SolverConfig", "FieldState", "InterfaceTrack", "EnergyDiagnostics",
           "FarFieldOffsets", "RunResult", "init_standing", "step", "extract_interface",
           "extract_pulse", "energies", "far_field_offsets", "run_experiment",
           "velocity_from_positions", "sharp_interface_reference", "tw_residual"]
