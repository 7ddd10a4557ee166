"""Allen-Cahn standing wave theta0 connecting the wells 0 and 1.

theta0'' = W'(theta0), theta0(0) = 1/2, theta0' = sqrt(2 W(theta0)) > 0.
The profile is obtained from the first integral written in the variable
s = -log(distance to the approached well), which turns the endpoint
square-root singularity into a regular ODE ds/d|z| = sqrt(2 q(e^{-s})),
with W(well -/+ u) = u^2 q(u).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import eigh

from .potential import DoubleWellPotential

TAIL_TOL = 1e-10
PATCH_LEVEL = 1e-6


class TruncationError(ValueError):
    """The truncation half-width is too small for the tail tolerance."""


@dataclass(frozen=True, eq=False)
class StandingWaveProfile:
    z: np.ndarray
    h: float
    L: float
    theta: np.ndarray
    dtheta: np.ndarray
    c0: float
    kappa_minus: float
    kappa_plus: float
    potential: DoubleWellPotential

    @property
    def weight(self) -> np.ndarray:
        """(theta0')^2 on the grid."""
        return self.dtheta**2

    @property
    def quad_weights(self) -> np.ndarray:
        """Trapezoidal weights of the uniform grid."""
        w = np.full(self.z.shape, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def _spline(self):
        sp = getattr(self, "_sp", None)
        if sp is None:
            d2 = self.potential.d1(self.theta)
            sp = (CubicHermiteSpline(self.z, self.theta, self.dtheta),
                  CubicHermiteSpline(self.z, self.dtheta, d2))
            object.__setattr__(self, "_sp", sp)
        return sp

    def evaluate(self, zq, derivative: bool = False) -> np.ndarray:
        """theta0 (or theta0') at arbitrary points, exponential tails outside [-L, L]."""
        zq = np.asarray(zq, dtype=float)
        sp = self._spline()[1 if derivative else 0]
        out = np.empty_like(zq)
        inside = np.abs(zq) <= self.L
        out[inside] = sp(zq[inside])
        am = np.sqrt(self.potential.d2(0.0))
        ap = np.sqrt(self.potential.d2(1.0))
        left = zq < -self.L
        right = zq > self.L
        if derivative:
            out[left] = self.dtheta[0] * np.exp(am * (zq[left] + self.L))
            out[right] = self.dtheta[-1] * np.exp(-ap * (zq[right] - self.L))
        else:
            out[left] = self.theta[0] * np.exp(am * (zq[left] + self.L))
            out[right] = 1.0 - (1.0 - self.theta[-1]) * np.exp(-ap * (zq[right] - self.L))
        return out


def _half_profile(W: DoubleWellPotential, well: float, zeta: np.ndarray, rtol: float):
    """Distance u(zeta) = |theta0 - well| for zeta = |z| >= 0 on one side."""
    wp = W.shifted(well)  # W(well -/+ u) as a polynomial in u
    q = Polynomial(wp.coef[2:]) if len(wp.coef) > 2 else Polynomial([0.0])
    rate = np.sqrt(W.d2(well))

    def rhs(_, s):
        u = np.exp(-s[0])
        return [np.sqrt(max(2.0 * q(u), 0.0))]

    def hit(_, s):
        return s[0] + np.log(PATCH_LEVEL)

    hit.terminal = True
    hit.direction = 1
    sol = solve_ivp(rhs, (0.0, zeta[-1]), [np.log(2.0)], method="DOP853",
                    rtol=rtol, atol=rtol, dense_output=True, events=hit)
    s = np.empty_like(zeta)
    if sol.t_events[0].size:
        z1 = sol.t_events[0][0]
        s1 = -np.log(PATCH_LEVEL)
    else:
        z1 = zeta[-1]
        s1 = sol.y[0, -1]
    core = zeta <= z1
    s[core] = sol.sol(zeta[core])[0]
    # far tail: pure exponential with the linearised rate at the well
    s[~core] = s1 + rate * (zeta[~core] - z1)
    u = np.exp(-s)
    du = u * np.sqrt(np.maximum(2.0 * q(u), 0.0))
    required = z1 + (np.log(1.0 / TAIL_TOL) - s1) / rate
    return u, du, required


def compute_standing_wave(W: DoubleWellPotential, L: float = 40.0, h: float = 0.01,
                          rtol: float = 1e-13) -> StandingWaveProfile:
    """Standing wave on the symmetric grid z_i = i h, |z_i| <= L."""
    if L <= 0 or h <= 0:
        raise ValueError("L and h must be positive")
    m = int(round(L / h))
    z = np.arange(-m, m + 1) * h
    zeta = z[m:]
    ur, dur, req_r = _half_profile(W, 1.0, zeta, rtol)
    ul, dul, req_l = _half_profile(W, 0.0, zeta, rtol)
    need = max(req_r, req_l)
    if ul[-1] > TAIL_TOL or ur[-1] > TAIL_TOL:
        raise TruncationError(f"L={L} is too small for tail tolerance {TAIL_TOL:g}; "
                              f"use L >= {np.ceil(need * 1.05):.0f}")
    theta = np.empty(z.shape)
    dtheta = np.empty(z.shape)
    theta[m:] = 1.0 - ur
    dtheta[m:] = dur
    theta[:m + 1] = ul[::-1]
    dtheta[:m + 1] = dul[::-1]
    w = np.full(z.shape, h)
    w[0] = w[-1] = 0.5 * h
    c0 = float(w @ dtheta**2)
    return StandingWaveProfile(
        z=z, h=float(h), L=float(m * h), theta=theta, dtheta=dtheta, c0=c0,
        kappa_minus=float(2.0 * np.sqrt(W.d2(0.0))),
        kappa_plus=float(2.0 * np.sqrt(W.d2(1.0))), potential=W)


def _wmean(profile, v):
    wq = profile.quad_weights * profile.weight
    return wq, (wq @ v) / np.sum(wq)


def check_poincare(profile: StandingWaveProfile, v) -> tuple[float, float]:
    """Weighted Poincare quantities for a grid function v.

    Returns (lhs, ratio) with lhs = int (theta0')^2 (v - <v>)^2 and
    ratio = lhs / int (theta0')^2 (v')^2, <v> the (theta0')^2-weighted mean.
    A constant v gives (0, 0).
    """
    v = np.asarray(v, dtype=float)
    wq, mean = _wmean(profile, v)
    lhs = float(wq @ (v - mean) ** 2)
    dv = np.gradient(v, profile.h)
    den = float(wq @ dv**2)
    if den <= 1e-300:
        return 0.0, 0.0
    return lhs, lhs / den


def check_friedrich(profile: StandingWaveProfile, u) -> tuple[float, float]:
    """Weighted Friedrich quantities for u with u(0) = 0 (u is shifted so)."""
    u = np.asarray(u, dtype=float)
    m = profile.z.shape[0] // 2
    u = u - u[m]
    wq = profile.quad_weights * profile.weight
    lhs = float(wq @ u**2)
    du = np.gradient(u, profile.h)
    den = float(wq @ du**2)
    if den <= 1e-300:
        return 0.0, 0.0
    return lhs, lhs / den


def _weighted_eigs(profile: StandingWaveProfile, zmax: float, step: int, dirichlet0: bool):
    # -(w u')' = mu w u discretised on a sub-grid, natural (Neumann) outer ends
    sel = np.abs(profile.z) <= zmax
    z = profile.z[sel][::step]
    h = z[1] - z[0]
    wfun = profile.evaluate(z, derivative=True) ** 2
    wmid = profile.evaluate(0.5 * (z[1:] + z[:-1]), derivative=True) ** 2
    n = z.size
    K = np.zeros((n, n))
    i = np.arange(n - 1)
    K[i, i] += wmid / h**2
    K[i + 1, i + 1] += wmid / h**2
    K[i, i + 1] -= wmid / h**2
    K[i + 1, i] -= wmid / h**2
    M = np.diag(wfun)
    if dirichlet0:
        keep = np.abs(z) > h / 2
        K = K[np.ix_(keep, keep)]
        M = M[np.ix_(keep, keep)]
    return eigh(K, M, eigvals_only=True, subset_by_index=[0, 2])


def poincare_constant(profile: StandingWaveProfile, zmax: float = 20.0, step: int = 10) -> float:
    """Sharp weighted Poincare constant 1/mu_1 from the weighted eigenproblem."""
    mu = _weighted_eigs(profile, zmax, step, dirichlet0=False)
    return float(1.0 / mu[1])


def friedrich_constant(profile: StandingWaveProfile, zmax: float = 20.0, step: int = 10) -> float:
    """Sharp weighted Friedrich constant 1/mu_0 for functions vanishing at z = 0."""
    mu = _weighted_eigs(profile, zmax, step, dirichlet0=True)
    return float(1.0 / mu[0])
