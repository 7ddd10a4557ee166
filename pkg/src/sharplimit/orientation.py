"""Orientation response: psi(z, V), Phi_beta(V) and Phi_beta'(V).

psi solves delta psi'' + V psi' - psi = beta theta0' on the standing-wave grid
with zero values at +-L; Phi_beta(V) = int psi (theta0')^2 dz.  Phi' comes
from the differentiated linear problem, which is solved with the same
factorisation and is exact for the discrete scheme.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from . import kernels
from .potential import asymmetry_measure
from .standing_wave import StandingWaveProfile

V_CAP = 50.0


@dataclass(frozen=True, eq=False)
class PsiProfile:
    V: float
    beta: float
    delta: float
    z: np.ndarray
    values: np.ndarray
    dV: np.ndarray  # derivative of psi with respect to V


class PhiEvaluator:
    """Phi_beta and its derivative for one (profile, beta, delta).

    Values are memoised per V; the cache is protected by a lock so an
    evaluator can be shared between threads.
    """

    def __init__(self, profile: StandingWaveProfile, beta: float = 1.0,
                 delta: float = 1.0, v_cap: float = V_CAP):
        if delta <= 0:
            raise ValueError("delta must be positive")
        if beta < 0:
            raise ValueError("beta must be nonnegative")
        self.profile = profile
        self.beta = float(beta)
        self.delta = float(delta)
        self.v_cap = float(v_cap)
        self._dth = np.ascontiguousarray(profile.dtheta)
        self._wq = np.ascontiguousarray(profile.quad_weights * profile.weight)
        self._cache: dict[float, tuple[float, float]] = {}
        self._lock = threading.Lock()

    @property
    def c0(self) -> float:
        return self.profile.c0

    def with_beta(self, beta: float) -> "PhiEvaluator":
        return PhiEvaluator(self.profile, beta, self.delta, self.v_cap)

    def solve_psi(self, V: float) -> PsiProfile:
        psi, psiv = kernels.psi_pair(self._dth, self.profile.h, float(V), self.beta,
                                     self.delta, self.v_cap)
        return PsiProfile(float(V), self.beta, self.delta, self.profile.z, psi, psiv)

    def _pair(self, V: float) -> tuple[float, float]:
        V = float(V)
        with self._lock:
            hit = self._cache.get(V)
        if hit is not None:
            return hit
        ph, dph = kernels.phi_table(self._dth, self._wq, self.profile.h,
                                    np.array([V]), self.beta, self.delta, self.v_cap)
        val = (float(ph[0]), float(dph[0]))
        with self._lock:
            self._cache[V] = val
        return val

    def phi(self, V: float) -> float:
        return self._pair(V)[0]

    def phi_derivative(self, V: float) -> float:
        return self._pair(V)[1]

    def phi_and_derivative(self, V: float) -> tuple[float, float]:
        return self._pair(V)

    def table(self, Vs) -> tuple[np.ndarray, np.ndarray]:
        """Phi and Phi' on an array of velocities (not cached)."""
        Vs = np.ascontiguousarray(Vs, dtype=float)
        return kernels.phi_table(self._dth, self._wq, self.profile.h, Vs,
                                 self.beta, self.delta, self.v_cap)


def solve_psi(profile: StandingWaveProfile, V: float, beta: float,
              delta: float = 1.0, v_cap: float = V_CAP) -> PsiProfile:
    return PhiEvaluator(profile, beta, delta, v_cap).solve_psi(V)


def phi_derivative_smalldelta(profile: StandingWaveProfile, beta: float, delta: float) -> float:
    """Leading-order small-delta value of Phi_beta'(0)."""
    return 8.0 * np.sqrt(2.0) / 3.0 * delta * beta * asymmetry_measure(profile.potential)


def beta_critical(profile: StandingWaveProfile, delta: float) -> float:
    """Leading-order coupling above which nonzero traveling waves exist."""
    a = asymmetry_measure(profile.potential)
    if not a > 1e-12:
        raise ValueError("no traveling-wave threshold for this potential")
    return 3.0 * profile.c0 / (8.0 * np.sqrt(2.0) * delta * a)
