"""Admissible double-well potentials W with wells at 0 and 1."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad


class AdmissibilityError(ValueError):
    """Raised when a candidate potential is not a double well at {0, 1}."""


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature misses its tolerance."""


@dataclass(frozen=True)
class DoubleWellPotential:
    """Polynomial double-well potential.

    ``poly`` holds W as a numpy Polynomial; W', W'', W''' are its exact
    derivatives.  ``symmetric_flag`` records W(rho) = W(1 - rho).
    """

    poly: Polynomial
    name: str = "custom"
    symmetric_flag: bool = False
    scale: float = 1.0
    wells: tuple = (0.0, 1.0)
    _d1: Polynomial = field(init=False, repr=False, compare=False)
    _d2: Polynomial = field(init=False, repr=False, compare=False)
    _d3: Polynomial = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_d1", self.poly.deriv(1))
        object.__setattr__(self, "_d2", self.poly.deriv(2))
        object.__setattr__(self, "_d3", self.poly.deriv(3))
        check_admissible(self)

    def eval(self, rho):
        return self.poly(rho)

    __call__ = eval

    def d1(self, rho):
        return self._d1(rho)

    def d2(self, rho):
        return self._d2(rho)

    def d3(self, rho):
        return self._d3(rho)

    def coefficients(self, order: int = 0) -> np.ndarray:
        """Ascending coefficients of the ``order``-th derivative of W."""
        p = self.poly if order == 0 else self.poly.deriv(order)
        return np.ascontiguousarray(p.coef, dtype=float)

    def shifted(self, well: float) -> Polynomial:
        """W(well + s*u) as a polynomial in u, with s = -1 for the well at 1.

        Used by the standing-wave integrator to evaluate W accurately close to
        a well, where 1 - rho cannot be represented.
        """
        if well == 0.0:
            return self.poly
        return self.poly(Polynomial([1.0, -1.0]))


def check_admissible(W: DoubleWellPotential, spacing: float = 1e-3) -> None:
    """Sample W on [-0.5, 1.5] and raise AdmissibilityError on violation."""
    for r in W.wells:
        if abs(W.eval(r)) > 1e-12 or abs(W.d1(r)) > 1e-12:
            raise AdmissibilityError(f"W or W' does not vanish at the well {r}")
        if not W.d2(r) > 0:
            raise AdmissibilityError(f"W''({r}) must be positive")
    rho = np.arange(-0.5, 1.5 + spacing / 2, spacing)
    rho = rho[(np.abs(rho) > spacing / 2) & (np.abs(rho - 1.0) > spacing / 2)]
    if np.any(W.eval(rho) <= 0):
        bad = rho[W.eval(rho) <= 0][0]
        raise AdmissibilityError(f"W is not positive at rho={bad:.4f}")


def make_standard(scale: float = 1.0) -> DoubleWellPotential:
    """W = scale * rho^2 (rho - 1)^2 / 4."""
    p = Polynomial([0.0, 0.0, 1.0, -2.0, 1.0]) * (0.25 * scale)
    return DoubleWellPotential(p, name="standard", symmetric_flag=True, scale=scale)


def make_asymmetric(scale: float = 1.0) -> DoubleWellPotential:
    """W = scale * rho^2 (1 + rho^2)(rho - 1)^2 / 4."""
    p = Polynomial([0.0, 0.0, 1.0, -2.0, 2.0, -2.0, 1.0]) * (0.25 * scale)
    return DoubleWellPotential(p, name="asymmetric", symmetric_flag=False, scale=scale)


def make_potential(name: str, scale: float = 1.0) -> DoubleWellPotential:
    if name == "standard":
        return make_standard(scale)
    if name == "asymmetric":
        return make_asymmetric(scale)
    raise ValueError(f"unknown potential {name!r} (expected 'standard' or 'asymmetric')")


def asymmetry_measure(W: DoubleWellPotential, tol: float = 1e-12) -> float:
    """Integral of W'' d(W^{3/2}) over [0, 1].

    Evaluated as the Lebesgue integral of (3/2) W'' W^{1/2} W' by adaptive
    Gauss-Kronrod quadrature.
    """

    def integrand(r):
        return 1.5 * W.d2(r) * np.sqrt(max(W.eval(r), 0.0)) * W.d1(r)

    val, err, info = quad(integrand, 0.0, 1.0, epsabs=tol, epsrel=tol,
                          limit=200, full_output=True)[:3]
    if err > max(1e-10, 1e3 * tol * max(1.0, abs(val))):
        raise QuadratureError(f"asymmetry quadrature did not converge (error {err:.2e})")
    return float(val)
