"""Point spectrum of the linearised nonlocal interface operator.

For the standard potential, theta0' = sech^2(z/(2 sqrt 2)) / (4 sqrt 2) has
explicit Fourier transforms (convention f^(k) = int f e^{-iky} dy):

    (theta0')^(k)      = sqrt(2) pi k csch(sqrt(2) pi k),
    ((theta0')^2)^(k)  = (pi/6) k (2k^2 + 1) csch(sqrt(2) pi k).

With D(k) = k^2 - iVk + 1 (the symbol of A(V) = -d^2 - V d + 1) the
eigenvalue condition zeta(lambda) = 1 reads

    zeta(lambda) = (N / c0) int  i k chi(k) / (D(k) (D(k) - lambda)) dk,
    chi(k) = -(beta pi sqrt(2)/12) k^2 (2k^2 + 1) csch^2(sqrt(2) pi k),

where zeta(lambda) = ((A - lambda)^{-1} psi', (theta0')^2)/c0 and N is a
normalisation constant fixed once from the identity zeta(0) = Phi'(V)/c0.
The factor k in front of chi comes from the derivative psi'.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .orientation import PhiEvaluator

SQ2PI = np.sqrt(2.0) * np.pi


class EssentialSpectrumError(ValueError):
    pass


def _k_csch(k, a=SQ2PI):
    """k csch(a k), with the removable value 1/a at k = 0 (expm1-based)."""
    k = np.asarray(k, dtype=float)
    x = a * np.abs(k)
    out = np.empty_like(x)
    small = x < 1e-8
    out[small] = 1.0 / a
    xs = x[~small]
    # csch(x) = -2 e^{-x} / expm1(-2x)
    out[~small] = np.abs(k[~small]) * (-2.0 * np.exp(-xs) / np.expm1(-2.0 * xs))
    return out


def chi(k, beta: float = 1.0):
    """chi(k) = -(beta pi sqrt2 / 12) k^2 (2k^2+1) csch^2(sqrt2 pi k) (even in k)."""
    k = np.asarray(k, dtype=float)
    return -(beta * np.pi * np.sqrt(2.0) / 12.0) * (2 * k**2 + 1) * _k_csch(k) ** 2


@lru_cache(maxsize=8)
def _nodes(K: float, panels: int, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-K, K, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    kk = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    ww = (0.5 * (b - a) * w).ravel()
    return kk, ww


def essential_distance(V: float, lam: complex) -> float:
    """Distance from lam to the curve {k^2 + 1 - iVk : k real}."""
    lr, li = lam.real, lam.imag
    cands = np.roots([4.0, 0.0, 4.0 * (1.0 - lr) + 2.0 * V**2, 2.0 * V * li])
    ks = cands[np.abs(cands.imag) < 1e-9].real
    ks = np.append(ks, 0.0)
    return float(np.min(np.abs(ks**2 + 1.0 - 1j * V * ks - lam)))


STANDARD_C0 = np.sqrt(2.0) / 12.0


@dataclass(frozen=True)
class SpectralProbe:
    V: float
    beta: float
    K: float = 6.0
    panels: int = 48
    order: int = 16
    normalization: float | None = None  # None: use reference_normalization()
    c0: float = STANDARD_C0

    def with_nodes(self, K=None, panels=None, order=None) -> "SpectralProbe":
        return SpectralProbe(self.V, self.beta, K or self.K, panels or self.panels,
                             order or self.order, self.normalization, self.c0)


def _raw(V, beta, lam, K, panels, order, c0):
    k, w = _nodes(K, panels, order)
    D = k * k - 1j * V * k + 1.0
    integrand = 1j * k * chi(k, beta) / (D * (D - lam))
    return complex(np.dot(w, integrand)) / c0


@lru_cache(maxsize=4)
def reference_normalization(V_ref: float = 1.0, beta_ref: float = 1.0, L: float = 40.0,
                            h: float = 0.01) -> float:
    """N such that zeta(0) = Phi'(V_ref)/c0 at (V_ref, beta_ref)."""
    from .potential import make_standard
    from .standing_wave import compute_standing_wave

    prof = compute_standing_wave(make_standard(), L, h)
    dphi = PhiEvaluator(prof, beta_ref).phi_derivative(V_ref)
    raw = _raw(V_ref, beta_ref, 0.0, 6.0, 48, 16, prof.c0).real
    return float(dphi / (prof.c0 * raw))


def eigencondition(probe: SpectralProbe, lam: complex, check: bool = True) -> complex:
    """zeta(lambda) from the Fourier integral (standard potential)."""
    lam = complex(lam)
    if check and essential_distance(probe.V, lam) < 1e-8:
        raise EssentialSpectrumError(f"lambda={lam} is near the essential spectrum")
    N = probe.normalization if probe.normalization is not None else reference_normalization()
    return N * _raw(probe.V, probe.beta, lam, probe.K, probe.panels, probe.order, probe.c0)


def direct_resolvent(phi: PhiEvaluator, V: float, lam: complex) -> complex:
    """((A - lambda)^{-1} psi', (theta0')^2)/c0 computed on the grid."""
    prof = phi.profile
    h = prof.h
    psi = phi.solve_psi(V).values
    n = psi.size - 2
    lam = complex(lam)
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = -phi.delta / h**2 - V / (2 * h)
    ab[1] = 2 * phi.delta / h**2 + 1.0 - lam
    ab[2, :-1] = -phi.delta / h**2 + V / (2 * h)
    rhs = (psi[2:] - psi[:-2]) / (2 * h)
    u = np.zeros(psi.size, dtype=complex)
    u[1:-1] = solve_banded((1, 1), ab, rhs.astype(complex))
    wq = prof.quad_weights * prof.weight
    return complex(wq @ u) / prof.c0


def find_nonpositive_real_eigenvalue(probe: SpectralProbe, lam_max: float = 50.0,
                                     n: int = 401):
    """Real root lambda <= 0 of zeta(lambda) = 1 closest to 0, or None.

    Scans [-lam_max, 0]; if zeta is still above 1 at -lam_max the window is
    widened (zeta -> 0 as lambda -> -infinity guarantees a crossing).
    """
    def f(l):
        return eigencondition(probe, l, check=False).real - 1.0

    while True:
        lams = -lam_max * (1.0 - np.linspace(0.0, 1.0, n)) ** 2  # denser near 0
        vals = np.array([f(l) for l in lams])
        if vals[0] <= 0 or lam_max > 1e7:
            break
        lam_max *= 10.0
    if vals[-1] == 0.0:
        return 0.0
    idx = np.nonzero(vals[:-1] * vals[1:] < 0)[0]
    if idx.size == 0:
        return None
    i = idx[-1]
    return float(brentq(f, lams[i], lams[i + 1], xtol=1e-9))


@dataclass(frozen=True)
class StabilityResult:
    stable: bool
    eigenvalue: float | None
    zeta0: float
    im_sign_definite: bool | None


def im_part_sign_definite(probe: SpectralProbe, lam_r_max: float = 20.0, lam_i_max: float = 20.0,
                          n: int = 21) -> bool:
    """Whether Im zeta(lambda) keeps one sign for Re lambda <= 0 < Im lambda
    on a grid; then no complex root of zeta = 1 lies there."""
    lr = np.linspace(-lam_r_max, 0.0, n)
    li = np.linspace(lam_i_max / n, lam_i_max, n)
    signs = set()
    for a in lr:
        for b in li:
            s = np.sign(eigencondition(probe, complex(a, b), check=False).imag)
            if s != 0:
                signs.add(s)
    return len(signs) <= 1


def classify_stability(probe: SpectralProbe) -> StabilityResult:
    """Unstable iff zeta(lambda) = 1 has a root lambda <= 0 or zeta(0) >= 1."""
    if probe.beta == 0.0:
        return StabilityResult(True, None, 0.0, True)
    z0 = eigencondition(probe, 0.0).real
    lam = find_nonpositive_real_eigenvalue(probe)
    im_ok = None
    if 0.0 < probe.V < np.sqrt(2.0):
        im_ok = im_part_sign_definite(probe)
    stable = lam is None and z0 < 1.0
    return StabilityResult(bool(stable), lam, float(z0), im_ok)


def stability_boundaries(beta: float, V_lo: float, V_hi: float, n: int = 121,
                         tol: float = 1e-6) -> list[float]:
    """Velocities in [V_lo, V_hi] where classify_stability changes (bisection)."""
    Vs = np.linspace(V_lo, V_hi, n)
    st = [classify_stability(SpectralProbe(V, beta)).stable for V in Vs]
    out = []
    for i in range(n - 1):
        if st[i] != st[i + 1]:
            a, b = Vs[i], Vs[i + 1]
            sa = st[i]
            while b - a > tol:
                m = 0.5 * (a + b)
                if classify_stability(SpectralProbe(m, beta)).stable == sa:
                    a = m
                else:
                    b = m
            out.append(0.5 * (a + b))
    return out
