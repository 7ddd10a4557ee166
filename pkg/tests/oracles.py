"""Independent reference computations used by the tests."""
import numpy as np
from scipy.integrate import quad

SQ2 = np.sqrt(2.0)


def theta0_standard(z):
    return 0.5 * (1.0 + np.tanh(np.asarray(z) / (2 * SQ2)))


def dtheta0_standard(z):
    return 1.0 / (4 * SQ2 * np.cosh(np.asarray(z) / (2 * SQ2)) ** 2)


C0_STANDARD = SQ2 / 12.0


def asymmetry_gauss(coeffs, nodes: int = 400) -> float:
    """Integral over [0,1] of (3/2) W'' sqrt(W) W' with Gauss-Legendre nodes.
    coeffs: ascending polynomial coefficients of W (smooth sqrt for the
    potentials used here, so the rule converges spectrally)."""
    P = np.polynomial.Polynomial(coeffs)
    x, w = np.polynomial.legendre.leggauss(nodes)
    r = 0.5 * (x + 1.0)
    val = 1.5 * P.deriv(2)(r) * np.sqrt(np.maximum(P(r), 0.0)) * P.deriv(1)(r)
    return float(0.5 * np.dot(w, val))


def psi_green(z_eval, V: float, beta: float, delta: float, dtheta, zmax: float = 40.0):
    """psi = -beta * int G(z - y) theta0'(y) dy for delta psi'' + V psi' - psi = beta theta0'.

    G(x) = exp(r_plus x)/(delta (r_plus - r_minus)) for x < 0 and
    exp(r_minus x)/(delta (r_plus - r_minus)) for x > 0, r_pm roots of
    delta r^2 + V r - 1 = 0.
    """
    disc = np.sqrt(V * V + 4 * delta)
    rp = (-V + disc) / (2 * delta)
    rm = (-V - disc) / (2 * delta)
    norm = delta * (rp - rm)
    out = []
    for z in np.atleast_1d(z_eval):
        left = quad(lambda y: np.exp(rm * (z - y)) * dtheta(y), -zmax, z, limit=400, epsabs=1e-14)[0]
        right = quad(lambda y: np.exp(rp * (z - y)) * dtheta(y), z, zmax, limit=400, epsabs=1e-14)[0]
        out.append(-beta * (left + right) / norm)
    return np.array(out)


def vpcf_reference_step(X: np.ndarray, dt: float) -> np.ndarray:
    """One explicit step of volume-preserving curvature flow with discrete
    geometry only (no splines): Menger curvature from consecutive triples,
    normals from centred differences, arclength weights from adjacent chords."""
    Xp, Xm = np.roll(X, -1, axis=0), np.roll(X, 1, axis=0)
    a = np.linalg.norm(X - Xm, axis=1)
    b = np.linalg.norm(Xp - X, axis=1)
    c = np.linalg.norm(Xp - Xm, axis=1)
    cross = (X[:, 0] - Xm[:, 0]) * (Xp[:, 1] - X[:, 1]) - (X[:, 1] - Xm[:, 1]) * (Xp[:, 0] - X[:, 0])
    x, y = X.T
    orient = 1.0 if 0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)) > 0 else -1.0
    kappa = orient * 2.0 * cross / (a * b * c)
    T = (Xp - Xm) / c[:, None]
    nu = orient * np.column_stack([-T[:, 1], T[:, 0]])
    w = 0.5 * (a + b)
    V = kappa - np.dot(w, kappa) / w.sum()
    return X + dt * V[:, None] * nu
