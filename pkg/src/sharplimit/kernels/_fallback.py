"""Pure numpy/scipy versions of the compiled kernels (same signatures)."""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded


def _banded(a, b, c):
    n = b.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = c[:-1]
    ab[1] = b
    ab[2, :-1] = a[1:]
    return ab


def thomas(a, b, c, d):
    """Solve a tridiagonal system (a: sub, b: main, c: super diagonal)."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    c = np.asarray(c, float)
    return solve_banded((1, 1), _banded(a, b, c), np.asarray(d, float))


def _psi_coeffs(V, delta, h, v_cap):
    dd = delta / h**2
    if abs(V) <= v_cap and abs(V) * h <= 2.0 * delta:
        return (dd - V / (2 * h), -2 * dd - 1.0, dd + V / (2 * h),
                -1.0 / (2 * h), 0.0, 1.0 / (2 * h))
    if V > 0:
        return dd, -2 * dd - 1.0 - V / h, dd + V / h, 0.0, -1.0 / h, 1.0 / h
    return dd - V / h, -2 * dd - 1.0 + V / h, dd, -1.0 / h, 1.0 / h, 0.0


def psi_pair(dth, h, V, beta, delta, v_cap):
    """Return (psi, psi_V) for one velocity."""
    dth = np.asarray(dth, float)
    n = dth.shape[0]
    m = n - 2
    lo, di, up, dm, d0, dp = _psi_coeffs(V, delta, h, v_cap)
    ab = np.zeros((3, m))
    ab[0, 1:] = up
    ab[1] = di
    ab[2, :-1] = lo
    psi = np.zeros(n)
    psi[1:-1] = solve_banded((1, 1), ab, beta * dth[1:-1])
    rhs = -(dm * psi[:-2] + d0 * psi[1:-1] + dp * psi[2:])
    psiv = np.zeros(n)
    psiv[1:-1] = solve_banded((1, 1), ab, rhs)
    return psi, psiv


def phi_table(dth, wq, h, Vs, beta, delta, v_cap):
    """Phi(V) and Phi'(V) for every V in Vs (wq already includes (theta0')^2)."""
    Vs = np.asarray(Vs, float)
    phi = np.empty(Vs.shape[0])
    dphi = np.empty(Vs.shape[0])
    for j, V in enumerate(Vs):
        psi, psiv = psi_pair(dth, h, V, beta, delta, v_cap)
        phi[j] = wq @ psi
        dphi[j] = wq @ psiv
    return phi, dphi


def kinetic_run(f, dth, wq, c0, h, eps, beta, dt, F, Vout, guard):
    """Same contract as the compiled kinetic_run."""
    n = f.shape[0]
    m = n - 2
    r = eps / dt
    ih2 = 1.0 / h**2
    ab = np.zeros((3, m))
    ab[1] = r + 1.0 + 2.0 * ih2
    src = beta * dth[1:-1]
    for k in range(F.shape[0]):
        V = (wq @ f - F[k]) / c0
        Vout[k] = V
        ab[0, 1:] = -ih2 - V / (2 * h)
        ab[2, :-1] = -ih2 + V / (2 * h)
        f[1:-1] = solve_banded((1, 1), ab, r * f[1:-1] - src,
                               overwrite_b=True, check_finite=False)
        amax = np.max(np.abs(f))
        if not np.isfinite(amax) or amax > guard:
            return k
    return -1


def pde_run(rho, P, w1, w2, h, eps, beta, pdiff, dt, F, mass, Fout, guard):
    """Same contract as the compiled pde_run."""
    n = rho.shape[0]
    mp = n - 2
    ih2 = 1.0 / h**2
    idt = 1.0 / dt
    ie2 = 1.0 / eps**2
    length = h * (n - 1)
    w1 = np.polynomial.Polynomial(w1)
    w2 = np.polynomial.Polynomial(w2)
    ab = np.zeros((3, n))
    ab[0, 1:] = -ih2
    ab[0, 1] = -2.0 * ih2
    ab[2, :-1] = -ih2
    ab[2, -2] = -2.0 * ih2
    pab = np.zeros((3, mp))
    pab[0, 1:] = -pdiff * ih2
    pab[1] = idt + 1.0 / eps + 2.0 * pdiff * ih2
    pab[2, :-1] = -pdiff * ih2
    wq = np.full(n, h)
    wq[0] = wq[-1] = 0.5 * h
    dr = np.zeros(n)
    for k in range(F.shape[0]):
        dr[1:-1] = (rho[2:] - rho[:-2]) * (0.5 / h)
        d1 = w1(rho)
        if mass:
            Fk = eps * (wq @ (d1 * ie2 + P * dr)) / length
        else:
            Fk = F[k]
        Fout[k] = Fk
        d2 = w2(rho)
        ab[1] = idt + d2 * ie2 + 2.0 * ih2
        rhs = rho * idt - d1 * ie2 + d2 * rho * ie2 - P * dr + Fk / eps
        rho[:] = solve_banded((1, 1), ab, rhs, check_finite=False)
        prhs = P[1:-1] * idt - beta * (rho[2:] - rho[:-2]) * (0.5 / h)
        P[1:-1] = solve_banded((1, 1), pab, prhs, check_finite=False)
        amax = max(np.max(np.abs(rho)), np.max(np.abs(P)))
        if not np.isfinite(amax) or amax > guard:
            return k
    return -1
