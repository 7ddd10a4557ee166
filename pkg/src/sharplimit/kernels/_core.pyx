# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: tridiagonal solves, the psi/Phi table, the kinetic
time loop and the 1D phase-field time loop.

Every routine here has a line-by-line twin in ``_fallback.py``; the two are
checked against each other in the test suite.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isfinite

cnp.import_array()


cdef inline double _horner(const double[::1] c, double x) noexcept nogil:
    # ascending coefficients
    cdef Py_ssize_t k = c.shape[0] - 1
    cdef double r = c[k]
    while k > 0:
        k -= 1
        r = r * x + c[k]
    return r


cdef void _factor(const double[::1] a, const double[::1] b, const double[::1] c,
                  double[::1] cp, double[::1] den, Py_ssize_t n) noexcept nogil:
    # Thomas forward sweep for the matrix only; den holds the pivots
    cdef Py_ssize_t i
    den[0] = b[0]
    cp[0] = c[0] / den[0]
    for i in range(1, n):
        den[i] = b[i] - a[i] * cp[i - 1]
        cp[i] = c[i] / den[i]


cdef void _apply(const double[::1] a, const double[::1] cp, const double[::1] den,
                 double[::1] d, Py_ssize_t n) noexcept nogil:
    # in-place solve with a factorisation from _factor
    cdef Py_ssize_t i
    d[0] = d[0] / den[0]
    for i in range(1, n):
        d[i] = (d[i] - a[i] * d[i - 1]) / den[i]
    for i in range(n - 2, -1, -1):
        d[i] = d[i] - cp[i] * d[i + 1]


def thomas(double[::1] a, double[::1] b, double[::1] c, double[::1] d):
    """Solve a tridiagonal system (a: sub, b: main, c: super diagonal).

    a[0] and c[n-1] are ignored.  No pivoting; intended for diagonally
    dominant matrices.
    """
    cdef Py_ssize_t n = b.shape[0]
    cdef double[::1] cp = np.empty(n)
    cdef double[::1] den = np.empty(n)
    x = np.array(d, dtype=np.float64, copy=True)
    cdef double[::1] xv = x
    with nogil:
        _factor(a, b, c, cp, den, n)
        _apply(a, cp, den, xv, n)
    return x


cdef void _psi_coeffs(double V, double delta, double h, double v_cap,
                      double* lo, double* di, double* up,
                      double* dm, double* d0, double* dp) noexcept nogil:
    # stencil of delta*psi'' + V*psi' - psi and of the matching first derivative
    cdef double dd = delta / (h * h)
    if fabs(V) <= v_cap and fabs(V) * h <= 2.0 * delta:
        lo[0] = dd - V / (2.0 * h)
        di[0] = -2.0 * dd - 1.0
        up[0] = dd + V / (2.0 * h)
        dm[0] = -1.0 / (2.0 * h)
        d0[0] = 0.0
        dp[0] = 1.0 / (2.0 * h)
    elif V > 0:
        lo[0] = dd
        di[0] = -2.0 * dd - 1.0 - V / h
        up[0] = dd + V / h
        dm[0] = 0.0
        d0[0] = -1.0 / h
        dp[0] = 1.0 / h
    else:
        lo[0] = dd - V / h
        di[0] = -2.0 * dd - 1.0 + V / h
        up[0] = dd
        dm[0] = -1.0 / h
        d0[0] = 1.0 / h
        dp[0] = 0.0


cdef void _psi_pair(const double[::1] dth, double h, double V, double beta,
                    double delta, double v_cap, double[::1] a, double[::1] b,
                    double[::1] c, double[::1] cp, double[::1] den,
                    double[::1] psi, double[::1] psiv) noexcept nogil:
    # psi and d(psi)/dV on the full grid, zero Dirichlet values at both ends
    cdef Py_ssize_t n = dth.shape[0]
    cdef Py_ssize_t m = n - 2
    cdef Py_ssize_t i
    cdef double lo, di, up, dm, d0, dp
    _psi_coeffs(V, delta, h, v_cap, &lo, &di, &up, &dm, &d0, &dp)
    for i in range(m):
        a[i] = lo
        b[i] = di
        c[i] = up
        psi[i + 1] = beta * dth[i + 1]
    psi[0] = 0.0
    psi[n - 1] = 0.0
    _factor(a, b, c, cp, den, m)
    _apply(a, cp, den, psi[1:n - 1], m)
    psiv[0] = 0.0
    psiv[n - 1] = 0.0
    for i in range(1, n - 1):
        psiv[i] = -(dm * psi[i - 1] + d0 * psi[i] + dp * psi[i + 1])
    _apply(a, cp, den, psiv[1:n - 1], m)


def psi_pair(double[::1] dth, double h, double V, double beta, double delta,
             double v_cap):
    """Return (psi, psi_V) for one velocity."""
    cdef Py_ssize_t n = dth.shape[0]
    cdef Py_ssize_t m = n - 2
    cdef double[::1] a = np.empty(m)
    cdef double[::1] b = np.empty(m)
    cdef double[::1] c = np.empty(m)
    cdef double[::1] cp = np.empty(m)
    cdef double[::1] den = np.empty(m)
    psi = np.empty(n)
    psiv = np.empty(n)
    cdef double[::1] pv = psi
    cdef double[::1] qv = psiv
    with nogil:
        _psi_pair(dth, h, V, beta, delta, v_cap, a, b, c, cp, den, pv, qv)
    return psi, psiv


def phi_table(double[::1] dth, double[::1] wq, double h, double[::1] Vs,
              double beta, double delta, double v_cap):
    """Phi(V) and Phi'(V) for every V in Vs.

    wq are the quadrature weights already multiplied by (theta0')^2.
    """
    cdef Py_ssize_t n = dth.shape[0]
    cdef Py_ssize_t m = n - 2
    cdef Py_ssize_t nv = Vs.shape[0]
    cdef Py_ssize_t i, j
    cdef double s0, s1
    cdef double[::1] a = np.empty(m)
    cdef double[::1] b = np.empty(m)
    cdef double[::1] c = np.empty(m)
    cdef double[::1] cp = np.empty(m)
    cdef double[::1] den = np.empty(m)
    cdef double[::1] psi = np.empty(n)
    cdef double[::1] psiv = np.empty(n)
    phi = np.empty(nv)
    dphi = np.empty(nv)
    cdef double[::1] ph = phi
    cdef double[::1] dph = dphi
    with nogil:
        for j in range(nv):
            _psi_pair(dth, h, Vs[j], beta, delta, v_cap, a, b, c, cp, den, psi, psiv)
            s0 = 0.0
            s1 = 0.0
            for i in range(n):
                s0 = s0 + wq[i] * psi[i]
                s1 = s1 + wq[i] * psiv[i]
            ph[j] = s0
            dph[j] = s1
    return phi, dphi


def kinetic_run(double[::1] f, double[::1] dth, double[::1] wq, double c0,
                double h, double eps, double beta, double dt,
                double[::1] F, double[::1] Vout, double guard):
    """Advance eps f_t = f'' + V f' - f - beta theta0' for len(F) steps.

    V at step n is (sum wq f^n - F[n]) / c0 and enters the implicit
    advection with its lagged value.  f is updated in place, Vout[n]
    receives V^n.  Returns -1 on success or the index of the first step at
    which the field left the finite range / exceeded ``guard``.
    """
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t m = n - 2
    cdef Py_ssize_t ns = F.shape[0]
    cdef Py_ssize_t i, k
    cdef double V, s, r = eps / dt, ih2 = 1.0 / (h * h), amax
    cdef Py_ssize_t status = -1
    cdef double[::1] a = np.empty(m)
    cdef double[::1] b = np.empty(m)
    cdef double[::1] c = np.empty(m)
    cdef double[::1] cp = np.empty(m)
    cdef double[::1] den = np.empty(m)
    cdef double[::1] rhs = np.empty(m)
    with nogil:
        for i in range(m):
            b[i] = r + 1.0 + 2.0 * ih2
        for k in range(ns):
            s = 0.0
            for i in range(n):
                s = s + wq[i] * f[i]
            V = (s - F[k]) / c0
            Vout[k] = V
            for i in range(m):
                a[i] = -ih2 + V / (2.0 * h)
                c[i] = -ih2 - V / (2.0 * h)
                rhs[i] = r * f[i + 1] - beta * dth[i + 1]
            _factor(a, b, c, cp, den, m)
            _apply(a, cp, den, rhs, m)
            amax = 0.0
            for i in range(m):
                f[i + 1] = rhs[i]
                if fabs(rhs[i]) > amax:
                    amax = fabs(rhs[i])
            if not isfinite(amax) or amax > guard:
                status = k
                break
    return status


def pde_run(double[::1] rho, double[::1] P, double[::1] w1, double[::1] w2,
            double h, double eps, double beta, double pdiff, double dt,
            double[::1] F, bint mass, double[::1] Fout, double guard):
    """Advance the 1D phase-field system for len(F) steps (in place).

    rho: implicit diffusion and linearised W'/eps^2, explicit transport and
    forcing, homogeneous Neumann ends.  P: implicit diffusion (coefficient
    pdiff) and damping 1/eps, explicit source -beta rho_x with the new rho,
    homogeneous Dirichlet ends.  w1, w2 are ascending coefficients of W', W''.
    With ``mass`` the forcing is replaced at each step by the value that
    keeps the integral of rho fixed; Fout[k] receives the forcing used.
    Returns -1 on success or the index of the failing step.
    """
    cdef Py_ssize_t n = rho.shape[0]
    cdef Py_ssize_t mp = n - 2
    cdef Py_ssize_t ns = F.shape[0]
    cdef Py_ssize_t i, k
    cdef double ih2 = 1.0 / (h * h), i2h = 0.5 / h, idt = 1.0 / dt
    cdef double ie2 = 1.0 / (eps * eps), Fk, s, amax, r, dr, d1, d2, inv, bi, ai, src
    cdef double length = h * (n - 1), poff = -pdiff * ih2
    cdef Py_ssize_t status = -1
    cdef double[::1] cp = np.empty(n)
    cdef double[::1] d = np.empty(n)
    cdef double[::1] pcp = np.empty(mp)
    cdef double[::1] pinv = np.empty(mp)
    cdef double[::1] pd = np.empty(mp)
    with nogil:
        # constant P matrix: store multipliers of the forward sweep
        bi = idt + 1.0 / eps + 2.0 * pdiff * ih2
        pinv[0] = 1.0 / bi
        pcp[0] = poff * pinv[0]
        for i in range(1, mp):
            pinv[i] = 1.0 / (bi - poff * pcp[i - 1])
            pcp[i] = poff * pinv[i]
        for k in range(ns):
            if mass:
                s = 0.5 * h * (_horner(w1, rho[0]) + _horner(w1, rho[n - 1])) * ie2
                for i in range(1, n - 1):
                    s = s + h * (_horner(w1, rho[i]) * ie2 + P[i] * (rho[i + 1] - rho[i - 1]) * i2h)
                Fk = eps * s / length
            else:
                Fk = F[k]
            Fout[k] = Fk
            src = Fk / eps
            # rho: fused assembly + forward sweep (one division per node)
            r = rho[0]
            d1 = _horner(w1, r)
            d2 = _horner(w2, r)
            inv = 1.0 / (idt + d2 * ie2 + 2.0 * ih2)
            cp[0] = -2.0 * ih2 * inv
            d[0] = (r * idt + (d2 * r - d1) * ie2 + src) * inv
            for i in range(1, n):
                r = rho[i]
                d1 = _horner(w1, r)
                d2 = _horner(w2, r)
                if i == n - 1:
                    dr = 0.0
                    ai = -2.0 * ih2
                else:
                    dr = (rho[i + 1] - rho[i - 1]) * i2h
                    ai = -ih2
                inv = 1.0 / (idt + d2 * ie2 + 2.0 * ih2 - ai * cp[i - 1])
                cp[i] = -ih2 * inv
                d[i] = (r * idt + (d2 * r - d1) * ie2 - P[i] * dr + src - ai * d[i - 1]) * inv
            for i in range(n - 2, -1, -1):
                d[i] = d[i] - cp[i] * d[i + 1]
            amax = 0.0
            for i in range(n):
                rho[i] = d[i]
                if fabs(d[i]) > amax:
                    amax = fabs(d[i])
            # P: forward sweep with the stored multipliers
            pd[0] = (P[1] * idt - beta * (rho[2] - rho[0]) * i2h) * pinv[0]
            for i in range(1, mp):
                pd[i] = (P[i + 1] * idt - beta * (rho[i + 2] - rho[i]) * i2h - poff * pd[i - 1]) * pinv[i]
            for i in range(mp - 2, -1, -1):
                pd[i] = pd[i] - pcp[i] * pd[i + 1]
            for i in range(mp):
                P[i + 1] = pd[i]
                if fabs(pd[i]) > amax:
                    amax = fabs(pd[i])
            if not isfinite(amax) or amax > guard:
                status = k
                break
    return status
