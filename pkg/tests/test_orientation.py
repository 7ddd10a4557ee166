import numpy as np
import pytest

from oracles import dtheta0_standard, psi_green
from sharplimit.orientation import (PhiEvaluator, beta_critical, phi_derivative_smalldelta,
                                    solve_psi)
from sharplimit.potential import asymmetry_measure
from sharplimit.standing_wave import compute_standing_wave


def test_beta_zero(prof_std):
    ps = solve_psi(prof_std, 1.3, 0.0)
    assert np.all(ps.values == 0.0)
    ev = PhiEvaluator(prof_std, 0.0)
    for V in (-3.0, 0.0, 2.0):
        assert ev.phi(V) == 0.0


def test_psi_negative_and_green_oracle(prof_std):
    ps = solve_psi(prof_std, 0.0, 1.0)
    inner = np.abs(prof_std.z) < 38
    assert np.all(ps.values[inner] < 0)
    zs = np.array([-5.0, -1.0, 0.0, 0.7, 3.0])
    idx = np.searchsorted(prof_std.z, zs - 1e-12)
    ref = psi_green(prof_std.z[idx], 0.0, 1.0, 1.0, dtheta0_standard)
    assert np.max(np.abs(ps.values[idx] - ref)) <= 1e-4


@pytest.mark.parametrize("V", [-2.0, 1.5])
def test_green_oracle_moving(prof_std, V):
    ps = solve_psi(prof_std, V, 2.0, 0.5)
    zs = np.array([-2.0, 0.0, 2.5])
    idx = np.searchsorted(prof_std.z, zs - 1e-12)
    ref = psi_green(prof_std.z[idx], V, 2.0, 0.5, dtheta0_standard)
    assert np.max(np.abs(ps.values[idx] - ref)) <= 1e-4 * np.max(np.abs(ref)) + 1e-7


def test_residual_and_boundary(prof_std):
    V, beta, delta = 1.7, 3.0, 1.0
    ps = solve_psi(prof_std, V, beta, delta)
    h, psi = prof_std.h, ps.values
    res = (delta * (psi[2:] - 2 * psi[1:-1] + psi[:-2]) / h**2
           + V * (psi[2:] - psi[:-2]) / (2 * h) - psi[1:-1] - beta * prof_std.dtheta[1:-1])
    assert np.max(np.abs(res)) <= 1e-8
    assert abs(psi[0]) <= 1e-10 and abs(psi[-1]) <= 1e-10


def test_linearity(prof_std):
    a = solve_psi(prof_std, 0.8, 1.0).values
    b = solve_psi(prof_std, 0.8, 3.0).values
    assert np.max(np.abs(b - 3 * a)) <= 1e-14 * max(1.0, np.max(np.abs(b)))


def test_phi_negative_at_zero(phi1, phi150):
    assert phi1.phi(0.0) < 0 and phi150.phi(0.0) < 0


def test_evenness(phi150):
    for V in (0.1, 1.0, 5.0, 12.0):
        assert abs(phi150.phi(V) - phi150.phi(-V)) <= 1e-10


def test_derivative_consistency(phi150, phi1):
    h = 1e-4
    for ev in (phi1, phi150):
        for V in np.linspace(-8, 8, 9):
            fd = (ev.phi(V + h) - ev.phi(V - h)) / (2 * h)
            assert abs(ev.phi_derivative(V) - fd) <= 1e-5 * max(1.0, ev.beta / 10)


def test_table_matches_cache(phi150):
    Vs = np.array([-2.0, 0.5, 3.0])
    p, dp = phi150.table(Vs)
    for V, a, b in zip(Vs, p, dp):
        assert abs(phi150.phi(V) - a) <= 1e-12 and abs(phi150.phi_derivative(V) - b) <= 1e-12


def test_grid_convergence(W_std):
    vals = []
    for h in (0.04, 0.02, 0.01):
        vals.append(PhiEvaluator(compute_standing_wave(W_std, 40.0, h), 1.0).phi(1.0))
    e1, e2 = abs(vals[0] - vals[2]), abs(vals[1] - vals[2])
    assert e2 <= 0.4 * e1 + 1e-12  # second-order error decay
    assert e1 <= 10 * 0.04**2


def test_energy_bound(prof_std):
    for beta, V in ((1.0, 0.0), (150.0, 2.0), (20.0, -4.0)):
        psi = solve_psi(prof_std, V, beta).values
        dpsi = np.gradient(psi, prof_std.h)
        energy = np.trapezoid(psi**2 + dpsi**2, dx=prof_std.h)
        assert energy <= beta**2 * prof_std.c0 * (1 + 1e-6)
        assert energy == pytest.approx(-beta * np.trapezoid(prof_std.dtheta * psi, dx=prof_std.h),
                                       rel=2e-3)


def test_smalldelta(prof_std, prof_asym):
    assert phi_derivative_smalldelta(prof_std, 1.0, 0.01) == pytest.approx(0.0, abs=1e-10)
    approx = phi_derivative_smalldelta(prof_asym, 1.0, 0.01)
    exact = PhiEvaluator(prof_asym, 1.0, 0.01).phi_derivative(0.0)
    assert approx > 0
    assert abs(exact - approx) <= 0.2 * abs(approx)
    assert phi_derivative_smalldelta(prof_asym, 2.0, 0.01) == pytest.approx(2 * approx)


def test_beta_critical(prof_std, prof_asym):
    with pytest.raises(ValueError, match="no traveling-wave threshold"):
        beta_critical(prof_std, 0.05)
    b = beta_critical(prof_asym, 0.05)
    a = asymmetry_measure(prof_asym.potential)
    assert np.isfinite(b) and b > 0
    assert b == pytest.approx(3 * prof_asym.c0 / (8 * np.sqrt(2) * 0.05 * a), rel=1e-12)
    assert beta_critical(prof_asym, 0.025) == pytest.approx(2 * b, rel=1e-12)


def test_bad_parameters(prof_std):
    with pytest.raises(ValueError):
        PhiEvaluator(prof_std, 1.0, 0.0)
    with pytest.raises(ValueError):
        PhiEvaluator(prof_std, -1.0)


def test_upwind_regime_stays_bounded(prof_std):
    ev = PhiEvaluator(prof_std, 1.0)
    p = ev.phi(80.0)
    assert np.isfinite(p) and abs(p) <= abs(ev.phi(0.0))


def test_thread_safe_cache(prof_std):
    from concurrent.futures import ThreadPoolExecutor
    ev = PhiEvaluator(prof_std, 5.0)
    Vs = np.linspace(-3, 3, 16)
    with ThreadPoolExecutor(4) as pool:
        vals = list(pool.map(ev.phi, Vs))
    assert np.allclose(vals, [ev.phi(V) for V in Vs], atol=1e-12)
