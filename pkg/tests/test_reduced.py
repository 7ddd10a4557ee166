import numpy as np
import pytest

from sharplimit.forcing import constant, hysteresis_ramps, sinusoid
from sharplimit.orientation import PhiEvaluator
from sharplimit.reduced import (BranchError, DiagramError, build_diagram, detect_jumps,
                                evolve_branch, hysteresis_loop, loop_area, simulate_kinetic,
                                solve_velocity, tw_threshold, tw_velocities)


def _residual_ok(diag, F, V):
    return abs(diag.g(V) + F) <= 1e-9 * (1 + abs(F))


def test_roots_beta150(diag150):
    r1 = solve_velocity(diag150, -1.5)
    r3 = solve_velocity(diag150, -2.0)
    assert len(r1) == 1 and len(r3) == 3
    for F, rs in ((-1.5, r1), (-2.0, r3)):
        assert all(_residual_ok(diag150, F, V) for V in rs)
        assert rs == sorted(rs)


def test_folds_beta150(diag150):
    assert len(diag150.extrema) == 2
    folds = sorted(-F for F in diag150.fold_forcings)
    assert folds[0] == pytest.approx(1.762, abs=0.02)
    assert folds[1] == pytest.approx(2.264, abs=0.02)
    for V, _ in diag150.extrema:
        assert abs(diag150.phi.phi_derivative(V) - diag150.c0) <= 1e-6
    assert len(diag150.forbidden_intervals) == 1
    a, b = diag150.forbidden_intervals[0]
    assert diag150.stable_index(0.5 * (a + b)) is None
    assert diag150.branch_name(diag150.stable_index(a - 1)) == "left"
    assert diag150.branch_name(diag150.stable_index(b + 1)) == "right"


def test_stable_set_matches_derivative(diag150):
    for V, dg in zip(diag150.v_grid[::20], diag150.dg_values[::20]):
        inside = diag150.stable_index(V) is not None
        if abs(dg) > 1e-6:
            assert inside == (dg > 0)


def test_root_count_odd(diag150, rng):
    folds = diag150.fold_forcings
    for F in rng.uniform(-3.0, -1.0, 40):
        if min(abs(F - f) for f in folds) < 1e-6:
            continue
        roots = solve_velocity(diag150, F)
        assert len(roots) % 2 == 1
        assert all(_residual_ok(diag150, F, V) for V in roots)


def test_beta_zero(prof_std):
    d = build_diagram(PhiEvaluator(prof_std, 0.0))
    assert d.extrema == [] and d.stable_set == [(-np.inf, np.inf)]
    assert solve_velocity(d, -d.c0) == [pytest.approx(1.0, abs=1e-10)]
    assert d.branch_name(0) == "left"


@pytest.mark.parametrize("beta", [1.0, 5.0])
def test_subcritical_no_extrema(prof_std, beta):
    assert build_diagram(PhiEvaluator(prof_std, beta)).extrema == []


def test_small_beta_bound(prof_std):
    beta0 = 2.0 / max(np.max(prof_std.dtheta**2), np.sqrt(prof_std.c0))
    assert build_diagram(PhiEvaluator(prof_std, 0.99 * beta0)).extrema == []


def test_scan_too_small(phi150):
    with pytest.raises(DiagramError):
        build_diagram(phi150, V_scan=3.0, n=301)


def test_evolve_single_jump(diag150):
    F_lo, F_hi = diag150.F_min, diag150.F_max
    t = np.linspace(0, 1, 2001)
    Fs = (F_lo - 0.2) + (F_hi - F_lo + 0.4) * t
    V0 = solve_velocity(diag150, Fs[0])[-1]
    hist = evolve_branch(diag150, Fs, t, V0)
    assert len(hist.jump_events) == 1
    step = Fs[1] - Fs[0]
    _, Fj, Vb, Va = hist.jump_events[0]
    assert F_hi <= Fj <= F_hi + step + 1e-12
    assert Va < Vb
    # piecewise continuity: only the recorded jump is a large step
    dv = np.abs(np.diff(hist.V))
    big = np.nonzero(dv > 1.0)[0]
    assert list(big + 1) == list(np.nonzero(hist.jump_flag)[0])
    for F, V in zip(hist.F, hist.V):
        assert _residual_ok(diag150, F, V)


def test_evolve_small_beta_no_jump(phi1):
    d = build_diagram(phi1)
    t = np.linspace(0, 1, 2001)
    F = sinusoid()
    V0 = solve_velocity(d, 0.0)[0]
    hist = evolve_branch(d, F, t, V0)
    assert hist.jump_events == [] and np.max(np.abs(np.diff(hist.V))) < 0.05


def test_evolve_errors(diag150):
    t = np.linspace(0, 1, 5)
    with pytest.raises(BranchError):
        evolve_branch(diag150, constant(-2.0), t, 0.123)
    mid = solve_velocity(diag150, -2.0)[1]
    with pytest.raises(BranchError):
        evolve_branch(diag150, constant(-2.0), t, mid)


def test_hysteresis(diag150):
    res = hysteresis_loop(diag150)
    assert res.area > 0
    F_lo, F_hi = diag150.F_min, diag150.F_max
    for h in (res.down, res.up):
        outside = (h.F < F_lo - 1e-3) | (h.F > F_hi + 1e-3)
        for F, V in zip(h.F[outside], h.V[outside]):
            assert V == pytest.approx(solve_velocity(diag150, F)[0], abs=1e-8)
    assert len(res.jump_forcings["up"]) == 1
    assert res.jump_forcings["up"][0] == pytest.approx(F_hi, abs=1e-3)


def test_hysteresis_beta_zero(prof_std):
    res = hysteresis_loop(build_diagram(PhiEvaluator(prof_std, 0.0)), n_steps=201)
    assert res.area == pytest.approx(0.0, abs=1e-12)


def test_loop_area_rectangle():
    F = np.linspace(0, 1, 11)
    assert loop_area(F, np.zeros(11), F[::-1], np.full(11, 2.0)) == pytest.approx(2.0)


def test_detect_jumps(diag150):
    res = hysteresis_loop(diag150)
    ev = detect_jumps(res.up.t, res.up.F, res.up.V, diag150)
    assert len(ev) == 1 and ev[0].V_after < ev[0].V_before
    assert ev[0].F == pytest.approx(res.jump_forcings["up"][0], abs=2e-3)


def test_tw_symmetric(phi150, phi1):
    for ev in (phi1, phi150):
        sols = tw_velocities(ev)
        assert [s.V0 for s in sols] == [0.0]


def test_tw_asymmetric(prof_asym):
    beta_star, V_star = tw_threshold(prof_asym)
    assert np.isfinite(beta_star) and beta_star > 0
    below = tw_velocities(PhiEvaluator(prof_asym, 0.9 * beta_star))
    assert [s.V0 for s in below] == [0.0]
    above = tw_velocities(PhiEvaluator(prof_asym, 1.5 * beta_star))
    nonzero = [s for s in above if s.V0 != 0.0]
    assert len(nonzero) >= 2
    ev = PhiEvaluator(prof_asym, 1.5 * beta_star)
    for s in nonzero:
        h = 2 * ev.c0 * s.V0 - ev.phi(s.V0) + ev.phi(-s.V0)
        assert abs(h) <= 1e-9
        assert s.lambda0 == pytest.approx(0.5 * (ev.phi(s.V0) + ev.phi(-s.V0)))
        assert s.nondegenerate


def test_kinetic_constant_forcing(prof_std, phi150, diag150):
    F = -1.5
    V0 = solve_velocity(diag150, F)[0]
    f0 = phi150.solve_psi(V0).values
    hist = simulate_kinetic(prof_std, 150.0, 0.05, constant(F), f0, 0.3, record_every=50)
    late = hist.t > 0.1
    assert np.max(np.abs(hist.V[late] - V0)) <= 1e-3


def test_kinetic_beta_zero(prof_std, rng):
    f0 = np.sin(prof_std.z) * np.exp(-prof_std.z**2 / 50)
    F = -0.1
    hist = simulate_kinetic(prof_std, 0.0, 0.05, constant(F), f0, 1.0, record_every=50)
    assert np.max(np.abs(hist.f)) <= 1e-6
    assert hist.V[-1] == pytest.approx(-F / prof_std.c0, rel=1e-5)


def test_kinetic_errors(prof_std):
    with pytest.raises(ValueError):
        simulate_kinetic(prof_std, 1.0, 0.0, constant(0.0), np.zeros(prof_std.z.size), 0.1)
    with pytest.raises(ValueError):
        simulate_kinetic(prof_std, 1.0, 0.1, constant(0.0), np.zeros(5), 0.1)
