"""Command-line harness: ``sharplimit <subcommand> [--config file.json] [--key value ...]``.

Every subcommand writes CSV files and a ``manifest.json`` (inputs, versions,
derived constants) into the output directory. Exit codes: 0 success,
1 usage / configuration error, 2 numerical failure or failed validation.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .config import SUBCOMMANDS, ConfigKeyError, ExperimentConfig, field_types
from .forcing import ForcingSignal, hysteresis_ramps

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sharplimit", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="JSON configuration file (flags override its keys)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any key; VALUE is parsed as JSON when possible")
    for name, t in field_types().items():
        if name == "subcommand":
            continue
        flag = "--" + name
        if t is bool:
            p.add_argument(flag, dest=name, default=None, action=argparse.BooleanOptionalAction)
        elif t is dict:
            p.add_argument(flag, dest=name, default=None, metavar="JSON")
        else:
            p.add_argument(flag, dest=name, default=None, type=str, metavar=t.__name__.upper())
    return p


def _parse_value(key: str, text: str):
    t = field_types()[key]
    if text.lower() in ("none", "null"):
        return None
    if t is dict:
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigKeyError(f"{key}: invalid JSON ({exc})") from exc
    if t is bool:
        if text.lower() in ("1", "true", "yes"):
            return True
        if text.lower() in ("0", "false", "no"):
            return False
        raise ConfigKeyError(f"{key}: expected a boolean, got {text!r}")
    if t is str:
        return text
    try:
        return t(float(text)) if t is int and float(text).is_integer() else t(text)
    except ValueError as exc:
        raise ConfigKeyError(f"{key}: cannot parse {text!r} as {t.__name__}") from exc


def resolve_config(argv) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    d = {}
    if args.config:
        try:
            d = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigKeyError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigKeyError(f"invalid JSON in {args.config}: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigKeyError("configuration must be a JSON object")
    d = dict(d)
    d["subcommand"] = args.subcommand
    for item in args.set:
        if "=" not in item:
            raise ConfigKeyError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        if k not in field_types():
            raise ConfigKeyError(f"unknown configuration key(s): {k}")
        d[k] = _parse_value(k, v)
    for k in field_types():
        v = getattr(args, k, None)
        if v is None or k == "subcommand":
            continue
        d[k] = v if isinstance(v, bool) else _parse_value(k, v)
    return ExperimentConfig.from_dict(d)


# ----------------------------------------------------------------------------
# shared setup

def _profile(cfg):
    from .potential import make_potential
    from .standing_wave import compute_standing_wave

    return compute_standing_wave(make_potential(cfg.potential, cfg.potential_scale),
                                 cfg.profile_L, cfg.profile_h)


def _derived(prof, diag=None) -> dict:
    d = {"c0": prof.c0, "kappa_minus": prof.kappa_minus, "kappa_plus": prof.kappa_plus}
    if diag is not None:
        d["F_min"] = diag.F_min
        d["F_max"] = diag.F_max
        d["tangency_forcings"] = diag.fold_forcings
    return d


def _forcing(cfg, default: ForcingSignal) -> ForcingSignal:
    if cfg.forcing is None:
        return default
    try:
        return ForcingSignal.from_dict(cfg.forcing)
    except (TypeError, ValueError) as exc:
        raise ConfigKeyError(f"forcing: {exc}") from exc


def _manifest(cfg, out: Path, derived: dict, results: dict, files: list, wall: float):
    io.write_manifest(out / "manifest.json", {
        "subcommand": cfg.subcommand, "inputs": cfg.to_dict(), "versions": io.versions(),
        "derived": derived, "results": results, "files": sorted(files),
        "wall_seconds": round(wall, 3),
    })


# ----------------------------------------------------------------------------
# subcommands

def cmd_phi(cfg, out):
    from .orientation import PhiEvaluator

    prof = _profile(cfg)
    ev = PhiEvaluator(prof, cfg.beta, cfg.delta)
    Vs = np.linspace(cfg.V_min, cfg.V_max, cfg.n_V)
    ph, dph = ev.table(Vs)
    io.write_csv(out / "phi.csv", ["V", "Phi", "dPhi"], io.columns(Vs, ph, dph))
    if cfg.svg:
        io.write_svg(out / "phi.svg", [(Vs, ph)], labels=("V", "Phi"))
    return _derived(prof), {"Phi(0)": ev.phi(0.0)}, ["phi.csv"]


def _diagram(cfg, prof):
    from .orientation import PhiEvaluator
    from .reduced import build_diagram

    return build_diagram(PhiEvaluator(prof, cfg.beta, cfg.delta), cfg.V_scan)


def cmd_branches(cfg, out):
    prof = _profile(cfg)
    diag = _diagram(cfg, prof)
    stable = [diag.stable_index(v) is not None for v in diag.v_grid]
    io.write_csv(out / "branches.csv", ["V", "g", "dg", "stable"],
                 io.columns(diag.v_grid, diag.g_values, diag.dg_values, stable))
    if cfg.svg:
        io.write_svg(out / "branches.svg", [(diag.v_grid, diag.g_values)], labels=("V", "-F"))
    return _derived(prof, diag), {"diagram": diag.to_dict()}, ["branches.csv"]


def _history_rows(h):
    return [(t, F, V, b, int(j)) for t, F, V, b, j in h.rows()]


def cmd_hysteresis(cfg, out):
    from .reduced import hysteresis_loop

    prof = _profile(cfg)
    diag = _diagram(cfg, prof)
    res = hysteresis_loop(diag, cfg.n_steps)
    hdr = ["t", "F", "V", "branch", "jump"]
    io.write_csv(out / "hysteresis_down.csv", hdr, _history_rows(res.down))
    io.write_csv(out / "hysteresis_up.csv", hdr, _history_rows(res.up))
    if cfg.svg:
        io.write_svg(out / "hysteresis.svg", [(res.down.F, res.down.V), (res.up.F, res.up.V)],
                     labels=("F", "V"))
    results = {"loop_area": res.area, "jump_forcings": res.jump_forcings}
    return _derived(prof, diag), results, ["hysteresis_down.csv", "hysteresis_up.csv"]


def cmd_kinetic(cfg, out):
    from .orientation import PhiEvaluator
    from .reduced import build_diagram, detect_jumps, simulate_kinetic, solve_velocity

    prof = _profile(cfg)
    ev = PhiEvaluator(prof, cfg.beta, cfg.delta)
    diag = build_diagram(ev, cfg.V_scan)
    F = _forcing(cfg, hysteresis_ramps()[1])
    roots = solve_velocity(diag, float(F(0.0)))
    V0 = roots[-1] if cfg.branch == "largest" else roots[0]
    rec = max(1, int(cfg.n_steps))
    kh = simulate_kinetic(prof, cfg.beta, cfg.epsilon, F, ev.solve_psi(V0).values, cfg.T, cfg.dt)
    stride = max(1, kh.t.size // rec)
    sl = slice(None, None, stride)
    io.write_csv(out / "kinetic.csv", ["t", "F", "V"], io.columns(kh.t[sl], kh.F[sl], kh.V[sl]))
    jumps = detect_jumps(kh.t, kh.F, kh.V, diag)
    results = {"V_initial": V0, "jumps": [{"t": e.t, "F": e.F, "F_mid": e.F_mid,
                                           "V_before": e.V_before, "V_after": e.V_after}
                                          for e in jumps]}
    return _derived(prof, diag), results, ["kinetic.csv"]


def _solver_config(cfg, forcing):
    from .pde1d import ConfigError, SolverConfig

    try:
        return SolverConfig(epsilon=cfg.epsilon, beta=cfg.beta, delta=cfg.delta, L_x=cfg.L_x,
                            h_x=cfg.h_x, dt=cfg.dt, T=cfg.T, potential=cfg.potential,
                            potential_scale=cfg.potential_scale, forcing=forcing, init=cfg.init,
                            init_velocity=cfg.init_velocity, mass_constraint=cfg.mass_constraint,
                            n_samples=cfg.n_samples, profile_L=cfg.profile_L,
                            profile_h=cfg.profile_h)
    except ConfigError as exc:
        raise ConfigKeyError(str(exc)) from exc


def cmd_pde1d(cfg, out):
    from .pde1d import run_experiment

    scfg = _solver_config(cfg, _forcing(cfg, hysteresis_ramps()[1]))
    r = run_experiment(scfg)
    tr, en = r.track, r.energy
    io.write_csv(out / "pde1d.csv",
                 ["t", "x_eps", "V_eps", "F", "far_left", "far_right", "E_eps", "F_eps", "G_eps",
                  "rho_max"],
                 io.columns(tr.times, tr.x_eps, tr.V_eps, tr.F, tr.far_left, tr.far_right,
                            en.E_eps, en.F_eps, en.G_eps, en.rho_max))
    if cfg.svg:
        io.write_svg(out / "pde1d.svg", [(tr.F, tr.V_eps)], labels=("F", "V_eps"))
    prof = _profile(cfg)
    results = {"steps": r.steps, "energy_growth": en.growth, "rho_max": float(en.rho_max.max()),
               "V_final": float(tr.V_eps[-1]), "solver": scfg.to_dict()}
    return _derived(prof), results, ["pde1d.csv"]


def cmd_tw(cfg, out):
    from .orientation import PhiEvaluator
    from .reduced import tw_threshold, tw_velocities

    prof = _profile(cfg)
    sols = tw_velocities(PhiEvaluator(prof, cfg.beta, cfg.delta), cfg.V_scan)
    io.write_csv(out / "tw.csv", ["V0", "lambda0", "nondegenerate", "h_prime"],
                 [(s.V0, s.lambda0, s.nondegenerate, s.h_prime) for s in sols])
    beta_star, V_star = tw_threshold(prof, cfg.delta, cfg.V_scan)
    results = {"velocities": [s.V0 for s in sols], "beta_threshold": beta_star,
               "V_at_threshold": V_star}
    return _derived(prof), results, ["tw.csv"]


def cmd_spectrum(cfg, out):
    from .spectral import SpectralProbe, classify_stability, stability_boundaries

    if cfg.potential != "standard":
        raise ConfigKeyError("potential: the Fourier eigencondition needs the standard potential")
    prof = _profile(cfg)
    Vs = np.linspace(cfg.V_min, cfg.V_max, cfg.n_V)
    rows = []
    for V in Vs:
        r = classify_stability(SpectralProbe(float(V), cfg.beta, c0=prof.c0))
        rows.append((V, r.stable, r.eigenvalue if r.eigenvalue is not None else np.nan, r.zeta0))
    io.write_csv(out / "spectrum.csv", ["V", "stable", "eigenvalue", "zeta0"], rows)
    bounds = stability_boundaries(cfg.beta, cfg.V_min, cfg.V_max, n=min(cfg.n_V, 121))
    return _derived(prof), {"stability_boundaries": bounds}, ["spectrum.csv"]


def cmd_curve2d(cfg, out):
    from .curve2d import circle, ellipse, evolve_curve, solve_normal_velocity

    curve = (ellipse(cfg.curve_a, cfg.curve_b, cfg.curve_n) if cfg.curve == "ellipse"
             else circle(cfg.curve_a, cfg.curve_n))
    diag = None
    derived = {}
    if cfg.beta != 0.0:
        prof = _profile(cfg)
        diag = _diagram(cfg, prof)
        derived = _derived(prof, diag)
    h = evolve_curve(curve, diag, cfg.T, cfg.dt, n_samples=min(cfg.n_samples, 1000))
    io.write_csv(out / "curve_history.csv", ["t", "area", "length", "isoperimetric", "lambda0",
                                             "flux_residual"],
                 io.columns(h.times, h.area, h.length, h.isoperimetric, h.lambda0,
                            h.flux_residual))
    fin = h.final
    vf = solve_normal_velocity(fin, diag)
    s = np.concatenate([[0.0], np.cumsum(fin.ds)[:-1]])
    io.write_csv(out / "curve_final.csv", ["s", "x", "y", "kappa", "V"],
                 io.columns(s, fin.nodes[:, 0], fin.nodes[:, 1], fin.curvature, vf.V))
    if cfg.svg:
        X0, X1 = np.vstack([curve.nodes, curve.nodes[:1]]), np.vstack([fin.nodes, fin.nodes[:1]])
        io.write_svg(out / "curve.svg", [(X0[:, 0], X0[:, 1]), (X1[:, 0], X1[:, 1])])
    results = {"area_drift": float(abs(h.area[-1] - h.area[0]) / h.area[0]),
               "isoperimetric_final": float(h.isoperimetric[-1]), "jumps": len(h.jumps),
               "root_selection": "pointwise branch continuity with fold jumps (extension)"}
    return derived, results, ["curve_history.csv", "curve_final.csv"]


def run_validation(cfg=None) -> list[tuple[str, bool, str]]:
    """Fast invariant suite; returns (name, passed, detail) triples."""
    from .curve2d import circle, solve_normal_velocity
    from .orientation import PhiEvaluator
    from .potential import asymmetry_measure, check_admissible, make_asymmetric, make_standard
    from .reduced import build_diagram, solve_velocity, tw_velocities
    from .spectral import SpectralProbe, eigencondition
    from .standing_wave import compute_standing_wave, friedrich_constant, poincare_constant

    out = []

    def rec(name, ok, detail):
        out.append((name, bool(ok), detail))

    Ws, Wa = make_standard(), make_asymmetric()
    for W in (Ws, Wa):
        check_admissible(W)
    rec("potentials admissible", True, "standard, asymmetric")
    a_s, a_a = asymmetry_measure(Ws), asymmetry_measure(Wa)
    rec("asymmetry measure", abs(a_s) < 1e-12 and a_a > 0, f"standard {a_s:.2e}, asymmetric {a_a:.4e}")
    prof = compute_standing_wave(Ws)
    rec("c0 = sqrt(2)/12", abs(prof.c0 - np.sqrt(2) / 12) < 1e-8, f"{prof.c0:.10f}")
    cp, cf = poincare_constant(prof), friedrich_constant(prof)
    rec("weighted Poincare/Friedrich constants finite", np.isfinite(cp) and np.isfinite(cf),
        f"{cp:.4f}, {cf:.4f}")
    diag = build_diagram(PhiEvaluator(prof, 150.0))
    folds = sorted(-F for F in diag.fold_forcings)
    ok = len(folds) == 2 and abs(folds[0] - 1.762) <= 0.02 and abs(folds[1] - 2.264) <= 0.02
    rec("beta=150 folds", ok, f"-F = {folds}")
    n1, n3 = len(solve_velocity(diag, -1.5)), len(solve_velocity(diag, -2.0))
    rec("beta=150 root counts", (n1, n3) == (1, 3), f"{n1} at -F=1.5, {n3} at -F=2.0")
    ev1 = PhiEvaluator(prof, 1.0)
    worst = 0.0
    for V in (-2.0, 0.5, 2.5):
        z = eigencondition(SpectralProbe(V, 1.0, c0=prof.c0), 0.0).real
        d = ev1.phi_derivative(V)
        worst = max(worst, abs(z * prof.c0 - d) / (1 + abs(d)))
    rec("zeta(0) identity", worst <= 1e-3, f"max rel. error {worst:.2e}")
    sym = tw_velocities(ev1)
    rec("symmetric potential: only V=0 travels", len(sym) == 1 and sym[0].V0 == 0.0,
        f"{[s.V0 for s in sym]}")
    vf = solve_normal_velocity(circle(1.0, 64), diag)
    rec("circle stationary", np.max(np.abs(vf.V)) < 1e-6, f"max|V| = {np.max(np.abs(vf.V)):.2e}")
    return out


def cmd_validate(cfg, out):
    checks = run_validation(cfg)
    io.write_csv(out / "validate.csv", ["check", "passed", "detail"], checks)
    for name, ok, detail in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return {}, {"passed": all(ok for _, ok, _ in checks), "n_checks": len(checks)}, ["validate.csv"]


COMMANDS = {"phi": cmd_phi, "branches": cmd_branches, "hysteresis": cmd_hysteresis,
            "kinetic": cmd_kinetic, "pde1d": cmd_pde1d, "tw": cmd_tw, "spectrum": cmd_spectrum,
            "curve2d": cmd_curve2d, "validate": cmd_validate}


def run(cfg: ExperimentConfig) -> dict:
    """Execute one subcommand and write its artifact bundle; returns the results dict."""
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    np.random.seed(cfg.seed)
    t0 = time.perf_counter()
    derived, results, files = COMMANDS[cfg.subcommand](cfg, out)
    (out / "config.json").write_text(cfg.to_json() + "\n")
    _manifest(cfg, out, derived, results, files + ["config.json"], time.perf_counter() - t0)
    return results


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = resolve_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigKeyError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        results = run(cfg)
    except ConfigKeyError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg.subcommand == "validate" and not results.get("passed", False):
        return EXIT_NUMERIC
    print(f"{cfg.subcommand}: wrote {cfg.output}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
