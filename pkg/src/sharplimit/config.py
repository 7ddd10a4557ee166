"""Experiment configuration (JSON) shared by all CLI subcommands."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

SUBCOMMANDS = ("phi", "branches", "hysteresis", "kinetic", "pde1d", "tw", "spectrum",
               "curve2d", "validate")


class ConfigKeyError(ValueError):
    """Unknown or malformed configuration key."""


@dataclass
class ExperimentConfig:
    """Flat key set; every key may also be given as a ``--key`` CLI flag.

    forcing is a ForcingSignal dictionary (kind constant | ramp | sinusoid |
    table) or None for the subcommand default (the increasing ramp from
    -2.25 to -1 for kinetic and pde1d; both ramps for hysteresis).
    """

    subcommand: str = "validate"
    potential: str = "standard"
    potential_scale: float = 1.0
    beta: float = 150.0
    delta: float = 1.0
    epsilon: float = 0.01
    # standing-wave grid
    profile_L: float = 40.0
    profile_h: float = 0.01
    # velocity grids (phi, branches, spectrum, tw)
    V_min: float = -10.0
    V_max: float = 10.0
    n_V: int = 201
    V_scan: float = 30.0
    # time stepping
    T: float = 1.0
    dt: float | None = None
    n_steps: int = 2001
    # pde1d
    L_x: float = 4.0
    h_x: float | None = None
    init: str = "standing"
    init_velocity: float | None = None
    mass_constraint: bool = False
    n_samples: int = 500
    # kinetic: which root of the initial forcing starts the run
    branch: str = "largest"
    # curve2d
    curve: str = "ellipse"
    curve_a: float = 2.0
    curve_b: float = 1.0
    curve_n: int = 128
    # forcing and output
    forcing: dict | None = None
    output: str = "out"
    seed: int = 0
    svg: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigKeyError(f"subcommand: unknown value {self.subcommand!r}")
        if self.potential not in ("standard", "asymmetric"):
            raise ConfigKeyError(f"potential: unknown value {self.potential!r}")
        if self.branch not in ("largest", "smallest"):
            raise ConfigKeyError(f"branch: must be 'largest' or 'smallest', got {self.branch!r}")
        if self.curve not in ("ellipse", "circle"):
            raise ConfigKeyError(f"curve: unknown value {self.curve!r}")
        if self.n_V < 2 or self.n_steps < 2 or self.curve_n < 8:
            raise ConfigKeyError("n_V, n_steps >= 2 and curve_n >= 8 required")
        if self.forcing is not None and not isinstance(self.forcing, dict):
            raise ConfigKeyError("forcing: must be a JSON object")

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigKeyError(f"unknown configuration key(s): {', '.join(unknown)}")
        return cls(**coerce(d))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigKeyError(f"invalid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigKeyError("configuration must be a JSON object")
        return cls.from_dict(d)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text())


def field_types() -> dict:
    """Base python type of each key (for CLI flag parsing)."""
    out = {}
    for f in fields(ExperimentConfig):
        t = str(f.type)
        if t.startswith("float"):
            out[f.name] = float
        elif t.startswith("int"):
            out[f.name] = int
        elif t.startswith("bool"):
            out[f.name] = bool
        elif t.startswith("dict"):
            out[f.name] = dict
        else:
            out[f.name] = str
    return out


def coerce(d: dict) -> dict:
    """Convert values to the declared key types (ints to floats, etc.)."""
    types = field_types()
    out = {}
    for k, v in d.items():
        t = types[k]
        if v is None or t in (dict, str):
            out[k] = v
        elif t is bool:
            if not isinstance(v, bool):
                raise ConfigKeyError(f"{k}: expected true/false, got {v!r}")
            out[k] = v
        else:
            try:
                out[k] = t(v)
            except (TypeError, ValueError) as exc:
                raise ConfigKeyError(f"{k}: cannot convert {v!r} to {t.__name__}") from exc
            if t is int and out[k] != v:
                raise ConfigKeyError(f"{k}: expected an integer, got {v!r}")
    return out
