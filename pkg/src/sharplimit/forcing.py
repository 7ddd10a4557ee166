"""Forcing signals F(t): constant, linear ramp a + b t, sinusoid, table."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass
class ForcingSignal:
    """Serializable forcing specification.

    kind = "constant": F = a
    kind = "ramp":     F = a + b t
    kind = "sinusoid": F = a + amplitude sin(2 pi frequency t + phase)
    kind = "table":    piecewise-linear interpolation of (times, values)
    """

    kind: str = "constant"
    a: float = 0.0
    b: float = 0.0
    amplitude: float = 0.0
    frequency: float = 1.0
    phase: float = 0.0
    times: list = field(default_factory=list)
    values: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ("constant", "ramp", "sinusoid", "table"):
            raise ValueError(f"unknown forcing kind {self.kind!r}")
        if self.kind == "table":
            if len(self.times) < 2 or len(self.times) != len(self.values):
                raise ValueError("table forcing needs matching times/values (>= 2 points)")
            if np.any(np.diff(self.times) <= 0):
                raise ValueError("table times must be increasing")

    vectorized = True

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            out = np.full(t.shape, self.a)
        elif self.kind == "ramp":
            out = self.a + self.b * t
        elif self.kind == "sinusoid":
            out = self.a + self.amplitude * np.sin(2 * np.pi * self.frequency * t + self.phase)
        else:
            out = np.interp(t, self.times, self.values)
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ForcingSignal":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown forcing keys: {sorted(unknown)}")
        return cls(**d)


def constant(a: float) -> ForcingSignal:
    return ForcingSignal("constant", a=a)


def ramp(a: float, b: float) -> ForcingSignal:
    return ForcingSignal("ramp", a=a, b=b)


def sinusoid(amplitude: float = 1.0, frequency: float = 1.0, a: float = 0.0,
             phase: float = 0.0) -> ForcingSignal:
    return ForcingSignal("sinusoid", a=a, amplitude=amplitude, frequency=frequency, phase=phase)


def hysteresis_ramps(F_start: float = -1.0, F_end: float = -2.25):
    """(decreasing, increasing) ramps between F_start and F_end over t in [0, 1]."""
    return ramp(F_start, F_end - F_start), ramp(F_end, F_start - F_end)


def sample(F_signal, t) -> np.ndarray:
    """Evaluate any callable forcing on an array of times."""
    t = np.asarray(t, dtype=float)
    try:
        v = np.asarray(F_signal(t), dtype=float)
        if v.shape == t.shape:
            return v
    except (TypeError, ValueError):
        pass
    return np.array([float(F_signal(s)) for s in t.ravel()]).reshape(t.shape)
