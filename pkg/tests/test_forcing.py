import numpy as np
import pytest

from sharplimit.forcing import (ForcingSignal, constant, hysteresis_ramps, ramp, sample,
                                sinusoid)


def test_kinds():
    t = np.linspace(0, 1, 5)
    assert np.all(constant(2.0)(t) == 2.0)
    assert np.allclose(ramp(1.0, -2.0)(t), 1 - 2 * t)
    assert np.allclose(sinusoid()(t), np.sin(2 * np.pi * t))
    tab = ForcingSignal("table", times=[0, 1], values=[0, 4])
    assert tab(0.25) == pytest.approx(1.0)
    assert isinstance(ramp(0, 1)(0.5), float)


def test_hysteresis_ramps():
    down, up = hysteresis_ramps()
    assert down(0.0) == -1.0 and down(1.0) == pytest.approx(-2.25)
    assert up(0.0) == -2.25 and up(1.0) == pytest.approx(-1.0)


def test_round_trip_and_errors():
    s = sinusoid(0.5, 2.0, a=1.0)
    assert ForcingSignal.from_dict(s.to_dict()) == s
    with pytest.raises(ValueError):
        ForcingSignal.from_dict({"kind": "ramp", "slope": 1})
    with pytest.raises(ValueError):
        ForcingSignal("square")
    with pytest.raises(ValueError):
        ForcingSignal("table", times=[0, 0], values=[1, 2])


def test_sample_scalar_callable():
    vals = sample(lambda s: 3.0 if s > 0.5 else 1.0, np.array([0.0, 1.0]))
    assert np.all(vals == [1.0, 3.0])
