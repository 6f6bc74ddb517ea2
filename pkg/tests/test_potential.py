import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hirota.errors import TruncationWarning
from hirota.potential import Potential


def test_validation():
    with pytest.raises(ValueError):
        Potential(0.0, 0.1, [])
    with pytest.raises(ValueError):
        Potential(0.0, 0.0, [1.0])
    with pytest.raises(ValueError):
        Potential(0.0, 0.1, [1.0, 1.0], tail_policy="error")


def test_truncation_warns():
    with pytest.warns(TruncationWarning):
        Potential.from_function(lambda x: 1 / np.cosh(x), -5, 5, 101)


def test_samples_are_read_only():
    q = Potential.zero()
    with pytest.raises(ValueError):
        q.samples[0] = 1.0


def test_midpoints_band_limited():
    q = Potential.from_function(lambda x: np.exp(-x ** 2) * np.exp(0.7j * x), -12, 12, 481)
    exact = np.exp(-(q.x[:-1] + q.dx / 2) ** 2) * np.exp(0.7j * (q.x[:-1] + q.dx / 2))
    assert np.abs(q.midpoints() - exact).max() < 1e-12


def test_refine_keeps_nodes():
    q = Potential.from_function(lambda x: np.exp(-x ** 2), -10, 10, 201)
    r = q.refine(3)
    assert r.n == 601
    assert np.allclose(r.samples[::3], q.samples)
    assert np.abs(r.samples - np.exp(-r.x ** 2)).max() < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=1, max_size=40),
       st.floats(-50, 50), st.floats(1e-3, 2.0))
def test_json_round_trip(vals, x0, dx):
    q = Potential(x0, dx, vals, tail_policy="ignore")
    back = Potential.from_dict(q.to_dict(), tail_policy="ignore")
    assert back.x0 == q.x0 and back.dx == q.dx
    assert np.array_equal(back.samples, q.samples)
