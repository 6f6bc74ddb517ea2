import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hirota import darboux as dbx
from hirota import scattering as sc
from hirota.errors import BoundStateNotFound
from hirota.potential import Potential
from hirota.soliton import SolitonParams, soliton_potential, soliton_value

from conftest import sech_potential


def _zero():
    return Potential.from_function(np.zeros_like, -40, 40, 3201)


def _data(bound=()):
    zg = np.linspace(-3, 3, 61)
    return sc.ScatteringData(zg, 0.3 * np.exp(-zg ** 2) * np.exp(2j * zg), bound, 1.0, 0.2)


def test_pair_validation():
    with pytest.raises(ValueError):
        dbx.DressingPair(-0.5j, 1.0)
    with pytest.raises(ValueError):
        dbx.DressingPair(0.5j, 0.0)


def test_twist_zero_reflection_stays_zero():
    d = sc.ScatteringData(np.linspace(-1, 1, 11), np.zeros(11))
    assert np.all(dbx.twist_reflection(d, 0.3 + 0.5j, "add", 1.0).r == 0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(0.1, 2), st.floats(-2, 2), st.floats(0.1, 2))
def test_twist_modulus_and_inverse(xr, xi_, cr, ci):
    z_s = complex(xr, xi_)
    d = _data(((0.1 + 1.7j, 0.3 - 0.2j),))
    if abs(z_s - d.bound_states[0][0]) < 1e-3:
        return
    a = dbx.twist_reflection(d, z_s, "add", complex(cr, ci))
    assert np.abs(np.abs(a.r) - np.abs(d.r)).max() < 1e-14
    assert len(a.bound_states) == 2
    b = dbx.twist_reflection(a, z_s, "remove")
    assert np.abs(b.r - d.r).max() < 1e-14
    assert abs(b.bound_states[0][1] - d.bound_states[0][1]) < 1e-14
    assert b.bound_states[0][0] == d.bound_states[0][0]


def test_remove_missing_bound_state():
    with pytest.raises(BoundStateNotFound):
        dbx.twist_reflection(_data(), 0.5j, "remove")


@pytest.mark.parametrize("t", [0.0, 2.5])
def test_zero_seed_reproduces_soliton(t):
    p = SolitonParams(0.5, 0.25, 0.7, 1.0, 0.2, 1.3)
    q = dbx.add_bound_state(_zero(), dbx.DressingPair.for_soliton(p), t=t, alpha=1.0, beta=0.2)
    assert np.abs(q.samples - soliton_value(p, q.x, t)).max() < 1e-10


def test_dressed_zero_seed_scattering():
    pair = dbx.DressingPair(-0.2 + 0.6j, 0.4 - 0.9j)
    q = dbx.add_bound_state(_zero(), pair)
    (z, c), = sc.find_bound_states(q, zgrid=[-3, 3])
    assert abs(z - pair.z_s) < 1e-6
    assert abs(c - pair.c1) < 1e-5
    assert sc.reflection_coefficient(q, np.linspace(-4, 4, 41)).sup_norm() < 1e-6


def test_determinant_positive():
    q = sech_potential(0.3)
    det = dbx.dressing_determinant(q, dbx.DressingPair(0.2 + 0.6j, 0.5 - 1j))
    assert np.all(det > 0)


def test_numerical_seed_matches_twist():
    q = sech_potential(0.3)
    zg = np.linspace(-3, 3, 31)
    d = sc.reflection_coefficient(q, zg)
    pair = dbx.DressingPair(0.2 + 0.6j, 0.5 - 1j)
    q2 = dbx.add_bound_state(q, pair)
    d2 = sc.scattering_data(q2, zg)
    tw = dbx.twist_reflection(d, pair.z_s, "add", pair.c1)
    assert np.abs(d2.r - tw.r).max() < 1e-6
    (z, c), = d2.bound_states
    assert abs(z - pair.z_s) < 1e-6 and abs(c - pair.c1) < 1e-5


def test_second_bound_state_twists_first_constant():
    p1 = SolitonParams(0.5, 0.25)
    q1 = soliton_potential(p1, -40, 40, 3201)
    c1 = dbx.DressingPair.for_soliton(p1).c1
    pair = dbx.DressingPair(-0.3 + 0.8j, -1.6j)
    q2 = dbx.add_bound_state(q1, pair)
    bs = dict((round(z.real, 4), c) for z, c in sc.find_bound_states(q2, zgrid=[-3, 3]))
    twisted = c1 * dbx.blaschke(p1.z, pair.z_s)
    assert abs(bs[0.25] - twisted) < 1e-5 * abs(twisted)
    assert abs(bs[-0.3] - pair.c1) < 1e-5


def test_backlund_B_identity_seed():
    p = SolitonParams(0.5, 0.25, 0.4, 1.0, 0.2, -0.7)
    x = np.linspace(-20, 20, 401)
    for t in (0.0, 1.7):
        B = dbx.backlund_B(np.eye(2), dbx.DressingPair.for_soliton(p), x, t, 1.0, 0.2)
        assert np.abs(B - soliton_value(p, x, t)).max() < 1e-10
        assert np.all(np.abs(B) <= 2 * p.eta + 1e-12)


def test_backlund_B_from_jost_evaluation():
    ev = sc.JostEvaluation(0.0, 0.5j, np.eye(2))
    pair = dbx.DressingPair(0.5j, -1j)
    assert abs(dbx.backlund_B(ev, pair, 0.0) - 1.0) < 1e-14
