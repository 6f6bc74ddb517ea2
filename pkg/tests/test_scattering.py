import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma as G

from hirota import scattering as sc
from hirota.errors import NonGenericPotential
from hirota.potential import Potential
from hirota.soliton import SolitonParams, soliton_potential

from conftest import sech_potential

SIGMA2 = np.array([[0, -1j], [1j, 0]])


def sech_s11(A, z):
    w = 0.5 - 1j * np.asarray(z)
    return G(w) ** 2 / (G(w + A) * G(w - A))


def sech_s21(A, z):
    return -np.sin(np.pi * A) / np.cosh(np.pi * np.asarray(z))


# --- Jost solutions ---------------------------------------------------------


def test_zero_potential_jost_is_identity():
    q = Potential.zero()
    for z in (0.3, -1.2 + 0.4j, 2.0 - 0.1j):
        assert np.abs(sc.jost_minus(q, z).m - np.eye(2)).max() < 1e-12
        assert np.abs(sc.jost_plus(q, z).m - np.eye(2)).max() < 1e-12


def test_jost_unimodular_for_sech():
    q = sech_potential(1.0)
    assert abs(sc.jost_minus(q, 0.5j + 0.3).det - 1) < 1e-8
    assert abs(sc.jost_plus(q, 0.5j + 0.3).det - 1) < 1e-8


def test_jost_half_step_convergence():
    coarse = Potential.from_function(lambda x: 0.3 / np.cosh(x), -40, 40, 3201, tail_policy="ignore")
    fine = Potential.from_function(lambda x: 0.3 / np.cosh(x), -40, 40, 6401, tail_policy="ignore")
    for fn in (sc.jost_minus, sc.jost_plus):
        assert np.abs(fn(coarse, 0.5).m - fn(fine, 0.5).m).max() < 1e-7


def test_jost_trace_endpoints():
    q = sech_potential(0.3, n=801)
    ev, tr = sc.jost_minus(q, 0.2, trace=True)
    assert tr.shape == (q.n, 2, 2)
    assert np.abs(tr[0] - np.eye(2)).max() < 1e-15
    assert np.abs(tr[-1] - ev.m).max() < 1e-15
    ev, tr = sc.jost_plus(q, 0.2, trace=True)
    assert np.abs(tr[-1] - np.eye(2)).max() < 1e-15
    assert np.abs(tr[0] - ev.m).max() < 1e-15


@pytest.mark.parametrize("z", [0.7, 0.7 + 0.1j])
def test_conjugation_symmetry(z):
    q = sech_potential(0.3)
    for fn in (sc.jost_minus, sc.jost_plus):
        a = fn(q, z).m
        b = fn(q, np.conj(z)).m
        assert np.abs(a - SIGMA2 @ b.conj() @ SIGMA2).max() < 1e-8


# --- scattering matrix --------------------------------------------------------


def test_zero_potential_scattering_identity():
    s = sc.scattering_matrix(Potential.zero(), 0.37)
    assert np.abs(s.as_matrix() - np.eye(2)).max() < 1e-12


def test_sech_closed_form():
    q = sech_potential(0.3)
    s = sc.scattering_matrix(q, 0.4)
    assert abs(s.s11 - sech_s11(0.3, 0.4)) < 1e-5
    assert abs(s.s21 - sech_s21(0.3, 0.4)) < 1e-5
    assert abs(s.det - 1) < 1e-10
    assert abs(s.s22 - np.conj(s.s11)) < 1e-10
    assert abs(s.s12 + np.conj(s.s21)) < 1e-10


def test_soliton_is_reflectionless():
    q = soliton_potential(SolitonParams(0.5, 0.0), -40, 40, 3201)
    _, _, s21, _ = sc.scattering_coefficients(q, np.linspace(-5, 5, 101))
    assert np.abs(s21).max() < 1e-6


def test_reflection_coefficient_sech():
    zg = np.linspace(-4, 4, 81)
    d = sc.reflection_coefficient(sech_potential(0.3), zg)
    assert np.abs(d.r - sech_s21(0.3, zg) / sech_s11(0.3, zg)).max() < 1e-5
    assert d.bound_states == ()


def test_reflection_zero_and_soliton():
    zg = np.linspace(-5, 5, 101)
    assert np.abs(sc.reflection_coefficient(Potential.zero(), zg).r).max() < 1e-14
    q = soliton_potential(SolitonParams(0.5, 0.25, 0.4, 1.0, 0.2, -1.0), -40, 40, 3201)
    assert sc.reflection_coefficient(q, zg).sup_norm() < 1e-6


def test_non_generic_potential_named():
    # 0.5 sech x has s11(0) = 0
    with pytest.raises(NonGenericPotential) as e:
        sc.reflection_coefficient(sech_potential(0.5), np.linspace(-1, 1, 21))
    assert e.value.z == 0.0


def test_grid_refinement_order():
    zg = np.linspace(-3, 3, 31)
    rs = [sc.reflection_coefficient(sech_potential(0.6, n=n), zg).r for n in (801, 1601, 3201)]
    e1 = np.abs(rs[0] - rs[2]).max()
    e2 = np.abs(rs[1] - rs[2]).max()
    assert e1 / e2 > 4  # at least second order (the scheme is fourth order)


def test_threads_do_not_change_results(monkeypatch):
    q = sech_potential(0.3, n=801)
    zg = np.linspace(-3, 3, 64)
    a = sc.scattering_coefficients(q, zg)
    monkeypatch.setenv("HIROTA_THREADS", "3")
    b = sc.scattering_coefficients(q, zg)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)


# --- bound states ------------------------------------------------------------


def test_no_bound_states_for_zero():
    assert sc.find_bound_states(Potential.zero(), (-3, 3, 1e-3, 2)) == []


def test_soliton_bound_state():
    p = SolitonParams(0.5, 0.25)
    q = soliton_potential(p, -40, 40, 3201)
    (z, c), = sc.find_bound_states(q, zgrid=[-3, 3])
    assert abs(z - (0.25 + 0.5j)) < 1e-6
    # norming constant of the closed-form soliton
    assert abs(c - (-1j)) < 1e-6


@pytest.mark.parametrize("A", [1.2, 2.3])
def test_sech_eigenvalue_ladder(A):
    bs = sc.find_bound_states(sech_potential(A, n=4001), zgrid=[-3, 3])
    expected = sorted(A - 0.5 - n for n in range(int(np.ceil(A - 0.5))))
    found = sorted(z.imag for z, _ in bs)
    assert len(found) == len(expected)
    assert np.abs(np.array(found) - expected).max() < 1e-5
    assert max(abs(z.real) for z, _ in bs) < 1e-6


def test_count_zeros_matches_ladder():
    assert sc.count_zeros(sech_potential(2.3, n=4001), (-2, 2, 1e-3, 3)) == 2


# --- data, evolution, serialization ------------------------------------------


def _data():
    zg = np.linspace(-3, 3, 61)
    return sc.ScatteringData(zg, 0.2 * np.exp(-zg ** 2) * np.exp(1j * zg), ((1j, 0.5 + 0.2j),), 1.0, 0.3)


def test_scattering_data_validation():
    zg = np.linspace(-1, 1, 5)
    with pytest.raises(ValueError):
        sc.ScatteringData(zg[::-1], np.zeros(5))
    with pytest.raises(ValueError):
        sc.ScatteringData(zg, np.zeros(5), ((-1j, 1.0),))
    with pytest.raises(ValueError):
        sc.ScatteringData(zg, np.zeros(5), ((1j, 0.0),))
    with pytest.raises(ValueError):
        sc.ScatteringData(zg, np.full(5, np.inf))


def test_evolve_identity_and_norm():
    d = _data()
    e0 = sc.evolve_scattering(d, 0.0)
    assert np.array_equal(e0.r, d.r) and e0.bound_states == d.bound_states
    e = sc.evolve_scattering(d, 7.3)
    assert abs(e.l2_norm() - d.l2_norm()) < 1e-12
    assert np.abs(np.abs(e.r) - np.abs(d.r)).max() < 1e-15


def test_evolve_norming_constant_factor():
    d = sc.ScatteringData(np.linspace(-1, 1, 3), np.zeros(3), ((1j, 1.0),), 1.0, 0.0)
    assert abs(sc.evolve_scattering(d, 1.0, "single").bound_states[0][1] - np.exp(-2j)) < 1e-14
    assert abs(sc.evolve_scattering(d, 1.0, "double").bound_states[0][1] - np.exp(-4j)) < 1e-14


@settings(max_examples=40, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20))
def test_evolve_is_a_flow(t1, t2):
    d = _data()
    a = sc.evolve_scattering(sc.evolve_scattering(d, t1), t2)
    b = sc.evolve_scattering(d, t1 + t2)
    assert np.abs(a.r - b.r).max() < 1e-9
    assert abs(a.bound_states[0][1] - b.bound_states[0][1]) < 1e-9 * abs(b.bound_states[0][1])


def test_json_and_csv(tmp_path):
    d = _data()
    back = sc.ScatteringData.from_dict(json.loads(json.dumps(d.to_dict())))
    assert np.array_equal(back.r, d.r) and back.bound_states == d.bound_states
    assert (back.alpha, back.beta) == (d.alpha, d.beta)
    d.write_csv(tmp_path / "r.csv")
    tab = np.loadtxt(tmp_path / "r.csv", delimiter=",", skiprows=1)
    assert np.array_equal(tab[:, 0], d.zgrid)
    assert np.array_equal(tab[:, 1] + 1j * tab[:, 2], d.r)


@st.composite
def bumps(draw):
    k = draw(st.integers(1, 3))
    amps = [draw(st.floats(-0.8, 0.8)) + 1j * draw(st.floats(-0.8, 0.8)) for _ in range(k)]
    cents = [draw(st.floats(-4, 4)) for _ in range(k)]
    widths = [draw(st.floats(0.5, 2.0)) for _ in range(k)]
    return lambda x: sum(a * np.exp(-((x - c) / w) ** 2) for a, c, w in zip(amps, cents, widths))


@settings(max_examples=15, deadline=None)
@given(bumps())
def test_unitarity_random_potentials(f):
    q = Potential.from_function(f, -20, 20, 801, tail_policy="ignore")
    zg = np.linspace(-4, 4, 41)
    s11, s12, s21, s22 = sc.scattering_coefficients(q, zg)
    assert np.abs(np.abs(s11) ** 2 + np.abs(s21) ** 2 - 1).max() < 1e-8
    assert np.abs(s11 * s22 - s12 * s21 - 1).max() < 1e-8
