import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hirota import pde
from hirota.errors import BlowUp, InsufficientGrid
from hirota.soliton import SolitonParams, soliton_value

P = SolitonParams(0.5, 0.25, 0.3, 1.0, 0.2, 0.0)


def cfg(**kw):
    base = dict(domain_half_width=32.0, n_modes=1024, dt=1e-3, t_max=0.1, alpha=1.0, beta=0.2)
    base.update(kw)
    return pde.EvolutionConfig(**base)


def sol(c, t=0.0, p=P):
    return c.initial(lambda x: soliton_value(p, x, t))


def err(c, q, t, p=P):
    return float(np.max(np.abs(q.samples - soliton_value(p, c.x, t))))


# --- linear part -------------------------------------------------------------


def test_linear_multiplier_cases():
    assert pde.linear_multiplier(0.0, 0.7, 1.0, 0.2) == 1.0
    assert pde.linear_multiplier(1.0, 1.0, 1.0, 0.0) == pytest.approx(np.exp(-1j))
    assert pde.linear_multiplier(1.0, 1.0, 0.0, 1.0) == pytest.approx(np.exp(1j))


@settings(max_examples=50, deadline=None)
@given(st.floats(-20, 20), st.floats(-1, 1), st.floats(-1, 1), st.floats(-2, 2), st.floats(-2, 2))
def test_linear_multiplier_group_property(k, a, b, alpha, beta):
    m = pde.linear_multiplier
    assert abs(abs(m(k, a, alpha, beta)) - 1) < 1e-14
    assert abs(m(k, a, alpha, beta) * m(k, b, alpha, beta) - m(k, a + b, alpha, beta)) < 1e-9


def test_small_plane_wave_is_linear():
    c = cfg(domain_half_width=np.pi * 8, n_modes=256, dt=1e-3, t_max=0.5)
    k = c.k[3]
    eps = 1e-7
    q0 = c.initial(lambda x: eps * np.exp(1j * k * x))
    # periodic data: run through step() (run() rejects data that fills the box)
    q = q0
    for _ in range(500):
        q = pde.step(q, c)
    expect = eps * np.exp(1j * k * c.x) * pde.linear_multiplier(k, 0.5, c.alpha, c.beta)
    assert np.max(np.abs(q.samples - expect)) < 1e-12


def test_zero_data_stays_zero():
    c = cfg()
    res = pde.run(c.initial(lambda x: 0 * x), c)
    assert np.all(res.at(c.t_max).samples == 0)


# --- accuracy ------------------------------------------------------------------


def test_one_step_soliton():
    c = cfg(scheme="triple-jump")
    q = pde.step(sol(c), c)
    assert err(c, q, c.dt) < 1e-9


def test_strang_local_error_is_third_order():
    e = [err(c, pde.step(sol(c), c), c.dt) for c in (cfg(dt=2e-3), cfg(dt=1e-3))]
    assert e[0] / e[1] == pytest.approx(8.0, rel=0.05)


@pytest.mark.parametrize("scheme,order", [("strang", 2), ("triple-jump", 4)])
def test_convergence_order(scheme, order):
    errs = []
    for dt in ((0.02, 0.01) if order == 2 else (0.01, 0.005)):
        c = cfg(dt=dt, t_max=1.0, scheme=scheme, cfl=100.0)
        errs.append(err(c, pde.run(sol(c), c).at(1.0), 1.0))
    assert errs[0] / errs[1] == pytest.approx(2 ** order, rel=0.15)


def test_mass_and_momentum_conservation():
    c = cfg(t_max=1.0, snapshot_times=(0.5,))
    q0 = c.initial(lambda x: 0.3 / np.cosh(x) * np.exp(0.5j * x))
    res = pde.run(q0, c)
    assert len(res) == 2 and res.steps == 1000
    assert res.mass_drift < 1e-8
    assert res.momentum_drift < 1e-6
    assert [row[0] for row in res.table] == [0.5, 1.0]


def test_reversibility():
    c = cfg(t_max=0.5)
    q0 = sol(c)
    q1 = pde.run(q0, c).at(0.5)
    back = pde.run(q1, cfg(t_max=-0.5, tail_tol=1e-8)).at(-0.5)
    assert np.max(np.abs(back.samples - q0.samples)) < 1e-7


def test_backward_run_matches_exact_solution():
    c = cfg(t_max=-0.3, snapshot_times=(-0.1,), scheme="triple-jump")
    res = pde.run(sol(c), c)
    assert [t for t, _ in res] == [-0.1, -0.3]
    assert err(c, res.at(-0.3), -0.3) < 1e-7


# --- failure modes ---------------------------------------------------------------


def test_blowup_is_detected():
    c = cfg(dt=0.5, t_max=50.0, cfl=1e6, check_every=1)
    with pytest.raises(BlowUp):
        pde.run(c.initial(lambda x: 4 / np.cosh(2 * x)), c)


def test_insufficient_grid():
    c = cfg()
    with pytest.raises(InsufficientGrid):
        pde.run(c.initial(lambda x: np.exp(-(x / 20) ** 2)), c)


def test_grid_and_cfl_checks():
    c = cfg()
    other = cfg(n_modes=512)
    with pytest.raises(ValueError, match="solver grid"):
        pde.run(sol(other), c)
    with pytest.raises(ValueError, match="exceeds"):
        pde.run(sol(cfg(dt=1.0)), cfg(dt=1.0))


@pytest.mark.parametrize("kw", [dict(n_modes=1000), dict(n_modes=128), dict(dt=0.0), dict(scheme="euler"),
                                dict(snapshot_times=(0.2, 0.1)), dict(domain_half_width=-1)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        cfg(**kw)


# --- snapshots ---------------------------------------------------------------------


def test_snapshot_writer_roundtrip(tmp_path):
    c = cfg(t_max=0.05, snapshot_times=(0.0, 0.01, 0.02))
    with pde.SnapshotWriter(tmp_path) as w:
        res = pde.run(sol(c), c, sink=w)
    back = pde.read_snapshots(tmp_path)
    assert [t for t, _ in back] == [0.0, 0.01, 0.02, 0.05]
    for (t1, q1), (t2, q2) in zip(res, back):
        assert t1 == t2 and np.array_equal(q1.samples, q2.samples)
    with open(tmp_path / "index.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["t", "mass", "sup_norm", "file"]
    assert float(rows[-1]["sup_norm"]) == pytest.approx(2 * P.eta, rel=1e-3)
    assert float(rows[0]["mass"]) == pytest.approx(4 * P.eta, rel=1e-10)
