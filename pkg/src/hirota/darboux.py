"""Adding and removing a bound state: Blaschke twists of r and the rank-one potential update.

For a seed with RH-normalized matrix M(x, z) = (Phi_{-,1}/s11, Phi_{+,2}) the new
potential with an extra bound state (z_s, c) is

    q_new = q + B,   B = -2i (z_s - conj z_s) f1 conj(f2) / (|f1|^2 + |f2|^2),
    f = exp(-i phi) M_1(x, z_s) - c / (z_s - conj z_s) * exp(i phi) M_2(x, z_s),

with phi = z_s x + (2 alpha z_s^2 + 4 beta z_s^3) t.  The constant c is the
norming constant of the new bound state at t = 0 (see ``scattering``).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import scattering as sc
from .errors import BoundStateNotFound, Degeneracy
from .potential import Potential
from .scattering import ScatteringData, TIME_PHASE_FACTORS, DEFAULT_CONVENTION


@dataclass(frozen=True)
class DressingPair:
    z_s: complex
    c1: complex

    def __post_init__(self):
        object.__setattr__(self, "z_s", complex(self.z_s))
        object.__setattr__(self, "c1", complex(self.c1))
        if not self.z_s.imag > 0:
            raise ValueError(f"z_s must lie in the upper half-plane, got {self.z_s}")
        if self.c1 == 0:
            raise ValueError("c1 must be nonzero")

    @classmethod
    def for_soliton(cls, p) -> "DressingPair":
        """Pair whose dressing of q = 0 is the closed-form soliton with params p."""
        z = p.z
        return cls(z, -2j * p.eta * np.exp(-1j * p.gamma - 2j * z * p.x_off))


# ---------------------------------------------------------------------------
# reflection data


def blaschke(z, z_s):
    """(z - conj z_s) / (z - z_s); unimodular on the real axis."""
    return (z - np.conj(z_s)) / (z - z_s)


def twist_reflection(d: ScatteringData, z_s: complex, direction: str = "add", c=None,
                     match_tol: float = 1e-8) -> ScatteringData:
    """Scattering data after adding/removing the bound state z_s.

    add:    r -> r (z - conj z_s)/(z - z_s), other c_k -> c_k (z_k - conj z_s)/(z_k - z_s),
            (z_s, c) appended.
    remove: the inverse; raises BoundStateNotFound if z_s is not listed.
    """
    z_s = complex(z_s)
    if direction == "add":
        if c is None:
            raise ValueError("adding a bound state needs its norming constant")
        r = d.r * blaschke(d.zgrid, z_s)
        bs = [(zk, ck * blaschke(zk, z_s)) for zk, ck in d.bound_states] + [(z_s, complex(c))]
    elif direction == "remove":
        hit = [k for k, (zk, _) in enumerate(d.bound_states) if abs(zk - z_s) <= match_tol * max(1, abs(z_s))]
        if not hit:
            raise BoundStateNotFound(z_s)
        r = d.r / blaschke(d.zgrid, z_s)
        bs = [(zk, ck / blaschke(zk, z_s)) for k, (zk, ck) in enumerate(d.bound_states) if k != hit[0]]
    else:
        raise ValueError(f"direction must be 'add' or 'remove', got {direction!r}")
    return replace(d, r=r, bound_states=tuple(bs))


# ---------------------------------------------------------------------------
# seeds


def zero_seed_supplier(n: int):
    """M = I for q = 0."""

    def supply(z):
        m1 = np.zeros((n, 2), dtype=np.complex128)
        m2 = np.zeros((n, 2), dtype=np.complex128)
        m1[:, 0] = 1.0
        m2[:, 1] = 1.0
        return m1, m2

    return supply


def numerical_supplier(q: Potential):
    """M(x, z) from numerically integrated Jost columns of q."""

    def supply(z):
        a, b = sc.analytic_columns(q, z)
        s = complex(sc.s11(q, [z])[0])
        if abs(s) < sc.S11_MIN:
            raise Degeneracy(f"{z} is already (nearly) a bound state of the seed")
        return a / s, b

    return supply


def _time_phase(z, t, alpha, beta, convention):
    return 0.5 * TIME_PHASE_FACTORS[convention] * sc.dispersion_phase(z, alpha, beta) * t


def _correction(m1, m2, z, c, x, t, alpha, beta, convention, tiny=1e-280):
    phi = z * np.asarray(x) + _time_phase(z, t, alpha, beta, convention)
    g = -c / (z - np.conj(z))
    # f is only needed up to a scalar factor: scale by whichever exponential is small
    e2 = np.exp(np.clip((2j * phi).real, -700, 700) + 1j * (2j * phi).imag)
    big = np.abs(e2) > 1.0
    w1 = np.where(big, 1.0 / e2, 1.0)
    w2 = np.where(big, 1.0, e2)
    f1 = w1 * m1[..., 0] + g * w2 * m2[..., 0]
    f2 = w1 * m1[..., 1] + g * w2 * m2[..., 1]
    nrm = np.abs(f1) ** 2 + np.abs(f2) ** 2
    if np.any(~np.isfinite(nrm)) or np.any(nrm < tiny):
        raise Degeneracy("dressing vector vanishes or overflows")
    return -2j * (z - np.conj(z)) * f1 * np.conj(f2) / nrm, nrm


def add_bound_state(q: Potential, d: DressingPair, jost_supplier=None, t: float = 0.0,
                    alpha: float = 1.0, beta: float = 0.0,
                    convention: str = DEFAULT_CONVENTION) -> Potential:
    """Seed q (sampled at time t) dressed with the bound state d.

    ``jost_supplier(z) -> (M1, M2)`` returns the two columns of the normalized
    seed solution at every grid node, each of shape (n, 2).  Defaults to the
    numerical supplier, or the closed form when q vanishes identically.
    """
    if jost_supplier is None:
        jost_supplier = zero_seed_supplier(q.n) if not np.any(q.samples) else numerical_supplier(q)
    m1, m2 = jost_supplier(d.z_s)
    B, _ = _correction(m1, m2, d.z_s, d.c1, q.x, t, alpha, beta, convention)
    return q.with_samples(q.samples + B)


def dressing_determinant(q: Potential, d: DressingPair, jost_supplier=None, t=0.0, alpha=1.0,
                         beta=0.0, convention=DEFAULT_CONVENTION):
    """|f1|^2 + |f2|^2 (up to a positive scalar per x); positive wherever dressing is defined."""
    if jost_supplier is None:
        jost_supplier = zero_seed_supplier(q.n) if not np.any(q.samples) else numerical_supplier(q)
    m1, m2 = jost_supplier(d.z_s)
    return _correction(m1, m2, d.z_s, d.c1, q.x, t, alpha, beta, convention)[1]


def backlund_B(m, d: DressingPair, x, t: float = 0.0, alpha: float = 1.0, beta: float = 0.0,
               convention: str = DEFAULT_CONVENTION):
    """Soliton-extraction term at (x, t) from the normalized matrix m at z_s.

    ``m`` is a JostEvaluation, a 2x2 array, or an (n, 2, 2) stack matching x.
    With m = I this is exactly the closed-form soliton for the pair d.
    """
    m = np.asarray(getattr(m, "m", m), dtype=np.complex128)
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if m.ndim == 2:
        m = np.broadcast_to(m, (x.size, 2, 2))
    B, _ = _correction(m[:, :, 0], m[:, :, 1], d.z_s, d.c1, x, t, alpha, beta, convention)
    return complex(B[0]) if scalar else B
