"""Long-time asymptotics: stationary points, the delta factor, parabolic-cylinder
constants, the t^{-1/2} dispersive profile and the phase-shifted soliton.

Phase convention: t theta(z) = z x + (2 alpha z^2 + 4 beta z^3) t, so
t theta'(z) = x + (4 alpha z + 12 beta z^2) t and t theta''(z_j) = 4 t (alpha + 6 beta z_j).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning
from scipy.integrate import quad as _scipy_quad

from .errors import (InsufficientGrid, NLSDegenerate, NoStationaryPoint, TooCloseToContour,
                     UnsupportedConfiguration)
from .scattering import ScatteringData
from .soliton import SolitonParams, _phase_and_arg

def quad(f, a, b, **kw):
    """scipy quad without round-off warnings (the integrands are spline-smooth, tolerances tight)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return _scipy_quad(f, a, b, **kw)


# ---------------------------------------------------------------------------
# complex Gamma (Lanczos, g = 7, nine terms; relative error ~1e-15 for Re z >= 1/2)

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993, 676.5203681218851, -1259.1392167224028, 771.32342877765313,
    -176.61502916214059, 12.507343278686905, -0.13857109526572012,
    9.9843695780195716e-6, 1.5056327351493116e-7,
)


def gamma(z: complex) -> complex:
    """Complex Gamma function via the Lanczos approximation and the reflection formula."""
    z = complex(z)
    if z.real < 0.5:
        return cmath.pi / (cmath.sin(cmath.pi * z) * gamma(1.0 - z))
    z -= 1.0
    a = _LANCZOS[0]
    tt = z + _LANCZOS_G + 0.5
    for k in range(1, len(_LANCZOS)):
        a += _LANCZOS[k] / (z + k)
    return math.sqrt(2 * math.pi) * tt ** (z + 0.5) * cmath.exp(-tt) * a


# ---------------------------------------------------------------------------
# stationary points


@dataclass(frozen=True)
class StationaryPair:
    z1: float
    z2: float

    def __post_init__(self):
        if self.z1 > self.z2:
            raise ValueError("need z1 <= z2")


def theta_prime(z, x, t, alpha, beta):
    """theta'(z) = x/t + 4 alpha z + 12 beta z^2."""
    return x / t + 4 * alpha * z + 12 * beta * z * z


def stationary_points(x: float, t: float, alpha: float, beta: float) -> StationaryPair:
    if t == 0:
        raise ValueError("t must be nonzero")
    if beta == 0:
        raise NLSDegenerate(f"beta = 0: single stationary point z = {-x / (4 * alpha * t):.6g}")
    disc = alpha * alpha - 3 * beta * x / t
    if disc < 0:
        raise NoStationaryPoint(f"alpha^2 - 3 beta x/t = {disc:.3e} < 0: no real stationary point")
    sq = math.sqrt(disc)
    # cancellation-free pair: product of roots is x/(12 beta t)
    big = (-alpha - math.copysign(sq, alpha if alpha != 0 else 1.0)) / (6 * beta)
    small = (x / (12 * beta * t)) / big if big != 0 else 0.0
    z1, z2 = sorted((big, small))
    return StationaryPair(z1, z2)


def _critical_points(x, t, alpha, beta):
    if beta == 0:
        if alpha == 0:
            raise NoStationaryPoint("alpha = beta = 0: no dispersion")
        return [-x / (4 * alpha * t)]
    p = stationary_points(x, t, alpha, beta)
    return [p.z1] if p.z1 == p.z2 else [p.z1, p.z2]


def negative_set(x, t, alpha, beta):
    """Intervals (a, b) (possibly infinite) where t theta'(s) < 0."""
    pts = _critical_points(x, t, alpha, beta)
    edges = [-math.inf] + pts + [math.inf]
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        if a == b:
            continue
        m = (a + b) / 2 if math.isfinite(a) and math.isfinite(b) else (b - 1 if math.isfinite(b) else a + 1)
        if t * theta_prime(m, x, t, alpha, beta) < 0:
            out.append((a, b))
    return out


# ---------------------------------------------------------------------------
# nu and delta


def nu_of(r):
    """nu = -(1/2 pi) log(1 + |r|^2)."""
    return -np.log1p(np.abs(r) ** 2) / (2 * np.pi)


def _cauchy(d: ScatteringData, a, b, z, tol=1e-12):
    """int_a^b log(1+|r(s)|^2)/(s - z) ds on the part of [a, b] covered by the grid."""
    a = max(a, d.zgrid[0])
    b = min(b, d.zgrid[-1])
    if b <= a:
        return 0j
    L = d.log1p_r2_at
    pts = [p for p in np.linspace(a, b, 9)[1:-1]]
    if a < z.real < b:
        pts.append(z.real)
    kw = dict(points=sorted(pts), limit=400, epsabs=tol, epsrel=tol)
    def den(s):
        return (s - z.real) ** 2 + z.imag ** 2

    # the integrands vanish at a node that sits exactly on z (principal value)
    re = quad(lambda s: float(L(s)) * (s - z.real) / den(s) if den(s) else 0.0, a, b, **kw)[0]
    im = quad(lambda s: float(L(s)) * z.imag / den(s) if den(s) else 0.0, a, b, **kw)[0]
    return complex(re, im)


def delta_fn(d: ScatteringData, z1: float, z2: float, z: complex, eps: float = 1e-8) -> complex:
    """delta(z) = exp(i int_{z1}^{z2} nu(s)/(s - z) ds) for z off [z1, z2]."""
    z = complex(z)
    dist = abs(z.imag) if z1 <= z.real <= z2 else min(abs(z - z1), abs(z - z2))
    if dist < eps:
        raise TooCloseToContour(f"z = {z} is within {eps:g} of [{z1:.6g}, {z2:.6g}]")
    return cmath.exp(_cauchy(d, z1, z2, z) / (2j * math.pi))


def delta_bound(d: ScatteringData) -> float:
    """<rho> = sqrt(1 + sup|r|^2): |delta| lies in [1/<rho>, <rho>]."""
    return math.sqrt(1 + d.sup_norm() ** 2)


@dataclass(frozen=True)
class PoleFactor:
    value: complex
    tail_bound: float


def nu_at_pole(d: ScatteringData, z_s: complex, side: str = "plus", tail_tol: float = 1e-6,
               full: bool = False):
    """exp((1/2 pi i) int log(1+|r|^2)/(s - z_s) ds) over (-inf, Re z_s] (plus) or [Re z_s, inf) (minus).

    The integral is truncated at the grid edge; the omitted tail is bounded by
    log(1 + |r_edge|^2) * (pi/2) / (2 pi) per unit Im z_s, assuming |r| is monotone beyond the grid.
    """
    z_s = complex(z_s)
    if not z_s.imag > 0:
        raise ValueError("z_s must lie in the upper half-plane")
    if side == "plus":
        a, b = -math.inf, z_s.real
        edge = abs(d.r[0]) if d.r.size else 0.0
    elif side == "minus":
        a, b = z_s.real, math.inf
        edge = abs(d.r[-1]) if d.r.size else 0.0
    else:
        raise ValueError("side must be 'plus' or 'minus'")
    tail = math.log1p(edge ** 2) / (2 * math.pi) * (math.pi / 2 + abs(math.log(max(z_s.imag, 1e-300)))) \
        if edge > 0 else 0.0
    if tail > tail_tol:
        raise InsufficientGrid(f"reflection coefficient tail bound {tail:.2e} exceeds {tail_tol:g}")
    v = cmath.exp(_cauchy(d, a, b, z_s) / (2j * math.pi)) if d.r.size else 1 + 0j
    return PoleFactor(v, tail) if full else v


# ---------------------------------------------------------------------------
# parabolic-cylinder constants


@dataclass(frozen=True)
class PcConstants:
    kappa: float
    beta12: complex
    beta21: complex


def pc_constants(r0: complex) -> PcConstants:
    """kappa = -(1/2 pi) log(1+|r0|^2) and the off-diagonal model constants.

    beta12 = sqrt(2 pi) e^{i pi/4} e^{-pi kappa/2} / (r0 Gamma(-i kappa)),
    beta21 = -sqrt(2 pi) e^{-i pi/4} e^{-pi kappa/2} / (conj(r0) Gamma(i kappa)) = kappa / beta12.
    """
    r0 = complex(r0)
    if r0 == 0:
        return PcConstants(0.0, 0j, 0j)
    kappa = -math.log1p(abs(r0) ** 2) / (2 * math.pi)
    s = math.sqrt(2 * math.pi) * math.exp(-math.pi * kappa / 2)
    b12 = s * cmath.exp(0.25j * math.pi) / (r0 * gamma(-1j * kappa))
    b21 = -s * cmath.exp(-0.25j * math.pi) / (r0.conjugate() * gamma(1j * kappa))
    return PcConstants(kappa, b12, b21)


# ---------------------------------------------------------------------------
# dispersive profile


@dataclass
class AsymptoticProfile:
    """Leading-order prediction of q on a set of (x, t) samples."""

    x: np.ndarray
    t: np.ndarray
    values: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict)

    def rows(self):
        for x, t, v in zip(self.x, self.t, self.values):
            yield float(x), float(t), abs(v), cmath.phase(v)


def _stationary_term(d, x, t, zj, pieces):
    alpha, beta = d.alpha, d.beta
    a = alpha + 6 * beta * zj
    if a == 0:
        return 0j
    rj = complex(d.r_at(zj))
    if rj == 0:
        return 0j
    Lj = math.log1p(abs(rj) ** 2)
    kappa = -Lj / (2 * math.pi)
    s = 1.0 if t * a > 0 else -1.0
    scale = 8 * abs(t * a)
    tth = zj * x + (2 * alpha * zj ** 2 + 4 * beta * zj ** 3) * t
    lin = -(2 / math.sqrt(2 * math.pi)) * rj.conjugate() * cmath.exp(-2j * tth) \
        * cmath.exp(-0.25j * math.pi * s) / math.sqrt(scale)
    # U_j: Cauchy transform of log(1+|r|^2) over the negative set, with the
    # logarithmic singularity at z_j removed on an adjacent window W of length <= 1
    integral = 0j
    fp = 0.0
    zc = complex(zj, 0.0)
    for lo, hi in pieces:
        if abs(hi - zj) < 1e-14 * max(1, abs(zj)):  # piece ends at z_j: window to the left
            ell = min(1.0, hi - lo)
            w_lo, w_hi = zj - ell, zj
            fp = -math.log(ell)
        elif abs(lo - zj) < 1e-14 * max(1, abs(zj)):
            ell = min(1.0, hi - lo)
            w_lo, w_hi = zj, zj + ell
            fp = math.log(ell)
        else:
            integral += _cauchy(d, lo, hi, zc + 1e-300j)
            continue
        g = lambda u: (float(d.log1p_r2_at(u)) - Lj) / (u - zj) if u != zj else 0.0
        integral += quad(g, w_lo, w_hi, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
        if w_lo > lo:
            integral += _cauchy(d, lo, w_lo, zc + 1e-300j)
        if w_hi < hi:
            integral += _cauchy(d, w_hi, hi, zc + 1e-300j)
    U = cmath.exp((integral + Lj * fp) / (2j * math.pi))
    r2 = math.expm1(-2 * math.pi * kappa)
    F = -2j * math.pi * math.exp(-math.pi * kappa / 2) / (r2 * gamma(-1j * kappa))
    if s > 0:
        G = F * U * U * scale ** (-1j * kappa)
    else:
        G = F.conjugate() * U * U * scale ** (1j * kappa)
    return lin * G


def dispersive_leading_term(d: ScatteringData, x: float, t: float) -> complex:
    """Order t^{-1/2} prediction of q(x, t) for reflection-only data.

    Sum over the real stationary points of the parabolic-cylinder contribution;
    the higher-order remainder is not computed.
    """
    if d.bound_states:
        raise UnsupportedConfiguration("dispersive profile needs data without bound states")
    if t == 0:
        raise ValueError("t must be nonzero")
    pieces = negative_set(x, t, d.alpha, d.beta)
    total = 0j
    for zj in _critical_points(x, t, d.alpha, d.beta):
        total += _stationary_term(d, x, t, zj, pieces)
    return total


def dispersive_profile(d: ScatteringData, x, t) -> AsymptoticProfile:
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    vals = np.array([dispersive_leading_term(d, xx, tt) for xx, tt in zip(x.ravel(), t.ravel())])
    return AsymptoticProfile(x.ravel(), t.ravel(), vals, "dispersive",
                             {"order": "t^-1/2", "remainder": "not computed"})


# ---------------------------------------------------------------------------
# soliton with radiation-induced shift


def _single_bound_state(d: ScatteringData):
    if len(d.bound_states) != 1:
        raise UnsupportedConfiguration(f"need exactly one bound state, got {len(d.bound_states)}")
    return d.bound_states[0][0]


SHIFT_FORMULAS = ("half-line", "negative-set")


def soliton_shift(p: SolitonParams, d: ScatteringData, time_sign: str = "plus",
                  formula: str = "half-line") -> float:
    """Radiation-induced displacement of the soliton relative to the one encoded by (z_s, c_s).

    half-line:    log|nu(z_s)|/(2 eta) for t -> +inf, log|Lambda(z_s)|/(2 eta) for t -> -inf
                  (Cauchy integral of log(1+|r|^2) over (-inf, Re z_s] or [Re z_s, inf)).
    negative-set: -log|delta(z_s)|/eta, with delta built on {s : t theta'(s) < 0}
                  along the soliton ray x = v t.
    """
    if time_sign not in ("plus", "minus"):
        raise ValueError("time_sign must be 'plus' or 'minus'")
    z_s = _single_bound_state(d)
    if formula == "half-line":
        return math.log(abs(nu_at_pole(d, z_s, time_sign))) / (2 * p.eta)
    if formula == "negative-set":
        dz = delta_at_soliton(d, p, 1.0 if time_sign == "plus" else -1.0)
        return -math.log(abs(dz)) / p.eta
    raise ValueError(f"formula must be one of {SHIFT_FORMULAS}")


def asymptotic_soliton(p: SolitonParams, d: ScatteringData, x, t: float, time_sign: str = "plus",
                       formula: str = "half-line"):
    """Closed-form soliton translated by ``soliton_shift``.

    With the half-line formula the sech argument is shifted by log|nu(z_s)|
    (log|Lambda(z_s)| for time_sign="minus").
    """
    shift = soliton_shift(p, d, time_sign, formula)
    phase, arg = _phase_and_arg(p, x, t)
    out = 2 * p.eta * np.exp(1j * phase) / np.cosh(arg + 2 * p.eta * shift)
    return complex(out) if np.ndim(out) == 0 else out


def delta_at_soliton(d: ScatteringData, p: SolitonParams, t_sign: float = 1.0) -> complex:
    """delta(z_s) over the negative set of the soliton ray x = v t."""
    from .soliton import soliton_velocity

    z_s = _single_bound_state(d)
    v = soliton_velocity(p)
    total = 0j
    for lo, hi in negative_set(v * t_sign, t_sign, d.alpha, d.beta):
        total += _cauchy(d, lo, hi, complex(z_s))
    return cmath.exp(total / (2j * math.pi))
