"""Direct scattering for the AKNS operator Phi_x + i z [sigma3, Phi] = Q Phi.

Conventions (used consistently across the package):

* ``Psi = Phi exp(-i z x sigma3)``; the left/right Jost solutions satisfy
  ``Phi_-(x) -> I`` as x -> -inf and ``Phi_+(x) -> I`` as x -> +inf.
* ``S = exp(i z x sigma3) Phi_+^{-1} Phi_- exp(-i z x sigma3)``, independent of x.
  Wronskians are taken at the grid node nearest x = 0.
* Columns Phi_{-,1} and Phi_{+,2} are analytic in the upper half-plane; for
  Im z > 0 only those two columns (and s11) are meaningful.
* Norming constant ``c_k = b_k / s11'(z_k)`` with ``Psi_{-,1} = b_k Psi_{+,2}``.
  This makes ``Res_{z_k} M_1 = c_k exp(2 i z_k x) M_2`` for
  ``M = (Phi_{-,1}/s11, Phi_{+,2})``.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import (Degeneracy, InconsistentCount, NonGenericPotential,
                     NumericalFailure)
from .potential import Potential

# r(z, t) = r(z) exp(i k (4 beta z^3 + 2 alpha z^2) t).  k = 2 matches the
# x-phase of this Lax pair (and the PDE round trip); k = 1 is kept for comparison.
TIME_PHASE_FACTORS = {"double": 2.0, "single": 1.0}
DEFAULT_CONVENTION = "double"

S11_MIN = 1e-8


@dataclass(frozen=True)
class JostEvaluation:
    """Normalized Jost matrix at one (x, z).

    For Im z > 0 only the analytic column (first for Phi_-, second for Phi_+) is
    trustworthy; the other column is kept for completeness.
    """

    x: float
    z: complex
    m: np.ndarray

    @property
    def det(self) -> complex:
        m = self.m
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


@dataclass(frozen=True)
class ScatteringMatrixValue:
    z: complex
    s11: complex
    s12: complex
    s21: complex
    s22: complex

    @property
    def det(self) -> complex:
        return self.s11 * self.s22 - self.s12 * self.s21

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.s11, self.s12], [self.s21, self.s22]])


@dataclass(frozen=True, eq=False)
class ScatteringData:
    """Reflection coefficient samples plus bound states (z_k, c_k)."""

    zgrid: np.ndarray
    r: np.ndarray
    bound_states: tuple = ()
    alpha: float = 1.0
    beta: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        zg = np.asarray(self.zgrid, dtype=float).reshape(-1)
        r = np.asarray(self.r, dtype=np.complex128).reshape(-1)
        if zg.shape != r.shape:
            raise ValueError("zgrid and r must have the same length")
        if zg.size > 1 and np.any(np.diff(zg) <= 0):
            raise ValueError("zgrid must be strictly increasing")
        if not np.all(np.isfinite(r)):
            raise ValueError("reflection coefficient must be finite on the grid")
        bs = tuple((complex(zk), complex(ck)) for zk, ck in self.bound_states)
        for zk, ck in bs:
            if not zk.imag > 0:
                raise ValueError(f"bound state {zk} is not in the upper half-plane")
            if ck == 0:
                raise ValueError(f"norming constant at {zk} vanishes")
        object.__setattr__(self, "zgrid", zg)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "bound_states", bs)
        object.__setattr__(self, "meta", {k: v for k, v in self.meta.items() if not k.startswith("_")})

    def _splines(self):
        sp = self.meta.get("_splines")
        if sp is None:
            from scipy.interpolate import CubicSpline

            zg = self.zgrid
            sp = (CubicSpline(zg, self.r.real), CubicSpline(zg, self.r.imag),
                  CubicSpline(zg, np.log1p(np.abs(self.r) ** 2)))
            self.meta["_splines"] = sp
        return sp

    def r_at(self, s):
        """Reflection coefficient at arbitrary real points (cubic spline, zero outside the grid)."""
        s = np.asarray(s, dtype=float)
        re, im, _ = self._splines()
        out = re(s) + 1j * im(s)
        return np.where((s < self.zgrid[0]) | (s > self.zgrid[-1]), 0.0, out)

    def log1p_r2_at(self, s):
        """log(1 + |r|^2) at arbitrary real points, spline-interpolated."""
        s = np.asarray(s, dtype=float)
        v = np.maximum(self._splines()[2](s), 0.0)
        return np.where((s < self.zgrid[0]) | (s > self.zgrid[-1]), 0.0, v)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.trapezoid(np.abs(self.r) ** 2, self.zgrid)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.r))) if self.r.size else 0.0

    def to_dict(self) -> dict:
        inter = np.empty(2 * self.r.size)
        inter[0::2] = self.r.real
        inter[1::2] = self.r.imag
        return {
            "kind": "scattering_data",
            "alpha": self.alpha,
            "beta": self.beta,
            "zgrid": self.zgrid.tolist(),
            "r": inter.tolist(),
            "bound_states": [{"z": [zk.real, zk.imag], "c": [ck.real, ck.imag]}
                             for zk, ck in self.bound_states],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScatteringData":
        a = np.asarray(d["r"], dtype=float)
        bs = [(complex(*b["z"]), complex(*b["c"])) for b in d.get("bound_states", [])]
        return cls(np.asarray(d["zgrid"]), a[0::2] + 1j * a[1::2], tuple(bs),
                   float(d.get("alpha", 1.0)), float(d.get("beta", 0.0)))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z", "re_r", "im_r", "abs_r"])
            for zz, rr in zip(self.zgrid, self.r):
                w.writerow([f"{zz:.17g}", f"{rr.real:.17g}", f"{rr.imag:.17g}", f"{abs(rr):.17g}"])


# ---------------------------------------------------------------------------
# sweeps


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HIROTA_THREADS", "1")))
    except ValueError:
        return 1


def _run_sweep(qn, qm, h, z, trace=False):
    z = np.array(np.atleast_1d(z), dtype=np.complex128)
    # the compiled kernel needs writable buffers
    qn = np.array(qn, dtype=np.complex128)
    qm = np.array(qm, dtype=np.complex128)
    phi0 = np.tile(np.eye(2, dtype=np.complex128), (z.size, 1, 1))
    nthreads = _threads()
    with np.errstate(over="ignore", invalid="ignore"):
        if nthreads == 1 or z.size < 2 * nthreads:
            phi, tr = _kernels.magnus_sweep(qn, qm, h, z, phi0, trace)
        else:
            chunks = np.array_split(np.arange(z.size), nthreads)
            with ThreadPoolExecutor(nthreads) as ex:
                parts = list(ex.map(lambda idx: _kernels.magnus_sweep(qn, qm, h, z[idx], phi0[idx], trace),
                                    chunks))
            phi = np.concatenate([p[0] for p in parts], axis=0)
            tr = np.concatenate([p[1] for p in parts], axis=1) if trace else None
    return phi, tr


def _match_index(q: Potential, x_match: float) -> int:
    return int(np.clip(np.rint((x_match - q.x0) / q.dx), 0, q.n - 1))


def _left(q: Potential, z, upto: int, trace=False, mids=None):
    mids = q.midpoints() if mids is None else mids
    return _run_sweep(q.samples[: upto + 1], mids[:upto], q.dx, z, trace)


def _right(q: Potential, z, downto: int, trace=False, mids=None):
    mids = q.midpoints() if mids is None else mids
    phi, tr = _run_sweep(q.samples[downto:][::-1], mids[downto:][::-1], -q.dx, z, trace)
    if tr is not None:
        tr = tr[::-1]
    return phi, tr


def _check(phi, what):
    bad = ~np.isfinite(phi).all(axis=(1, 2))
    if np.any(bad):
        raise NumericalFailure(f"{what}: non-finite Jost values", {"n_bad": int(bad.sum())})


def jost_minus(q: Potential, z: complex, trace: bool = False):
    """Phi_-(x; z) at the right grid edge, integrated from Phi = I at the left edge.

    With ``trace=True`` also returns the (n, 2, 2) array of values at every node.
    """
    phi, tr = _left(q, [z], q.n - 1, trace)
    if not np.isfinite(phi[0][:, 0]).all():
        raise NumericalFailure("jost_minus: integration produced non-finite values", {"z": z})
    ev = JostEvaluation(q.x_end, complex(z), phi[0])
    return (ev, tr[:, 0]) if trace else ev


def jost_plus(q: Potential, z: complex, trace: bool = False):
    """Phi_+(x; z) at the left grid edge, integrated from Phi = I at the right edge."""
    phi, tr = _right(q, [z], 0, trace)
    if not np.isfinite(phi[0][:, 1]).all():
        raise NumericalFailure("jost_plus: integration produced non-finite values", {"z": z})
    ev = JostEvaluation(q.x0, complex(z), phi[0])
    return (ev, tr[:, 0]) if trace else ev


def analytic_columns(q: Potential, z: complex):
    """Phi_{-,1}(x, z) and Phi_{+,2}(x, z) at every grid node, shape (n, 2) each."""
    mids = q.midpoints()
    _, trl = _left(q, [z], q.n - 1, True, mids)
    _, trr = _right(q, [z], 0, True, mids)
    return trl[:, 0, :, 0], trr[:, 0, :, 1]


def scattering_coefficients(q: Potential, z, x_match: float = 0.0):
    """Vectorized s11, s12, s21, s22 on an array of z (see module docstring)."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    j0 = _match_index(q, x_match)
    xm = q.x0 + j0 * q.dx
    mids = q.midpoints()
    pm, _ = _left(q, z, j0, mids=mids)
    pp, _ = _right(q, z, j0, mids=mids)
    s11 = pm[:, 0, 0] * pp[:, 1, 1] - pm[:, 1, 0] * pp[:, 0, 1]
    s22 = pp[:, 0, 0] * pm[:, 1, 1] - pp[:, 1, 0] * pm[:, 0, 1]
    w21 = pp[:, 0, 0] * pm[:, 1, 0] - pp[:, 1, 0] * pm[:, 0, 0]
    w12 = pp[:, 1, 1] * pm[:, 0, 1] - pp[:, 0, 1] * pm[:, 1, 1]
    ph = np.exp(2j * z * xm)
    with np.errstate(over="ignore", invalid="ignore"):
        return s11, w12 * ph, w21 / ph, s22


def scattering_matrix(q: Potential, z: complex, x_match: float = 0.0) -> ScatteringMatrixValue:
    s11, s12, s21, s22 = scattering_coefficients(q, [z], x_match)
    return ScatteringMatrixValue(complex(z), complex(s11[0]), complex(s12[0]),
                                 complex(s21[0]), complex(s22[0]))


def reflection_coefficient(q: Potential, zgrid, alpha: float = 1.0, beta: float = 0.0,
                           s11_min: float = S11_MIN) -> ScatteringData:
    """r = s21/s11 on a real grid; bound states are left empty."""
    zgrid = np.asarray(zgrid, dtype=float)
    s11, _, s21, _ = scattering_coefficients(q, zgrid)
    a = np.abs(s11)
    if np.any(a < s11_min):
        k = int(np.argmin(a))
        raise NonGenericPotential(float(zgrid[k]), complex(s11[k]))
    return ScatteringData(zgrid, s21 / s11, (), alpha, beta)


# ---------------------------------------------------------------------------
# bound states


def s11(q: Potential, z, x_match: float = 0.0):
    """s11 alone (valid on the closed upper half-plane)."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    j0 = _match_index(q, x_match)
    mids = q.midpoints()
    pm, _ = _left(q, z, j0, mids=mids)
    pp, _ = _right(q, z, j0, mids=mids)
    return pm[:, 0, 0] * pp[:, 1, 1] - pm[:, 1, 0] * pp[:, 0, 1]


def _s11_and_derivative(q, z, h):
    # analytic 4-point stencil: error O(h^4)
    pts = np.concatenate([z, z + h, z - h, z + 1j * h, z - 1j * h])
    v = s11(q, pts)
    m = z.size
    f0, fp, fm, fi, fmi = (v[k * m:(k + 1) * m] for k in range(5))
    return f0, (fp - fm - 1j * (fi - fmi)) / (4 * h)


def _box_contour(box, n_side):
    xa, xb, ya, yb = box
    t = np.linspace(0.0, 1.0, n_side, endpoint=False)
    bottom = xa + (xb - xa) * t + 1j * ya
    right = xb + 1j * (ya + (yb - ya) * t)
    top = xb - (xb - xa) * t + 1j * yb
    left = xa + 1j * (yb - (yb - ya) * t)
    return np.concatenate([bottom, right, top, left, [xa + 1j * ya]])


def _contour_samples(q, box, n_side=64, max_points=20000):
    """Sample s11 around the box, refining until successive phase steps are < pi/4."""
    zc = _box_contour(box, n_side)
    f = s11(q, zc)
    while True:
        dphi = np.abs(np.angle(f[1:] / f[:-1]))
        bad = np.nonzero(dphi > np.pi / 4)[0]
        if bad.size == 0:
            return zc, f
        if zc.size + bad.size > max_points:
            raise NumericalFailure("argument-principle contour refinement did not converge",
                                   {"points": zc.size, "box": box})
        znew = 0.5 * (zc[bad] + zc[bad + 1])
        fnew = s11(q, znew)
        zc = np.insert(zc, bad + 1, znew)
        f = np.insert(f, bad + 1, fnew)


def count_zeros(q: Potential, box) -> int:
    """Number of zeros of s11 inside ``box = (re_min, re_max, im_min, im_max)``."""
    _, f = _contour_samples(q, box)
    if np.min(np.abs(f)) < S11_MIN:
        raise Degeneracy("s11 (nearly) vanishes on the search contour")
    return int(np.rint(np.sum(np.angle(f[1:] / f[:-1])) / (2 * np.pi)))


def _initial_guesses(q, box, depth=0):
    zc, f = _contour_samples(q, box)
    dlog = np.log(np.abs(f[1:] / f[:-1])) + 1j * np.angle(f[1:] / f[:-1])
    count = int(np.rint(np.sum(dlog.imag) / (2 * np.pi)))
    if count <= 0:
        return []
    xa, xb, ya, yb = box
    if count > 4 and depth < 6:
        xm, ym = 0.5 * (xa + xb), 0.5 * (ya + yb)
        out = []
        for sub in ((xa, xm, ya, ym), (xm, xb, ya, ym), (xa, xm, ym, yb), (xm, xb, ym, yb)):
            out.extend(_initial_guesses(q, sub, depth + 1))
        return out
    zm = 0.5 * (zc[1:] + zc[:-1])
    # power sums of the zeros, then Newton's identities
    p = [np.sum(zm ** k * dlog) / (2j * np.pi) for k in range(1, count + 1)]
    e = [1.0 + 0j]
    for k in range(1, count + 1):
        e.append(sum((-1) ** (i - 1) * e[k - i] * p[i - 1] for i in range(1, k + 1)) / k)
    coeffs = [(-1) ** k * e[k] for k in range(count + 1)]
    return list(np.roots(coeffs))


def _default_box(q: Potential, zgrid=None, height=None, floor=1e-3):
    if zgrid is not None and len(zgrid) > 1:
        xa, xb = float(np.min(zgrid)), float(np.max(zgrid))
    else:
        xa, xb = -4.0, 4.0
    if height is None:
        height = q.max_abs() + 0.5
    return (xa, xb, floor, float(height))


def find_bound_states(q: Potential, box=None, *, zgrid=None, tol=1e-12, max_iter=60,
                      deriv_step=1e-3, deriv_min=1e-10, x_match: float = 0.0):
    """Zeros z_k of s11 in the box with norming constants c_k = b_k / s11'(z_k).

    The zero count comes from the argument principle on the box boundary; the
    contour moments give starting points that Newton's method refines.
    """
    if box is None:
        box = _default_box(q, zgrid)
    xa, xb, ya, yb = box
    n_expected = count_zeros(q, box)
    if n_expected == 0:
        return []
    guesses = np.array(_initial_guesses(q, box), dtype=np.complex128)
    roots = []
    for z0 in guesses:
        z = np.array([z0])
        for _ in range(max_iter):
            f, df = _s11_and_derivative(q, z, deriv_step)
            step = f / df
            z = z - step
            if abs(step[0]) < tol * max(1.0, abs(z[0])):
                break
        zk = complex(z[0])
        if xa <= zk.real <= xb and ya <= zk.imag <= yb and np.isfinite(zk):
            if all(abs(zk - r) > 1e-8 for r in roots):
                roots.append(zk)
    if len(roots) != n_expected:
        raise InconsistentCount(
            f"argument principle counts {n_expected} zeros but Newton converged to {len(roots)}")
    out = []
    for zk in sorted(roots, key=lambda w: (w.real, w.imag)):
        _, ds = _s11_and_derivative(q, np.array([zk]), deriv_step)
        ds = complex(ds[0])
        if abs(ds) < deriv_min:
            raise Degeneracy(f"s11'({zk}) = {ds:.3e}: zero is not simple")
        out.append((zk, proportionality_constant(q, zk, x_match) / ds))
    return out


def proportionality_constant(q: Potential, zk: complex, x_match: float = 0.0) -> complex:
    """b with Psi_{-,1}(x, z_k) = b Psi_{+,2}(x, z_k), measured at the matching node."""
    j0 = _match_index(q, x_match)
    xm = q.x0 + j0 * q.dx
    mids = q.midpoints()
    pm, _ = _left(q, [zk], j0, mids=mids)
    pp, _ = _right(q, [zk], j0, mids=mids)
    a = pm[0, :, 0]
    b = pp[0, :, 1]
    ratio = np.vdot(b, a) / np.vdot(b, b)
    return complex(ratio * np.exp(-2j * zk * xm))


def scattering_data(q: Potential, zgrid, alpha: float = 1.0, beta: float = 0.0, box=None,
                    **kw) -> ScatteringData:
    """Reflection coefficient on ``zgrid`` together with the discrete spectrum."""
    d = reflection_coefficient(q, zgrid, alpha, beta)
    bs = find_bound_states(q, box, zgrid=zgrid, **kw)
    return replace(d, bound_states=tuple(bs))


# ---------------------------------------------------------------------------
# time evolution


def dispersion_phase(z, alpha, beta):
    """4 beta z^3 + 2 alpha z^2."""
    z = np.asarray(z)
    return 4.0 * beta * z ** 3 + 2.0 * alpha * z ** 2


def evolve_scattering(d: ScatteringData, t: float, convention: str = DEFAULT_CONVENTION) -> ScatteringData:
    """Scattering data at time t: r and every c_k pick up exp(i k (4 beta z^3 + 2 alpha z^2) t)."""
    k = TIME_PHASE_FACTORS[convention]
    r = d.r * np.exp(1j * k * dispersion_phase(d.zgrid, d.alpha, d.beta) * t)
    bs = tuple((zk, ck * np.exp(1j * k * dispersion_phase(zk, d.alpha, d.beta) * t))
               for zk, ck in d.bound_states)
    return replace(d, r=r, bound_states=bs)
