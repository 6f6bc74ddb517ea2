"""One-soliton family of the Hirota equation and modulated-soliton fitting.

    q(x, t) = 2 eta exp(2i(-xi X - 4 beta xi^3 t - 2 alpha xi^2 t + 12 beta xi eta^2 t
                           + 2 alpha eta^2 t) + i gamma)
              * sech(-2 eta X - 24 beta eta xi^2 t + 8 beta eta^3 t - 8 alpha eta xi t),

with X = x - x_off, for  i q_t + alpha (2|q|^2 q + q_xx) + i beta (q_xxx + 6|q|^2 q_x) = 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from .errors import AmbiguousFitWarning, FitFailure
from .potential import Potential


def wrap_phase(g: float) -> float:
    """Principal value in (-pi, pi]."""
    g = math.remainder(float(g), 2 * math.pi)
    return math.pi if g <= -math.pi else g


@dataclass(frozen=True)
class SolitonParams:
    eta: float
    xi: float = 0.0
    gamma: float = 0.0
    alpha: float = 1.0
    beta: float = 0.0
    x_off: float = 0.0

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        for name in ("eta", "xi", "alpha", "beta", "x_off"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "gamma", wrap_phase(self.gamma))

    @property
    def z(self) -> complex:
        """Spectral parameter xi + i eta of the associated bound state."""
        return complex(self.xi, self.eta)

    @property
    def amplitude(self) -> float:
        return 2.0 * self.eta

    def to_dict(self) -> dict:
        return {"kind": "soliton_params", **asdict(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "SolitonParams":
        return cls(**{k: d[k] for k in ("eta", "xi", "gamma", "alpha", "beta", "x_off") if k in d})


def _phase_and_arg(p: SolitonParams, x, t):
    X = np.asarray(x, dtype=float) - p.x_off
    e, s, a, b = p.eta, p.xi, p.alpha, p.beta
    phase = 2.0 * (-s * X - 4 * b * s ** 3 * t - 2 * a * s ** 2 * t + 12 * b * s * e ** 2 * t
                   + 2 * a * e ** 2 * t) + p.gamma
    arg = -2 * e * X - 24 * b * e * s ** 2 * t + 8 * b * e ** 3 * t - 8 * a * e * s * t
    return phase, arg


def soliton_value(p: SolitonParams, x, t: float = 0.0):
    """Closed-form soliton at (x, t); x may be an array."""
    phase, arg = _phase_and_arg(p, x, t)
    out = 2 * p.eta * np.exp(1j * phase) / np.cosh(arg)
    return complex(out) if np.ndim(out) == 0 else out


def soliton_velocity(p: SolitonParams) -> float:
    """Peak velocity read off the sech argument."""
    return -(12 * p.beta * p.xi ** 2 - 4 * p.beta * p.eta ** 2 + 4 * p.alpha * p.xi)


def peak_position(p: SolitonParams, t: float) -> float:
    return p.x_off + soliton_velocity(p) * t


def soliton_potential(p: SolitonParams, x0, x1, n, t=0.0, **kw) -> Potential:
    return Potential.from_function(lambda x: soliton_value(p, x, t), x0, x1, n, **kw)


# ---------------------------------------------------------------------------
# fitting


def _peak(x, a):
    """Sub-grid peak location by parabolic interpolation of |w| around the argmax."""
    j = int(np.argmax(a))
    if 0 < j < a.size - 1:
        y0, y1, y2 = a[j - 1], a[j], a[j + 1]
        den = y0 - 2 * y1 + y2
        off = 0.5 * (y0 - y2) / den if den != 0 else 0.0
        return j, x[j] + off * (x[1] - x[0])
    return j, x[j]


def _count_peaks(a, rel=0.5):
    hi = a > rel * a.max()
    # number of separate runs above the threshold
    return int(np.sum(np.diff(hi.astype(int)) == 1) + (1 if hi[0] else 0))


def initial_guess(w: Potential, t: float, alpha: float, beta: float) -> SolitonParams:
    x, s = w.x, w.samples
    a = np.abs(s)
    j, xp = _peak(x, a)
    eta = a[j] / 2
    # local phase slope over the soliton core
    hw = 1.0 / (2 * eta)
    core = np.abs(x - x[j]) <= hw
    if core.sum() >= 3:
        ph = np.unwrap(np.angle(s[core]))
        slope = np.polyfit(x[core], ph, 1)[0]
    else:
        slope = 0.0
    xi = -slope / 2
    p = SolitonParams(eta, xi, 0.0, alpha, beta, 0.0)
    p = replace(p, x_off=xp - soliton_velocity(p) * t)
    g = np.angle(s[j] / soliton_value(p, x[j], t))
    return replace(p, gamma=g)


_FIT_NAMES = ("eta", "xi", "gamma", "x_off")


def fit_soliton(w: Potential, t: float, alpha: float, beta: float, guess: SolitonParams | None = None,
                window: float = 10.0, tol: float = 1e-12, fixed=()):
    """Least-squares fit of a soliton to the samples of ``w`` at time t.

    The misfit is the L2 distance on a window of ``window`` half-widths around
    the peak.  Names listed in ``fixed`` (from eta, xi, gamma, x_off) keep
    their value from ``guess``.  Returns ``(params, residual_sup)`` with the
    sup taken over the whole grid.
    """
    x, s = w.x, w.samples
    a = np.abs(s)
    if a.max() == 0:
        raise FitFailure("cannot fit a soliton to identically zero data", None, float("inf"))
    if _count_peaks(a) > 1:
        warnings.warn("waveform has more than one dominant peak; fit may lock onto either",
                      AmbiguousFitWarning, stacklevel=2)
    if guess is None:
        guess = initial_guess(w, t, alpha, beta)
    _, xp = _peak(x, a)
    half = window / (2 * guess.eta)
    mask = np.abs(x - xp) <= half
    xw, sw = x[mask], s[mask]
    scale = np.sqrt(w.dx)

    full = np.array([guess.eta, guess.xi, guess.gamma, guess.x_off])
    free = np.array([n not in fixed for n in _FIT_NAMES])

    def expand(v):
        out = full.copy()
        out[free] = v
        return out

    def model(v):
        e, xi, g, xo = expand(v)
        return soliton_value(SolitonParams(abs(e) + 1e-300, xi, g, alpha, beta, xo), xw, t)

    def resid(v):
        d = (model(v) - sw) * scale
        return np.concatenate([d.real, d.imag])

    with np.errstate(over="ignore"):
        res = least_squares(resid, full[free], method="lm", xtol=tol, ftol=tol, gtol=tol, max_nfev=5000)
    e, xi, g, xo = expand(res.x)
    if not (np.all(np.isfinite(res.x)) and e > 0):
        raise FitFailure("soliton fit left the admissible parameter set", expand(res.x), float("inf"))
    best = SolitonParams(e, xi, g, alpha, beta, xo)
    r_sup = float(np.max(np.abs(s - soliton_value(best, x, t))))
    if res.status <= 0:
        raise FitFailure(f"soliton fit did not converge: {res.message}", best, r_sup)
    return best, r_sup


def param_distance(p: SolitonParams, q: SolitonParams) -> float:
    """Euclidean distance in (eta, xi, gamma, x_off) with gamma compared mod 2 pi."""
    dg = wrap_phase(p.gamma - q.gamma)
    return float(np.sqrt((p.eta - q.eta) ** 2 + (p.xi - q.xi) ** 2 + dg ** 2 + (p.x_off - q.x_off) ** 2))
