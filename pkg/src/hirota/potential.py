"""Sampled complex potentials on a uniform grid."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import TruncationWarning

TAIL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Potential:
    """Complex samples ``q(x0 + j*dx)``, j = 0..n-1.

    The tail check compares the two boundary samples with ``tail_tol * max|q|``;
    ``tail_policy`` is one of ``"warn"``, ``"error"`` or ``"ignore"``.
    """

    x0: float
    dx: float
    samples: np.ndarray
    tail_tol: float = TAIL_TOL
    tail_policy: str = field(default="warn", repr=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.complex128).reshape(-1)
        if s.size == 0:
            raise ValueError("potential needs at least one sample")
        if not self.dx > 0:
            raise ValueError(f"dx must be positive, got {self.dx}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "dx", float(self.dx))
        if self.tail_policy != "ignore":
            edge = max(abs(s[0]), abs(s[-1]))
            peak = float(np.max(np.abs(s)))
            if edge > self.tail_tol * peak:
                msg = (f"boundary sample |q| = {edge:.3e} exceeds {self.tail_tol:g} * max|q|;"
                       " the window truncates the potential")
                if self.tail_policy == "error":
                    raise ValueError(msg)
                warnings.warn(msg, TruncationWarning, stacklevel=3)

    @classmethod
    def from_function(cls, f, x0, x1, n, **kw):
        """Sample ``f`` at n points from x0 to x1 inclusive."""
        x = np.linspace(x0, x1, n)
        return cls(x0, x[1] - x[0], np.asarray(f(x), dtype=np.complex128), **kw)

    @classmethod
    def periodic(cls, f, half_width, n, **kw):
        """Sample ``f`` on the periodic grid x_j = -L + 2 L j / n used by the PDE solver."""
        dx = 2.0 * half_width / n
        x = -half_width + dx * np.arange(n)
        return cls(-half_width, dx, np.asarray(f(x), dtype=np.complex128), **kw)

    @classmethod
    def zero(cls, half_width=20.0, n=801):
        return cls.from_function(np.zeros_like, -half_width, half_width, n)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def x_end(self) -> float:
        return self.x0 + self.dx * (self.n - 1)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def with_samples(self, samples) -> "Potential":
        return Potential(self.x0, self.dx, samples, self.tail_tol, "ignore")

    def midpoints(self) -> np.ndarray:
        """Band-limited interpolation of q at x_j + dx/2, j = 0..n-2."""
        return _fourier_shift(self.samples, 0.5)[:-1]

    def refine(self, factor: int) -> "Potential":
        """Band-limited upsampling to spacing dx/factor (same end points)."""
        factor = int(factor)
        if factor <= 1:
            return self
        n = self.n
        out = np.empty((n - 1) * factor + 1, dtype=np.complex128)
        out[::factor] = self.samples
        for k in range(1, factor):
            out[k::factor] = _fourier_shift(self.samples, k / factor)[:-1]
        return Potential(self.x0, self.dx / factor, out, self.tail_tol, "ignore")

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.dx))

    def to_dict(self) -> dict:
        inter = np.empty(2 * self.n)
        inter[0::2] = self.samples.real
        inter[1::2] = self.samples.imag
        return {"kind": "potential", "x0": self.x0, "dx": self.dx, "n": self.n,
                "data": inter.tolist()}

    @classmethod
    def from_dict(cls, d: dict, **kw) -> "Potential":
        if d.get("kind", "potential") != "potential":
            raise ValueError(f"expected a potential record, got kind={d.get('kind')!r}")
        a = np.asarray(d["data"], dtype=float)
        if a.size != 2 * int(d["n"]):
            raise ValueError("data length must be 2*n (interleaved re, im)")
        return cls(d["x0"], d["dx"], a[0::2] + 1j * a[1::2], **kw)


def _fourier_shift(s: np.ndarray, frac: float) -> np.ndarray:
    """Values of the trigonometric interpolant at x_j + frac*dx."""
    n = s.size
    if n < 4:
        return np.interp(np.arange(n) + frac, np.arange(n), s.real) + 1j * np.interp(
            np.arange(n) + frac, np.arange(n), s.imag)
    k = np.fft.fftfreq(n) * n
    phase = np.exp(2j * np.pi * k * frac / n)
    if n % 2 == 0:
        # split the Nyquist mode symmetrically so real data stays real
        phase[n // 2] = np.cos(np.pi * frac)
    return np.fft.ifft(np.fft.fft(s) * phase)
