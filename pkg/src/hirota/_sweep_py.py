"""Pure-NumPy transfer sweep for the Zakharov-Shabat/AKNS spectral problem.

Vectorized over the spectral parameter; loops over the x-grid.  Used when the
compiled kernel is unavailable or disabled via ``HIROTA_PURE_PYTHON=1``.
"""

import numpy as np


def magnus_sweep(qn, qm, h, z, phi0, trace=False):
    """Propagate normalized Jost matrices across the grid.

    Each step maps Phi(x) -> exp(Omega) Phi(x) exp(i z h sigma3) where Omega is
    the fourth-order Magnus exponent built from q at the two nodes and the
    midpoint.  ``qn`` has n node values, ``qm`` the n-1 midpoint values, ``h``
    is the signed step.  Returns the final matrices (m, 2, 2) and, if
    ``trace``, all intermediate ones with shape (n, m, 2, 2).
    """
    qn = np.asarray(qn, dtype=np.complex128)
    qm = np.asarray(qm, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    phi = np.array(phi0, dtype=np.complex128, copy=True)
    n = qn.shape[0]
    tr = None
    if trace:
        tr = np.empty((n,) + phi.shape, dtype=np.complex128)
        tr[0] = phi

    izh = 1j * z * h
    c = h * h / 12.0
    rot = np.exp(izh)
    irot = 1.0 / rot
    for j in range(n - 1):
        q0 = qn[j]
        q1 = qn[j + 1]
        qa = (q0 + 4.0 * qm[j] + q1) / 6.0
        dq = q0 - q1
        u = h * qa - izh * (h / 6.0) * dq
        v = -h * np.conj(qa) - izh * (h / 6.0) * np.conj(dq)
        w = -izh + c * (q0 * np.conj(q1) - q1 * np.conj(q0))
        s = np.sqrt(w * w + u * v)
        ch = np.cosh(s)
        small = np.abs(s) < 1e-4
        s_safe = np.where(small, 1.0, s)
        sh = np.where(small, 1.0 + s * s / 6.0, np.sinh(s_safe) / s_safe)
        e11 = ch + sh * w
        e22 = ch - sh * w
        e12 = sh * u
        e21 = sh * v
        a = phi[:, 0, 0].copy()
        b = phi[:, 1, 0].copy()
        phi[:, 0, 0] = (e11 * a + e12 * b) * rot
        phi[:, 1, 0] = (e21 * a + e22 * b) * rot
        a = phi[:, 0, 1].copy()
        b = phi[:, 1, 1].copy()
        phi[:, 0, 1] = (e11 * a + e12 * b) * irot
        phi[:, 1, 1] = (e21 * a + e22 * b) * irot
        if trace:
            tr[j + 1] = phi
    return phi, tr
