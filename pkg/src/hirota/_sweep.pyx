# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled transfer sweep; same contract as ``hirota._sweep_py.magnus_sweep``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cdef extern from "<complex.h>" nogil:
    double complex cexp(double complex)
    double complex csqrt(double complex)
    double complex ccosh(double complex)
    double complex csinh(double complex)
    double complex conj(double complex)
    double cabs(double complex)

cnp.import_array()


def magnus_sweep(qn, qm, double h, z, phi0, bint trace=False):
    cdef double complex[::1] qn_v = np.ascontiguousarray(qn, dtype=np.complex128)
    cdef double complex[::1] qm_v = np.ascontiguousarray(qm, dtype=np.complex128)
    cdef double complex[::1] z_v = np.ascontiguousarray(z, dtype=np.complex128)
    phi_arr = np.array(phi0, dtype=np.complex128, copy=True, order="C")
    cdef double complex[:, :, ::1] phi = phi_arr
    cdef Py_ssize_t n = qn_v.shape[0]
    cdef Py_ssize_t m = z_v.shape[0]
    cdef Py_ssize_t j, k
    tr_arr = None
    cdef double complex[:, :, :, ::1] tr
    if trace:
        tr_arr = np.empty((n, m, 2, 2), dtype=np.complex128)
        tr = tr_arr
        tr[0, :, :, :] = phi

    cdef double c = h * h / 12.0
    cdef double complex izh, rot, irot, q0, q1, qa, dq, u, v, w, s, ch, sh
    cdef double complex e11, e12, e21, e22, a, b, cross
    cdef double complex I = 1j

    with nogil:
        for k in range(m):
            izh = I * z_v[k] * h
            rot = cexp(izh)
            irot = 1.0 / rot
            for j in range(n - 1):
                q0 = qn_v[j]
                q1 = qn_v[j + 1]
                qa = (q0 + 4.0 * qm_v[j] + q1) / 6.0
                dq = q0 - q1
                u = h * qa - izh * (h / 6.0) * dq
                v = -h * conj(qa) - izh * (h / 6.0) * conj(dq)
                cross = q0 * conj(q1) - q1 * conj(q0)
                w = -izh + c * cross
                s = csqrt(w * w + u * v)
                ch = ccosh(s)
                if cabs(s) < 1e-4:
                    sh = 1.0 + s * s / 6.0
                else:
                    sh = csinh(s) / s
                e11 = ch + sh * w
                e22 = ch - sh * w
                e12 = sh * u
                e21 = sh * v
                a = phi[k, 0, 0]
                b = phi[k, 1, 0]
                phi[k, 0, 0] = (e11 * a + e12 * b) * rot
                phi[k, 1, 0] = (e21 * a + e22 * b) * rot
                a = phi[k, 0, 1]
                b = phi[k, 1, 1]
                phi[k, 0, 1] = (e11 * a + e12 * b) * irot
                phi[k, 1, 1] = (e21 * a + e22 * b) * irot
                if trace:
                    tr[j + 1, k, 0, 0] = phi[k, 0, 0]
                    tr[j + 1, k, 0, 1] = phi[k, 0, 1]
                    tr[j + 1, k, 1, 0] = phi[k, 1, 0]
                    tr[j + 1, k, 1, 1] = phi[k, 1, 1]
    return phi_arr, tr_arr
