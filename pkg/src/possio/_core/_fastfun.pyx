# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the complex Hankel evaluators.

Scalar C loops over the same four regions as the numpy backend; every
coefficient table and threshold is read from ``_coeffs`` at import time so
the two implementations cannot drift apart.
"""
import numpy as np

from libc.math cimport M_PI

cdef extern from "complex.h" nogil:
    double complex clog(double complex)
    double complex cexp(double complex)
    double complex csqrt(double complex)
    double cabs(double complex)
    double cimag(double complex)

from . import _coeffs

BACKEND_NAME = "compiled"

cdef double EULER_GAMMA = _coeffs.EULER_GAMMA
cdef double R_SERIES = _coeffs.R_SERIES
cdef double R_ASYM = _coeffs.R_ASYM
cdef double IM_SPLIT = _coeffs.IM_SPLIT
cdef double H1REG_RADIUS = _coeffs.H1REG_SERIES_RADIUS
cdef int N_SERIES = _coeffs.N_SERIES_TERMS
cdef int N_ASYM = _coeffs.N_ASYM_TERMS
cdef int MILLER_N = _coeffs.MILLER_N
cdef int NEUMANN_KMAX = _coeffs.NEUMANN_KMAX
cdef int CODE_SERIES = _coeffs.BRANCH_SERIES
cdef int CODE_RECURRENCE = _coeffs.BRANCH_RECURRENCE
cdef int CODE_BESSEL_K = _coeffs.BRANCH_BESSEL_K
cdef int CODE_ASYMPTOTIC = _coeffs.BRANCH_ASYMPTOTIC

cdef double[::1] HARMONIC = np.ascontiguousarray(_coeffs.HARMONIC, dtype=np.float64)
cdef double[::1] INV_FACT_SQ = np.ascontiguousarray(_coeffs.INV_FACT_SQ, dtype=np.float64)
cdef double[::1] INV_FACT_FACT1 = np.ascontiguousarray(_coeffs.INV_FACT_FACT1, dtype=np.float64)
cdef double[::1] K_COSH = np.ascontiguousarray(_coeffs.K_COSH, dtype=np.float64)
cdef double[::1] K_WEIGHTS = np.ascontiguousarray(_coeffs.K_WEIGHTS, dtype=np.float64)
cdef double[::1] ASYM_A0 = np.ascontiguousarray(_coeffs.ASYM_A0, dtype=np.float64)
cdef double[::1] ASYM_A1 = np.ascontiguousarray(_coeffs.ASYM_A1, dtype=np.float64)

cdef double TWO_OVER_PI = 2.0 / M_PI
cdef double complex CI = 1j


cdef inline int _region(double complex z) noexcept:
    cdef double r = cabs(z)
    if r >= R_ASYM:
        return CODE_ASYMPTOTIC
    if cimag(z) > IM_SPLIT:
        return CODE_BESSEL_K
    if r < R_SERIES:
        return CODE_SERIES
    return CODE_RECURRENCE


cdef inline void _series_point(double complex z,
                               double complex* h0, double complex* h1) noexcept:
    cdef double complex w = -0.25 * z * z
    cdef double complex j0 = 0, s0 = 0, j1s = 0, s1 = 0, wm = 1
    cdef double complex j1, lg, y0, y1
    cdef int m
    for m in range(N_SERIES):
        j0 = j0 + wm * INV_FACT_SQ[m]
        if m >= 1:
            s0 = s0 - HARMONIC[m] * wm * INV_FACT_SQ[m]
        j1s = j1s + wm * INV_FACT_FACT1[m]
        s1 = s1 + (HARMONIC[m] + HARMONIC[m + 1]) * wm * INV_FACT_FACT1[m]
        wm = wm * w
    j1 = 0.5 * z * j1s
    lg = clog(0.5 * z) + EULER_GAMMA
    y0 = TWO_OVER_PI * (lg * j0 + s0)
    y1 = TWO_OVER_PI * lg * j1 - TWO_OVER_PI / z - (0.5 / M_PI) * z * s1
    h0[0] = j0 + CI * y0
    h1[0] = j1 + CI * y1


cdef inline void _recurrence_point(double complex z, double complex* f,
                                   double complex* h0, double complex* h1) noexcept:
    cdef int n, k
    cdef double complex norm, j0, j1, y0sum, y1sum, lg, y0, y1
    cdef double sign
    f[MILLER_N + 1] = 0
    f[MILLER_N] = 1
    for n in range(MILLER_N, 0, -1):
        f[n - 1] = (2.0 * n / z) * f[n] - f[n + 1]
    norm = f[0]
    for n in range(2, MILLER_N + 1, 2):
        norm = norm + 2.0 * f[n]
    j0 = f[0] / norm
    j1 = f[1] / norm
    y0sum = 0
    y1sum = 0
    sign = -1.0
    for k in range(1, NEUMANN_KMAX + 1):
        y0sum = y0sum + sign * f[2 * k] / k
        y1sum = y1sum + sign * (f[2 * k - 1] - f[2 * k + 1]) / k
        sign = -sign
    lg = clog(0.5 * z) + EULER_GAMMA
    y0 = TWO_OVER_PI * (lg * j0 - 2.0 * y0sum / norm)
    y1 = TWO_OVER_PI * (-j0 / z + lg * j1 + y1sum / norm)
    h0[0] = j0 + CI * y0
    h1[0] = j1 + CI * y1


cdef inline void _besselk_point(double complex z,
                                double complex* h0, double complex* h1) noexcept:
    cdef double complex w = -CI * z
    cdef double complex k0 = 0, k1 = 0, e
    cdef Py_ssize_t i, m = K_COSH.shape[0]
    for i in range(m):
        e = cexp(-w * K_COSH[i])
        k0 = k0 + e * K_WEIGHTS[i]
        k1 = k1 + e * K_COSH[i] * K_WEIGHTS[i]
    h0[0] = (-2.0 * CI / M_PI) * k0
    h1[0] = -TWO_OVER_PI * k1


cdef inline void _asym_point(double complex z,
                             double complex* h0, double complex* h1) noexcept:
    cdef double complex u = CI / z
    cdef double complex s0 = ASYM_A0[N_ASYM - 1]
    cdef double complex s1 = ASYM_A1[N_ASYM - 1]
    cdef double complex pref
    cdef int k
    for k in range(N_ASYM - 2, -1, -1):
        s0 = s0 * u + ASYM_A0[k]
        s1 = s1 * u + ASYM_A1[k]
    pref = csqrt(2.0 / (M_PI * z)) * cexp(CI * (z - 0.25 * M_PI))
    h0[0] = pref * s0
    h1[0] = -CI * pref * s1


cdef inline void _hankel_point(double complex z, double complex* fbuf,
                               double complex* h0, double complex* h1,
                               int code) noexcept:
    if code == CODE_SERIES:
        _series_point(z, h0, h1)
    elif code == CODE_RECURRENCE:
        _recurrence_point(z, fbuf, h0, h1)
    elif code == CODE_BESSEL_K:
        _besselk_point(z, h0, h1)
    else:
        _asym_point(z, h0, h1)


def hankel_pair(double complex[::1] z, double complex[::1] h0,
                double complex[::1] h1, unsigned char[::1] branch):
    cdef Py_ssize_t i, n = z.shape[0]
    cdef double complex a, b
    cdef int code
    scratch = np.empty(MILLER_N + 2, dtype=np.complex128)
    cdef double complex[::1] fbuf = scratch
    for i in range(n):
        code = _region(z[i])
        branch[i] = <unsigned char> code
        _hankel_point(z[i], &fbuf[0], &a, &b, code)
        h0[i] = a
        h1[i] = b


def h1reg(double complex[::1] z, double complex[::1] out):
    """H1^(1)(z) + 2i/(pi z), pole removed analytically for small |z|."""
    cdef Py_ssize_t i, n = z.shape[0]
    cdef double complex zv, w, j1s, s1, wm, j1, lg, a, b
    cdef int m, code
    scratch = np.empty(MILLER_N + 2, dtype=np.complex128)
    cdef double complex[::1] fbuf = scratch
    for i in range(n):
        zv = z[i]
        if cabs(zv) < H1REG_RADIUS:
            w = -0.25 * zv * zv
            j1s = 0
            s1 = 0
            wm = 1
            for m in range(N_SERIES):
                j1s = j1s + wm * INV_FACT_FACT1[m]
                s1 = s1 + (HARMONIC[m] + HARMONIC[m + 1]) * wm * INV_FACT_FACT1[m]
                wm = wm * w
            j1 = 0.5 * zv * j1s
            lg = clog(0.5 * zv) + EULER_GAMMA
            out[i] = j1 * (1.0 + 2.0 * CI / M_PI * lg) - 0.5 * CI / M_PI * zv * s1
        else:
            code = _region(zv)
            _hankel_point(zv, &fbuf[0], &a, &b, code)
            out[i] = b + 2.0 * CI / (M_PI * zv)
