"""Pure numpy backend for the complex Hankel evaluators.

Evaluates H0^(1) and H1^(1) on (mainly) the closed upper half plane with a
relative accuracy target of 1e-10 for moduli in [1e-8, 1e4].  Four regimes,
chosen per point:

* power/log series for |z| < 8
* backward recurrence with a log-companion normalization for
  8 <= |z| < 13 when Im z <= 2.5
* a modified-Bessel integral along the real cosh path for Im z > 2.5,
  |z| < 13 (the series and recurrence routes lose digits to exp(2 Im z)
  cancellation there, the integral route does not)
* the large-argument expansion for |z| >= 13

All functions take 1-D contiguous complex128 arrays and fill outputs in
place; shaping and scalar convenience live one layer up.
"""
from __future__ import annotations

import numpy as np

from ._coeffs import (
    ASYM_A0,
    ASYM_A1,
    BRANCH_ASYMPTOTIC,
    BRANCH_BESSEL_K,
    BRANCH_RECURRENCE,
    BRANCH_SERIES,
    EULER_GAMMA,
    H1REG_SERIES_RADIUS,
    HARMONIC,
    IM_SPLIT,
    INV_FACT_FACT1,
    INV_FACT_SQ,
    K_COSH,
    K_WEIGHTS,
    MILLER_N,
    N_ASYM_TERMS,
    N_SERIES_TERMS,
    NEUMANN_KMAX,
    R_ASYM,
    R_SERIES,
)

BACKEND_NAME = "pure"

_TWO_OVER_PI = 2.0 / np.pi


def _series_pair(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w = -0.25 * z * z  # series run in powers of -z^2/4
    j0 = np.zeros_like(z)
    s0 = np.zeros_like(z)
    j1s = np.zeros_like(z)  # sum for J1 before the z/2 factor
    s1 = np.zeros_like(z)
    wm = np.ones_like(z)
    for m in range(N_SERIES_TERMS):
        j0 += wm * INV_FACT_SQ[m]
        if m >= 1:
            # (-1)^(m+1) (z^2/4)^m = -(-z^2/4)^m
            s0 -= HARMONIC[m] * wm * INV_FACT_SQ[m]
        j1s += wm * INV_FACT_FACT1[m]
        s1 += (HARMONIC[m] + HARMONIC[m + 1]) * wm * INV_FACT_FACT1[m]
        wm = wm * w
    j1 = 0.5 * z * j1s
    lg = np.log(0.5 * z) + EULER_GAMMA
    y0 = _TWO_OVER_PI * (lg * j0 + s0)
    y1 = _TWO_OVER_PI * lg * j1 - _TWO_OVER_PI / z - (0.5 / np.pi) * z * s1
    return j0 + 1j * y0, j1 + 1j * y1


def _recurrence_pair(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    f = np.zeros((MILLER_N + 2, z.size), dtype=np.complex128)
    f[MILLER_N] = 1.0
    for n in range(MILLER_N, 0, -1):
        f[n - 1] = (2.0 * n / z) * f[n] - f[n + 1]
    norm = f[0] + 2.0 * f[2 : MILLER_N + 1 : 2].sum(axis=0)
    j0 = f[0] / norm
    j1 = f[1] / norm
    y0sum = np.zeros_like(z)
    y1sum = np.zeros_like(z)
    sign = -1.0
    for k in range(1, NEUMANN_KMAX + 1):
        y0sum += sign * f[2 * k] / k
        y1sum += sign * (f[2 * k - 1] - f[2 * k + 1]) / k
        sign = -sign
    lg = np.log(0.5 * z) + EULER_GAMMA
    y0 = _TWO_OVER_PI * (lg * j0 - 2.0 * y0sum / norm)
    y1 = _TWO_OVER_PI * (-j0 / z + lg * j1 + y1sum / norm)
    return j0 + 1j * y0, j1 + 1j * y1


def _bessel_k_pair(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w = -1j * z  # Re w = Im z > 2.5, the integrand decays fast
    k0 = np.zeros_like(z)
    k1 = np.zeros_like(z)
    block = 4096
    for lo in range(0, z.size, block):
        wb = w[lo : lo + block, None]
        e = np.exp(-wb * K_COSH[None, :])
        k0[lo : lo + block] = e @ K_WEIGHTS
        k1[lo : lo + block] = (e * K_COSH[None, :]) @ K_WEIGHTS
    return -2j / np.pi * k0, -_TWO_OVER_PI * k1


def _asymptotic_pair(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u = 1j / z
    s0 = np.full_like(z, ASYM_A0[N_ASYM_TERMS - 1])
    s1 = np.full_like(z, ASYM_A1[N_ASYM_TERMS - 1])
    for k in range(N_ASYM_TERMS - 2, -1, -1):
        s0 = s0 * u + ASYM_A0[k]
        s1 = s1 * u + ASYM_A1[k]
    pref = np.sqrt(2.0 / (np.pi * z)) * np.exp(1j * (z - 0.25 * np.pi))
    return pref * s0, -1j * pref * s1


def _asymptotic_pair_second(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """H0^(2), H1^(2) by the conjugate expansion; diagnostic use only."""
    u = -1j / z
    s0 = np.full_like(z, ASYM_A0[N_ASYM_TERMS - 1])
    s1 = np.full_like(z, ASYM_A1[N_ASYM_TERMS - 1])
    for k in range(N_ASYM_TERMS - 2, -1, -1):
        s0 = s0 * u + ASYM_A0[k]
        s1 = s1 * u + ASYM_A1[k]
    pref = np.sqrt(2.0 / (np.pi * z)) * np.exp(-1j * (z - 0.25 * np.pi))
    return pref * s0, 1j * pref * s1


def region_codes(z: np.ndarray) -> np.ndarray:
    r = np.abs(z)
    codes = np.empty(z.shape, dtype=np.uint8)
    codes[r >= R_ASYM] = BRANCH_ASYMPTOTIC
    inner = r < R_ASYM
    hi = inner & (z.imag > IM_SPLIT)
    codes[hi] = BRANCH_BESSEL_K
    lo = inner & ~hi
    codes[lo & (r < R_SERIES)] = BRANCH_SERIES
    codes[lo & (r >= R_SERIES)] = BRANCH_RECURRENCE
    return codes


_DISPATCH = {
    BRANCH_SERIES: _series_pair,
    BRANCH_RECURRENCE: _recurrence_pair,
    BRANCH_BESSEL_K: _bessel_k_pair,
    BRANCH_ASYMPTOTIC: _asymptotic_pair,
}


def hankel_pair(z: np.ndarray, h0: np.ndarray, h1: np.ndarray, branch: np.ndarray) -> None:
    codes = region_codes(z)
    branch[:] = codes
    for code, fn in _DISPATCH.items():
        idx = np.nonzero(codes == code)[0]
        if idx.size:
            a, b = fn(z[idx])
            h0[idx] = a
            h1[idx] = b


def h1reg(z: np.ndarray, out: np.ndarray) -> None:
    """H1^(1)(z) + 2i/(pi z), with the pole removed analytically near 0."""
    small = np.abs(z) < H1REG_SERIES_RADIUS
    idx = np.nonzero(small)[0]
    if idx.size:
        zs = z[idx]
        w = -0.25 * zs * zs
        j1s = np.zeros_like(zs)
        s1 = np.zeros_like(zs)
        wm = np.ones_like(zs)
        for m in range(N_SERIES_TERMS):
            j1s += wm * INV_FACT_FACT1[m]
            s1 += (HARMONIC[m] + HARMONIC[m + 1]) * wm * INV_FACT_FACT1[m]
            wm = wm * w
        j1 = 0.5 * zs * j1s
        lg = np.log(0.5 * zs) + EULER_GAMMA
        out[idx] = j1 * (1.0 + 2j / np.pi * lg) - 0.5j / np.pi * zs * s1
    idx = np.nonzero(~small)[0]
    if idx.size:
        zb = z[idx]
        h0 = np.empty_like(zb)
        h1 = np.empty_like(zb)
        br = np.empty(zb.shape, dtype=np.uint8)
        hankel_pair(zb, h0, h1, br)
        out[idx] = h1 + 2j / (np.pi * zb)
