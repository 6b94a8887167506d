"""Shared numerical tables for the Hankel evaluator backends.

Both the pure numpy backend and the compiled backend read these at import so
the two implementations cannot drift apart on coefficients or thresholds.
"""
import math

import numpy as np

EULER_GAMMA = 0.5772156649015328606

# Region boundaries.  Power/log series below R_SERIES, backward recurrence in
# the annulus R_SERIES <= |z| < R_ASYM for Im z <= IM_SPLIT, the modified
# Bessel integral route above IM_SPLIT inside |z| < R_ASYM, large-argument
# expansion beyond R_ASYM.  The asymptotic floor at |z| = 13 with 24 terms is
# about 6e-12; the series sum-of-moduli at |z| = 8 is about I0(8) ~ 4.3e2 so
# round-off stays near 4e-13.
R_SERIES = 8.0
R_ASYM = 13.0
IM_SPLIT = 2.5

BRANCH_SERIES = 1
BRANCH_RECURRENCE = 2
BRANCH_BESSEL_K = 3
BRANCH_ASYMPTOTIC = 4

BRANCH_NAMES = {
    BRANCH_SERIES: "series",
    BRANCH_RECURRENCE: "recurrence",
    BRANCH_BESSEL_K: "bessel_k",
    BRANCH_ASYMPTOTIC: "asymptotic",
}

# ---------------------------------------------------------------- series ---
N_SERIES_TERMS = 36

_h = np.zeros(N_SERIES_TERMS + 2)
for _m in range(1, N_SERIES_TERMS + 2):
    _h[_m] = _h[_m - 1] + 1.0 / _m
HARMONIC = _h  # HARMONIC[m] = 1 + 1/2 + ... + 1/m, HARMONIC[0] = 0

# 1/(m!)^2 and 1/(m!(m+1)!) up to the series length, as float64
INV_FACT_SQ = np.array(
    [1.0 / (math.factorial(m) ** 2) for m in range(N_SERIES_TERMS)]
)
INV_FACT_FACT1 = np.array(
    [1.0 / (math.factorial(m) * math.factorial(m + 1)) for m in range(N_SERIES_TERMS)]
)

# ------------------------------------------------------------ recurrence ---
MILLER_N = 64          # downward start order, even
NEUMANN_KMAX = 31      # terms kept in the log-companion sums

# ------------------------------------------------------------- K integral ---
K_STEP = 0.02
K_TMAX = 6.0
K_NODES = np.arange(0, int(round(K_TMAX / K_STEP)) + 1) * K_STEP
K_COSH = np.cosh(K_NODES)
K_WEIGHTS = np.full(K_NODES.shape, K_STEP)
K_WEIGHTS[0] *= 0.5
K_WEIGHTS[-1] *= 0.5

# -------------------------------------------------------------- asymptotic ---
N_ASYM_TERMS = 24


def _asym_table(nu: int) -> np.ndarray:
    a = np.empty(N_ASYM_TERMS)
    a[0] = 1.0
    for k in range(1, N_ASYM_TERMS):
        a[k] = a[k - 1] * (4.0 * nu * nu - (2 * k - 1) ** 2) / (8.0 * k)
    return a


ASYM_A0 = _asym_table(0)
ASYM_A1 = _asym_table(1)

# h1reg switches from its own series to direct evaluation here
H1REG_SERIES_RADIUS = 0.5
