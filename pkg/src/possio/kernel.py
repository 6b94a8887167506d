"""The chordwise influence kernel and its pressure-doublet building blocks.

A pressure doublet sitting at (xi, 0) radiates the acceleration-potential
field ``doublet_psi``; integrating it upstream against the streamwise factor
exp(-lam u) produces the velocity-potential field ``doublet_potential``.  The
downwash limit of that construction on the chord gives the influence kernel

    kern(x, xi, s) = q / (x - xi) + K(x, xi, s)

with a Cauchy singularity of strength ``q = 2i (1-M^2) / (pi U)`` and a
regular part K that behaves like A log|x - xi| + B near the diagonal.  The
kernel is a difference kernel in d = x - xi:

    kern = -c1 sign(d) H1(kappa |d|) + c2 H0(kappa |d|)
           + c3 exp(lam d) G(d),
    G(d) = int_{-inf}^{d} exp(-lam v) H0(kappa |v|) dv

and the split is computed without subtractive cancellation by replacing H1
with its pole-free companion in the first term.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _core
from ._core._coeffs import EULER_GAMMA, HARMONIC
from ._quadutil import CumulativeIntegral, graded_breaks
from .errors import ConvergenceError, DomainError
from .flowconfig import FlowParams, lambda_of

TAIL_DECADES = 30.0          # envelope truncation: exp(-30) ~ 1e-13
PHASE_CAP = 4.0              # radians of phase change per 16-point panel
DIAGONAL_GUARD = 1e-7        # closest admissible approach to x == xi
_SERIES_J = 14               # streamwise exponential order in the center panel
_SERIES_M = 9                # radial order in the center panel


@dataclass(frozen=True)
class KernelConstants:
    """Per-(s, flow) constants of the kernel bracket."""

    s: complex
    lam: complex               # streamwise rate, -s(1 + cU)/U
    kappa: complex             # radial wavenumber on the chord, i s/(a (1-M^2))
    coeff_h1: complex          # multiplies sign(d) H1(kappa |d|)
    coeff_h0: complex          # multiplies H0(kappa |d|)
    coeff_tail: complex        # multiplies exp(lam d) G(d)
    singular_coeff: complex    # strength q of the Cauchy part
    normalizer: complex        # gamma with gamma * (-pi q) = 1


def kernel_constants(s: complex, params: FlowParams) -> KernelConstants:
    s = complex(s)
    beta2 = 1.0 - params.M**2
    lam = lambda_of(s, params)
    kappa = 1j * s / (params.a * beta2)
    u = params.U
    return KernelConstants(
        s=s,
        lam=lam,
        kappa=kappa,
        coeff_h1=-beta2 * kappa / u,
        coeff_h0=lam * beta2 / u,
        coeff_tail=(lam * lam * beta2 - s * s / (params.a**2 * beta2)) / u,
        singular_coeff=2j * beta2 / (np.pi * u),
        normalizer=1j * u / (2.0 * beta2),
    )


def _h0(z: np.ndarray) -> np.ndarray:
    h0, _, _ = _core.hankel_pair_raw(z)
    return h0


class _StreamwiseTail:
    """Cumulative integral C(d) = int_{-inf}^{d} exp(-lam v) f(v) dv.

    The improper lower limit is truncated where the decay envelope of the
    integrand has fallen by exp(-30); panels are graded into the distinguished
    point v = 0 and capped so each carries a bounded phase change.
    """

    def __init__(self, lam, f, d_lo, d_hi, decay, osc, inner, tail_factor=1.0):
        if decay <= 0:
            raise DomainError("streamwise tail requires Re s > 0")
        v_min = min(d_lo, 0.0) - tail_factor * TAIL_DECADES / decay
        if abs(lam.real) * max(abs(v_min), abs(d_hi)) > 600.0:
            raise ConvergenceError("streamwise factor overflows double range")
        cap = PHASE_CAP / max(osc + decay, 1e-30)
        self.breaks = graded_breaks(v_min, d_hi, 0.0, inner, cap)
        self.table = CumulativeIntegral(self.breaks, f)

    def values(self, d):
        return self.table.partial(d)

    @property
    def total(self):
        return self.table.total


class _GTable:
    """The tail function G with a series-evaluated panel astride the log point."""

    def __init__(self, co: KernelConstants, d_lo: float, d_hi: float, tail_factor: float = 1.0):
        lam, kappa = co.lam, co.kappa
        decay = -lam.real + kappa.imag
        if decay <= 0:
            raise DomainError("kernel tail integral requires Re s > 0")
        osc = abs(lam.imag) + abs(kappa.real)
        v_min = d_lo - tail_factor * TAIL_DECADES / decay
        if abs(lam.real) * max(abs(v_min), abs(d_hi)) > 600.0:
            raise ConvergenceError("streamwise factor overflows double range")
        delta0 = min(0.01, 0.3 / max(abs(lam), abs(kappa), 1.0))
        cap = PHASE_CAP / max(osc + decay, 1e-30)
        br = graded_breaks(v_min, d_hi, 0.0, delta0, cap)
        self.delta0 = delta0
        self.lam = lam
        self.kappa = kappa
        f = lambda v: np.exp(-lam * v) * _h0(kappa * np.abs(v))
        self.left = CumulativeIntegral(br[br <= -delta0 * 0.5], f)
        self.g_at_zero = self.left.total + self._center(np.array([delta0]), -1)[0]
        self.base_right = self.g_at_zero + self._center(np.array([delta0]), +1)[0]
        self.right = CumulativeIntegral(br[br >= delta0 * 0.5], f)

    def _center(self, t: np.ndarray, side: int) -> np.ndarray:
        """int_0^t exp(-side*lam*u) H0(kappa u) du by the log-explicit series."""
        kappa, lam = self.kappa, self.lam
        m = np.arange(_SERIES_M)
        em = np.cumprod(np.concatenate([[1.0 + 0j], -(kappa**2 / 4.0) / np.arange(1, _SERIES_M) ** 2]))
        lead = 1.0 + 2j / np.pi * (np.log(kappa / 2.0) + EULER_GAMMA)
        alpha = em * lead - 2j / np.pi * HARMONIC[:_SERIES_M] * em
        beta = 2j / np.pi * em
        lamj = np.cumprod(np.concatenate([[1.0 + 0j], (-side * lam) / np.arange(1, _SERIES_J)]))
        t = np.asarray(t, dtype=float)
        lt = np.log(t)
        out = np.zeros(t.shape, dtype=complex)
        for j in range(_SERIES_J):
            for mi in range(_SERIES_M):
                p = j + 2 * mi
                tp = t ** (p + 1) / (p + 1)
                out += lamj[j] * (alpha[mi] * tp + beta[mi] * tp * (lt - 1.0 / (p + 1)))
        return out

    def values(self, d) -> np.ndarray:
        d = np.atleast_1d(np.asarray(d, dtype=float))
        out = np.empty(d.shape, dtype=complex)
        lo = d <= -self.delta0
        hi = d >= self.delta0
        mid = ~(lo | hi)
        if lo.any():
            out[lo] = self.left.partial(d[lo])
        if hi.any():
            out[hi] = self.base_right + self.right.partial(d[hi])
        if mid.any():
            dm = d[mid]
            vals = np.empty(dm.shape, dtype=complex)
            neg = dm < 0
            pos = dm > 0
            zer = dm == 0
            if neg.any():
                vals[neg] = self.g_at_zero - self._center(-dm[neg], -1)
            if pos.any():
                vals[pos] = self.g_at_zero + self._center(dm[pos], +1)
            if zer.any():
                vals[zer] = self.g_at_zero
            out[mid] = vals
        return out


@dataclass(frozen=True)
class KernelEval:
    """One point of the kernel together with its singular/regular split."""

    x: float
    xi: float
    s: complex
    full: complex
    singular_coeff: complex
    regular: complex
    z: complex


class KernelEngine:
    """Kernel evaluations at fixed (s, flow), with the tail table built once."""

    def __init__(self, s: complex, params: FlowParams, d_lo: float = -2.05,
                 d_hi: float = 2.05, tail_factor: float = 1.0):
        s = complex(s)
        if s.real <= 0:
            raise DomainError("kernel evaluation requires Re s > 0")
        self.s = s
        self.params = params
        self.co = kernel_constants(s, params)
        self.gtable = _GTable(self.co, d_lo, d_hi, tail_factor)

    def g_values(self, d):
        return self.gtable.values(d)

    def _tail_term(self, d):
        return self.co.coeff_tail * np.exp(self.co.lam * d) * self.gtable.values(d)

    def full(self, x, xi):
        x, xi = np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(xi))
        d = (x - xi).astype(float)
        if np.any(d == 0):
            raise DomainError("kernel is singular on the diagonal x == xi")
        z = self.co.kappa * np.abs(d)
        h0, h1, _ = _core.hankel_pair_raw(z.ravel())
        sgn = np.sign(d)
        out = (self.co.coeff_h1 * sgn * h1.reshape(d.shape)
               + self.co.coeff_h0 * h0.reshape(d.shape)
               + self._tail_term(d))
        return out

    def regular(self, x, xi):
        x, xi = np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(xi))
        d = (x - xi).astype(float)
        if np.any(d == 0):
            raise DomainError("regular part is log-singular on the diagonal")
        z = self.co.kappa * np.abs(d)
        h1r = _core.h1reg_raw(z.ravel()).reshape(d.shape)
        h0 = _h0(z.ravel()).reshape(d.shape)
        sgn = np.sign(d)
        return (self.co.coeff_h1 * sgn * h1r
                + self.co.coeff_h0 * h0
                + self._tail_term(d))

    def split(self, x: float, xi: float) -> KernelEval:
        if abs(x - xi) < DIAGONAL_GUARD:
            raise DomainError(
                f"kernel split needs |x - xi| >= {DIAGONAL_GUARD}, got {abs(x - xi):.3e}"
            )
        reg = complex(self.regular(x, xi).ravel()[0])
        q = self.co.singular_coeff
        return KernelEval(
            x=float(x),
            xi=float(xi),
            s=self.s,
            full=q / (x - xi) + reg,
            singular_coeff=q,
            regular=reg,
            z=self.co.kappa * abs(x - xi),
        )


@lru_cache(maxsize=16)
def _cached_engine(s: complex, params: FlowParams) -> KernelEngine:
    return KernelEngine(s, params)


def get_engine(s: complex, params: FlowParams) -> KernelEngine:
    return _cached_engine(complex(s), params)


def possio_kernel_full(x, xi, s, params: FlowParams):
    """The downwash influence kernel kern(x, xi, s), elementwise in x, xi."""
    out = get_engine(s, params).full(x, xi)
    if np.ndim(x) == 0 and np.ndim(xi) == 0:
        return complex(out.ravel()[0])
    return out


def kernel_split(x: float, xi: float, s: complex, params: FlowParams) -> KernelEval:
    return get_engine(s, params).split(x, xi)


# ------------------------------------------------------------- doublets ---


def doublet_psi(x, y, xi, s, params: FlowParams):
    """Acceleration-potential field of a unit pressure doublet at (xi, 0).

    Vanishes identically on y = 0 off the doublet point, which is what makes
    the trailing-edge condition automatic in this formulation.
    """
    beta2 = 1.0 - params.M**2
    rtb = np.sqrt(beta2)
    scalar_in = np.ndim(x) == 0 and np.ndim(xi) == 0
    x, xi = np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(xi))
    rho = np.sqrt((x - xi) ** 2 / beta2 + y * y)
    if np.any(rho == 0):
        raise DomainError("doublet field is singular at its source point")
    if y == 0:
        out = np.zeros(rho.shape, dtype=complex)
    else:
        c = 1j * s / (params.a * rtb)
        _, h1, _ = _core.hankel_pair_raw((c * rho).ravel())
        out = h1.reshape(rho.shape) * (1j * s * y) / (params.a * rtb * rho)
    if scalar_in:
        return complex(out.ravel()[0])
    return out


def _psi_difference_field(y: float, s: complex, params: FlowParams):
    """Psi as a function of v = x - xi at height y, plus its decay/osc rates."""
    beta2 = 1.0 - params.M**2
    rtb = np.sqrt(beta2)
    c = 1j * s / (params.a * rtb)

    def f(v):
        rho = np.sqrt(v * v / beta2 + y * y)
        _, h1, _ = _core.hankel_pair_raw(c * rho)
        return h1 * (1j * s * y) / (params.a * rtb * rho)

    decay_radial = s.real / (params.a * beta2)   # Im(c)/sqrt(beta2)
    osc = abs(c) / rtb
    return f, decay_radial, osc


def doublet_potential(x: float, y: float, xi: float, s: complex,
                      params: FlowParams, tail_factor: float = 1.0) -> complex:
    """Velocity-potential field of a unit pressure doublet at (xi, 0).

    Solves U dPhi/dx + s(1 + cU) Phi = Psi by the upstream integrating
    factor.  On the axis y = 0 the integrand vanishes pointwise, so the value
    is exactly zero when the upstream ray misses the doublet; crossing the
    doublet point the pointwise limit does not exist and is rejected.
    """
    s = complex(s)
    if s.real <= 0:
        raise DomainError("potential tail integral requires Re s > 0")
    d = float(x) - float(xi)
    if y == 0:
        if d < 0:
            return 0.0 + 0.0j
        raise DomainError("on-axis potential is distributional past the doublet")
    lam = lambda_of(s, params)
    f, decay_radial, osc = _psi_difference_field(y, s, params)
    tail = _StreamwiseTail(
        lam,
        lambda v: np.exp(-lam * v) * f(v),
        d_lo=d,
        d_hi=d,
        decay=-lam.real + decay_radial,
        osc=abs(lam.imag) + osc,
        inner=abs(y) / 4.0,
        tail_factor=tail_factor,
    )
    return complex(np.exp(lam * d) / params.U * tail.total)


# ---------------------------------------------------- diagnostics / fits ---


@dataclass(frozen=True)
class LogFit:
    """Least-squares fit of the near-diagonal regular part to A log|d| + B."""

    log_coeff: complex
    const_coeff: complex
    residual_rms: float
    residual_max: float
    window: tuple
    n_points: int


def logfit_regular(x: float, s: complex, params: FlowParams,
                   lo: float = 1e-4, hi: float = 1e-2, n: int = 24) -> LogFit:
    eng = get_engine(s, params)
    deltas = np.geomspace(lo, hi, n)
    vals = np.concatenate([eng.regular(x, x - deltas), eng.regular(x, x + deltas)])
    logs = np.concatenate([np.log(deltas), np.log(deltas)])
    design = np.column_stack([logs, np.ones_like(logs)])
    coef, *_ = np.linalg.lstsq(design, vals, rcond=None)
    fit = design @ coef
    resid = np.abs(fit - vals)
    return LogFit(
        log_coeff=complex(coef[0]),
        const_coeff=complex(coef[1]),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        residual_max=float(resid.max()),
        window=(lo, hi),
        n_points=2 * n,
    )


def predicted_log_coefficient(s: complex, params: FlowParams) -> complex:
    """The analytic strength of the log term: 2i c2 / pi."""
    return 2j * kernel_constants(s, params).coeff_h0 / np.pi


def cauchy_coefficient_estimate(x: float, s: complex, params: FlowParams,
                                deltas=(1e-3, 5e-4, 2.5e-4)) -> complex:
    """Measure the 1/(x - xi) strength from the odd part of the full kernel,
    Richardson-extrapolated over a ratio-2 offset sequence."""
    eng = get_engine(s, params)
    m = []
    for dl in deltas:
        odd = 0.5 * (eng.full(x, x - dl) - eng.full(x, x + dl))
        m.append(complex(dl * odd.ravel()[0]))
    # two Richardson levels assuming an O(delta^2) error model
    m1 = [m[i + 1] + (m[i + 1] - m[i]) / 3.0 for i in range(len(m) - 1)]
    m2 = [m1[i + 1] + (m1[i + 1] - m1[i]) / 15.0 for i in range(len(m1) - 1)]
    return m2[-1]


# ------------------------------------------------- equation residual probes ---


def _doublet_geometry(xi, s, params):
    beta2 = 1.0 - params.M**2
    c = 1j * s / (params.a * np.sqrt(beta2))

    def h0_of(xx, yy):
        rho = np.sqrt((xx - xi) ** 2 / beta2 + yy * yy)
        return complex(_h0(np.array([c * rho]))[0])

    return h0_of


def reduced_wave_residual(x: float, y: float, xi: float, s: complex,
                          params: FlowParams, h: float) -> float:
    """|a^2(1-M^2) u_xx + a^2 u_yy - (s^2/(1-M^2)) u| / max term, u = H0 field,
    second derivatives by central differences with step h."""
    beta2 = 1.0 - params.M**2
    u = _doublet_geometry(xi, s, params)
    uxx = (u(x + h, y) - 2 * u(x, y) + u(x - h, y)) / h**2
    uyy = (u(x, y + h) - 2 * u(x, y) + u(x, y - h)) / h**2
    t1 = params.a**2 * beta2 * uxx
    t2 = params.a**2 * uyy
    t3 = s * s / beta2 * u(x, y)
    scale = max(abs(t1), abs(t2), abs(t3))
    return abs(t1 + t2 - t3) / scale


def convected_wave_residual_doublet(x: float, y: float, t: float, xi: float,
                                    s: complex, params: FlowParams, h: float) -> float:
    """Residual of the convected wave equation on the separated doublet field
    psi = doublet_psi * exp(s(t + c x)), with all derivatives by finite
    differences in (x, y, t)."""
    beta2 = 1.0 - params.M**2

    def psi(xx, yy, tt):
        return doublet_psi(xx, yy, xi, s, params) * np.exp(s * (tt + params.c * xx))

    pxx = (psi(x + h, y, t) - 2 * psi(x, y, t) + psi(x - h, y, t)) / h**2
    pyy = (psi(x, y + h, t) - 2 * psi(x, y, t) + psi(x, y - h, t)) / h**2
    ptt = (psi(x, y, t + h) - 2 * psi(x, y, t) + psi(x, y, t - h)) / h**2
    ptx = (psi(x + h, y, t + h) - psi(x + h, y, t - h)
           - psi(x - h, y, t + h) + psi(x - h, y, t - h)) / (4 * h**2)
    lhs = params.a**2 * beta2 * pxx + params.a**2 * pyy
    rhs = ptt + 2.0 * params.M * params.a * ptx
    scale = max(abs(params.a**2 * beta2 * pxx), abs(params.a**2 * pyy),
                abs(ptt), abs(2.0 * params.M * params.a * ptx))
    return abs(lhs - rhs) / scale


def streamwise_parts_residual(x: float, xi: float, y: float, s: complex,
                              params: FlowParams) -> float:
    """Relative disagreement of the two sides of the streamwise
    integration-by-parts identity, each evaluated by independent quadrature.

    LHS: int exp(-lam u) d2/du2 H0 field; RHS: boundary terms plus
    lam^2 int exp(-lam u) H0 field.  Away from the axis both sides are
    proper integrals.
    """
    if y == 0:
        raise DomainError("both sides are divergent on the axis")
    s = complex(s)
    beta2 = 1.0 - params.M**2
    c = 1j * s / (params.a * np.sqrt(beta2))
    lam = lambda_of(s, params)

    def rho(u):
        return np.sqrt((u - xi) ** 2 / beta2 + y * y)

    def h0_field(u):
        return _h0(c * rho(u))

    def d2_h0_field(u):
        r = rho(u)
        z = c * r
        h0, h1, _ = _core.hankel_pair_raw(z)
        zu = c * (u - xi) / (beta2 * r)
        zuu = c * (1.0 / (beta2 * r) - (u - xi) ** 2 / (beta2**2 * r**3))
        return -(h0 - h1 / z) * zu**2 - h1 * zuu

    decay = -lam.real + s.real / (params.a * beta2)
    osc = abs(lam.imag) + abs(c) / np.sqrt(beta2)

    def tail_total(f):
        t = _StreamwiseTail(lam, lambda v: np.exp(-lam * (v + xi)) * f(v + xi),
                            d_lo=x - xi, d_hi=x - xi, decay=decay, osc=osc,
                            inner=abs(y) / 4.0)
        return t.total

    lhs = tail_total(d2_h0_field)
    z_at_x = c * rho(np.array([x]))
    h0x, h1x, _ = _core.hankel_pair_raw(z_at_x)
    dx_h0 = -h1x[0] * c * (x - xi) / (beta2 * rho(np.array([x]))[0])
    rhs = (np.exp(-lam * x) * dx_h0
           + lam * np.exp(-lam * x) * h0x[0]
           + lam * lam * tail_total(h0_field))
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs))
