"""Downwash ingestion, Laplace transform, decay diagnostics, Bromwich inversion.

Downwash enters in one of three modes: a harmonic oscillation with a known
closed-form transform, a user-supplied transform closure, or raw time samples
that are transformed by quadrature.  Inversion is a literal truncated contour
integral on a vertical line, trapezoidal in the frequency variable, guarded
by an embedded-coarse self-convergence gate.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cheb
from .errors import ConfigError, ConvergenceError, DecayError, DomainError

HARMONIC = "harmonic"
LAPLACE_CLOSURE = "laplace_closure"
TIME_SAMPLES = "time_samples"

SIGMA_SHIFT_DEFAULT = 0.1      # harmonic mode solves at s = i k + this
NU_MAX_DEFAULT = 40.0
D_NU_DEFAULT = 0.05
DECAY_RATIO = 1e-6             # time-sample tail gate
GATE_REL = 1e-4                # embedded-coarse inversion gate


@dataclass(frozen=True)
class DownwashSpec:
    """One prescribed downwash, in whichever representation it arrived."""

    mode: str
    w0: cheb.ChordFunction | None = None
    frequency: float = 0.0
    closure: object = None            # callable (x, s) -> transform values
    closure_name: str = ""
    real_time_signal: bool = False
    t_grid: np.ndarray | None = None
    x_grid: np.ndarray | None = None
    samples: np.ndarray | None = None  # shape (nt, nx)

    def __post_init__(self):
        if self.mode == HARMONIC:
            if self.w0 is None or not np.isfinite(self.frequency):
                raise ConfigError("harmonic downwash needs finite k and a profile")
            if self.w0.endpoint_class != cheb.BOUNDED:
                raise ConfigError("harmonic profile must be bounded on the chord")
            if not np.all(np.isfinite(self.w0.values)):
                raise ConfigError("harmonic profile must be bounded on the chord")
        elif self.mode == LAPLACE_CLOSURE:
            if not callable(self.closure):
                raise ConfigError("closure mode needs a callable (x, s)")
        elif self.mode == TIME_SAMPLES:
            t = np.asarray(self.t_grid, dtype=float)
            v = np.asarray(self.samples)
            if t.ndim != 1 or v.shape[0] != t.size:
                raise ConfigError("time samples need matching t grid and rows")
            tail = np.abs(v[t >= t[0] + 0.75 * (t[-1] - t[0])])
            peak = np.abs(v).max()
            if peak > 0 and tail.max() > DECAY_RATIO * peak:
                raise DecayError(
                    f"last-quarter amplitude {tail.max():.3e} exceeds "
                    f"{DECAY_RATIO} of the peak {peak:.3e}; transform "
                    "truncation is not justified"
                )
        else:
            raise ConfigError(f"unknown downwash mode {self.mode!r}")


def harmonic_downwash(w0: cheb.ChordFunction, k: float) -> DownwashSpec:
    """w(x, t) = w0(x) exp(i k t); transform w0(x)/(s - ik)."""
    return DownwashSpec(mode=HARMONIC, w0=w0, frequency=float(k),
                        closure_name="harmonic", real_time_signal=(k == 0.0))


def step_downwash(profile) -> DownwashSpec:
    """w(x, t) = w0(x) for t > 0; transform w0(x)/s."""
    return DownwashSpec(
        mode=LAPLACE_CLOSURE,
        closure=lambda x, s: np.asarray(profile(x), dtype=complex) / s,
        closure_name="step", real_time_signal=True)


def decaying_downwash(profile, rate: float) -> DownwashSpec:
    """w(x, t) = w0(x) exp(-rate t); transform w0(x)/(s + rate)."""
    if rate <= 0:
        raise ConfigError("decay rate must be positive")
    return DownwashSpec(
        mode=LAPLACE_CLOSURE,
        closure=lambda x, s: np.asarray(profile(x), dtype=complex) / (s + rate),
        closure_name="decaying-exponential", real_time_signal=True)


def time_sample_downwash(t_grid, x_grid, samples) -> DownwashSpec:
    return DownwashSpec(mode=TIME_SAMPLES, t_grid=np.asarray(t_grid, float),
                        x_grid=np.asarray(x_grid, float),
                        samples=np.asarray(samples), real_time_signal=True)


def harmonic_solve_point(spec: DownwashSpec,
                         sigma_shift: float = SIGMA_SHIFT_DEFAULT) -> complex:
    """The single transform point for the harmonic bypass."""
    if spec.mode != HARMONIC:
        raise DomainError("only harmonic downwash has a bypass point")
    return complex(sigma_shift, spec.frequency)


def laplace_transform(spec: DownwashSpec, s: complex,
                      grid: cheb.ChebGrid | None = None) -> cheb.ChordFunction:
    """The transformed downwash on the solver grid at one s."""
    s = complex(s)
    if spec.mode == HARMONIC:
        grid = grid if grid is not None else spec.w0.grid
        if grid.n != spec.w0.grid.n:
            vals = cheb.t_eval(
                cheb.t_coefficients(spec.w0.grid, spec.w0.values), grid.nodes)
        else:
            vals = np.asarray(spec.w0.values, dtype=complex)
        return cheb.bounded_function(grid, vals / (s - 1j * spec.frequency))
    if spec.mode == LAPLACE_CLOSURE:
        if grid is None:
            raise DomainError("closure transforms need a target grid")
        return cheb.bounded_function(grid, spec.closure(grid.nodes, s))
    # time samples: trapezoid in t, then chordwise interpolation
    if s.real <= 0:
        raise DomainError("sample transforms require Re s > 0")
    if grid is None:
        raise DomainError("sample transforms need a target grid")
    t = spec.t_grid
    kernel = np.exp(-s * t)
    vals = np.trapezoid(kernel[:, None] * spec.samples, t, axis=0)
    if spec.x_grid.size == 1:
        out = np.full(grid.n, vals[0], dtype=complex)
    elif spec.x_grid.size == grid.n and np.allclose(spec.x_grid, grid.nodes):
        out = vals
    else:
        out = np.interp(grid.nodes, spec.x_grid, vals.real).astype(complex)
        out += 1j * np.interp(grid.nodes, spec.x_grid, vals.imag)
    return cheb.bounded_function(grid, out)


# ------------------------------------------------------ decay hypothesis ---


@dataclass(frozen=True)
class DecayHypothesisReport:
    """Advisory comparison of the transform norm against the
    double-exponential decay envelope exp(-e^|nu| (1+|nu|)^(4+eps))."""

    sigma: float
    epsilon: float
    nu_grid: np.ndarray
    norms: np.ndarray
    bounds: np.ndarray
    met: np.ndarray
    crossover_nu: float | None      # first nu where the bound fails
    met_beyond_nu: float | None     # bound holds for every nu >= this


def check_decay_hypothesis(spec: DownwashSpec, grid: cheb.ChebGrid,
                           sigma: float, epsilon: float = 0.5,
                           nu_grid=None) -> DecayHypothesisReport:
    nu_grid = np.linspace(0.0, 5.0, 51) if nu_grid is None else np.asarray(nu_grid)
    norms = np.empty(nu_grid.size)
    for j, nu in enumerate(nu_grid):
        w = laplace_transform(spec, complex(sigma, nu), grid)
        mag2 = cheb.bounded_function(grid, np.abs(w.values) ** 2)
        norms[j] = float(np.sqrt(np.real(mag2.integrate())))
    with np.errstate(over="ignore"):
        bounds = np.exp(-np.exp(np.abs(nu_grid)) * (1 + np.abs(nu_grid)) ** (4 + epsilon))
    met = norms <= bounds   # equality keeps an identically-zero transform "met"
    crossover = None
    if not met.all():
        crossover = float(nu_grid[int(np.argmin(met))])
    met_beyond = None
    if met[-1]:
        idx = np.nonzero(~met)[0]
        met_beyond = float(nu_grid[idx[-1] + 1]) if idx.size else float(nu_grid[0])
    return DecayHypothesisReport(sigma, epsilon, nu_grid, norms, bounds, met,
                                 crossover, met_beyond)


# --------------------------------------------------------------- contour ---


@dataclass(frozen=True)
class ContourGrid:
    """Uniform symmetric sampling of the line Re s = sigma."""

    sigma: float
    nu: np.ndarray = field(repr=False)

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float)
        if nu.size < 3 or nu.size % 2 == 0:
            raise ConfigError("contour needs an odd number of points")
        d = np.diff(nu)
        step = (nu[-1] - nu[0]) / (nu.size - 1)
        if not np.allclose(d, step, rtol=0, atol=1e-9 * max(1.0, abs(nu[-1]))):
            raise ConfigError("contour grid must be uniform")
        if abs(nu[0] + nu[-1]) > 1e-12 * max(1.0, abs(nu[-1])):
            raise ConfigError("contour grid must be symmetric about 0")
        if np.abs(nu).min() > 1e-12:
            raise ConfigError("contour grid must include nu = 0")

    @property
    def d_nu(self) -> float:
        return float(self.nu[1] - self.nu[0])

    @property
    def points(self) -> np.ndarray:
        return self.sigma + 1j * self.nu

    @property
    def half_indices(self) -> np.ndarray:
        """Indices of the nu >= 0 points, for mirrored evaluation."""
        return np.nonzero(self.nu >= -1e-15)[0]


def contour_grid(sigma: float, nu_max: float = NU_MAX_DEFAULT,
                 d_nu: float = D_NU_DEFAULT) -> ContourGrid:
    if sigma <= 0 or nu_max <= 0 or d_nu <= 0:
        raise ConfigError("contour parameters must be positive")
    m = int(round(nu_max / d_nu))
    if m < 1:
        raise ConfigError("contour must contain at least one positive frequency")
    return ContourGrid(float(sigma), np.arange(-m, m + 1) * d_nu)


def mirror_half_samples(grid: ContourGrid, half_values: np.ndarray,
                        parity: int = 1) -> np.ndarray:
    """Extend samples given on nu >= 0 to the full contour using the
    reflection F(conj s) = parity * conj F(s)."""
    half_values = np.asarray(half_values)
    m = grid.nu.size // 2
    if half_values.shape[0] != m + 1:
        raise ConfigError("need one sample per nonnegative contour point")
    full = np.concatenate([
        (parity * np.conj(half_values[1:]))[::-1], half_values], axis=0)
    return full


def bromwich_invert(grid: ContourGrid, samples: np.ndarray, t, *,
                    gate_rel: float = GATE_REL, check: bool = True):
    """(1/2πi) int e^{st} F(s) ds over the truncated vertical line.

    ``samples`` holds F at grid.points (extra trailing axes allowed); ``t``
    may be scalar or a vector.  An embedded coarse rule (half the range,
    every second point) must agree to ``gate_rel`` relative, otherwise the
    truncation is declared unconverged.
    """
    samples = np.asarray(samples)
    if samples.shape[0] != grid.nu.size:
        raise ConfigError("one sample per contour point required")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    phase = np.exp(np.multiply.outer(t_arr, grid.sigma + 1j * grid.nu))
    fine = np.tensordot(phase, samples, axes=(1, 0)) * (grid.d_nu / (2 * np.pi))
    if check:
        m = grid.nu.size // 2
        q = m // 4       # coarse rule: half the range at twice the step
        if q < 2:
            raise ConfigError(
                "contour too small for the self-convergence gate; "
                "provide more points or pass check=False"
            )
        sel = m + 2 * np.arange(-q, q + 1)
        coarse = np.tensordot(phase[:, sel], samples[sel], axes=(1, 0)) \
            * (2 * grid.d_nu / (2 * np.pi))
        scale = np.abs(fine).max()
        if scale > 0 and np.abs(fine - coarse).max() > gate_rel * scale:
            raise ConvergenceError(
                "contour truncation not converged: embedded coarse rule "
                f"differs by {np.abs(fine - coarse).max() / scale:.3e} "
                f"(gate {gate_rel:.1e}); widen nu_max or refine d_nu"
            )
    out = fine if np.ndim(t) else fine[0]
    return out
