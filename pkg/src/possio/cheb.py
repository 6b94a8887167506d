"""Chebyshev grids, transforms, and the finite Hilbert transform on [-1, 1].

The airfoil chord is discretized on first-kind Chebyshev nodes.  Functions on
the chord carry an endpoint classification: either bounded, or carrying an
inverse-square-root edge singularity, in which case the stored samples are
the bounded cofactor g of f = g / sqrt(1 - x^2).  The finite Hilbert
transform

    (T f)(x) = (1/pi) PV int_{-1}^{1} f(xi) / (xi - x) dxi

maps the two classes into each other through the classical pairs

    T[ T_k / sqrt(1-x^2) ] = U_{k-1}   (k >= 1,  T_0 annihilated)
    T[ sqrt(1-x^2) U_{k-1} ] = -T_k

and the inverse used here selects the square-root-singular solution whose
cofactor has zero mean (zero T_0 coefficient).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import DomainError, GridMismatchError

FIRST_KIND = "first_kind"
SECOND_KIND = "second_kind"

BOUNDED = "bounded"
INVERSE_SQRT_SINGULAR = "inverse_sqrt_singular"


def _fejer1_weights(theta: np.ndarray, n: int) -> np.ndarray:
    m = np.arange(1, n // 2 + 1)
    # w_i = (2/n) (1 - 2 sum_m cos(2 m theta_i) / (4 m^2 - 1))
    c = np.cos(2.0 * np.outer(theta, m))
    return (2.0 / n) * (1.0 - 2.0 * (c / (4.0 * m**2 - 1.0)).sum(axis=1))


def _fejer2_weights(theta: np.ndarray, n: int) -> np.ndarray:
    m = np.arange((n + 1) // 2)
    s = np.sin(np.outer(theta, 2 * m + 1))
    return (4.0 / (n + 1)) * np.sin(theta) * (s / (2 * m + 1)).sum(axis=1)


@dataclass(frozen=True)
class ChebGrid:
    """Chord collocation grid; nodes are strictly decreasing in x."""

    n: int
    kind: str
    nodes: np.ndarray
    theta: np.ndarray
    quad_weights: np.ndarray

    def __post_init__(self):
        for a in (self.nodes, self.theta, self.quad_weights):
            a.flags.writeable = False

    def gauss_chebyshev_weights(self) -> np.ndarray:
        """Weights for int f(x)/sqrt(1-x^2) dx = (pi/n) sum f(x_i)."""
        if self.kind != FIRST_KIND:
            raise DomainError("weighted quadrature needs a first-kind grid")
        return np.full(self.n, np.pi / self.n)


def cheb_grid(n: int, kind: str = FIRST_KIND) -> ChebGrid:
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise DomainError(f"grid size must be an integer >= 2, got {n!r}")
    if kind == FIRST_KIND:
        theta = (2 * np.arange(n) + 1) * np.pi / (2 * n)
        w = _fejer1_weights(theta, n)
    elif kind == SECOND_KIND:
        theta = np.arange(1, n + 1) * np.pi / (n + 1)
        w = _fejer2_weights(theta, n)
    else:
        raise DomainError(f"unknown grid kind {kind!r}")
    return ChebGrid(n=int(n), kind=kind, nodes=np.cos(theta), theta=theta, quad_weights=w)


# ------------------------------------------------------------- transforms ---


def _dct2(v: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(v):
        return scipy.fft.dct(v.real, type=2) + 1j * scipy.fft.dct(v.imag, type=2)
    return scipy.fft.dct(v, type=2)


def _dct3(v: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(v):
        return scipy.fft.dct(v.real, type=3) + 1j * scipy.fft.dct(v.imag, type=3)
    return scipy.fft.dct(v, type=3)


def _dst2(v: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(v):
        return scipy.fft.dst(v.real, type=2) + 1j * scipy.fft.dst(v.imag, type=2)
    return scipy.fft.dst(v, type=2)


def _dst3(v: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(v):
        return scipy.fft.dst(v.real, type=3) + 1j * scipy.fft.dst(v.imag, type=3)
    return scipy.fft.dst(v, type=3)


def _require_first_kind(grid: ChebGrid):
    if grid.kind != FIRST_KIND:
        raise GridMismatchError("spectral transforms are defined on first-kind grids")


def t_coefficients(grid: ChebGrid, values: np.ndarray) -> np.ndarray:
    """Coefficients a with values_i = sum_k a_k T_k(x_i)."""
    _require_first_kind(grid)
    x = _dct2(np.asarray(values))
    a = x / grid.n
    a[0] *= 0.5
    return a


def t_values(grid: ChebGrid, coeffs: np.ndarray) -> np.ndarray:
    _require_first_kind(grid)
    x = np.asarray(coeffs, dtype=complex if np.iscomplexobj(coeffs) else float) * 0.5
    x = x.copy()
    x[0] = coeffs[0]
    return _dct3(x)


def u_coefficients(grid: ChebGrid, values: np.ndarray) -> np.ndarray:
    """Coefficients c with values_i = sum_k c_k U_k(x_i)."""
    _require_first_kind(grid)
    m = np.asarray(values) * np.sin(grid.theta)
    x = _dst2(m)
    c = x / grid.n
    c[-1] *= 0.5
    return c


def u_values(grid: ChebGrid, coeffs: np.ndarray) -> np.ndarray:
    _require_first_kind(grid)
    x = np.asarray(coeffs, dtype=complex if np.iscomplexobj(coeffs) else float) * 0.5
    x = x.copy()
    x[-1] = coeffs[-1]
    return _dst3(x) / np.sin(grid.theta)


def t_eval(coeffs: np.ndarray, x) -> np.ndarray:
    """Clenshaw evaluation of sum a_k T_k at arbitrary points."""
    x = np.asarray(x)
    b1 = np.zeros(x.shape, dtype=complex)
    b2 = np.zeros(x.shape, dtype=complex)
    for k in range(len(coeffs) - 1, 0, -1):
        b1, b2 = coeffs[k] + 2 * x * b1 - b2, b1
    return coeffs[0] + x * b1 - b2


def u_eval(coeffs: np.ndarray, x) -> np.ndarray:
    x = np.asarray(x)
    b1 = np.zeros(x.shape, dtype=complex)
    b2 = np.zeros(x.shape, dtype=complex)
    for k in range(len(coeffs) - 1, -1, -1):
        b1, b2 = coeffs[k] + 2 * x * b1 - b2, b1
    return b1


# ---------------------------------------------------------- chord functions ---


@dataclass(frozen=True)
class ChordFunction:
    """A function on the chord with an endpoint classification.

    For the inverse-square-root class, ``values`` holds the bounded cofactor
    g with f = g / sqrt(1 - x^2); for the bounded class it holds f itself.
    """

    grid: ChebGrid
    values: np.ndarray
    endpoint_class: str

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.grid.n,):
            raise GridMismatchError(
                f"expected {self.grid.n} samples, got shape {v.shape}"
            )
        if self.endpoint_class not in (BOUNDED, INVERSE_SQRT_SINGULAR):
            raise DomainError(f"unknown endpoint class {self.endpoint_class!r}")

    def point_values(self) -> np.ndarray:
        """Actual function values at the nodes (finite for interior nodes)."""
        if self.endpoint_class == BOUNDED:
            return np.asarray(self.values)
        return np.asarray(self.values) / np.sin(self.grid.theta)

    def integrate(self):
        """int_{-1}^{1} f(x) dx respecting the endpoint class."""
        if self.endpoint_class == BOUNDED:
            return np.asarray(self.values) @ self.grid.quad_weights
        return np.asarray(self.values) @ self.grid.gauss_chebyshev_weights()


def bounded_function(grid: ChebGrid, values) -> ChordFunction:
    return ChordFunction(grid, np.asarray(values, dtype=complex), BOUNDED)


def inverse_sqrt_function(grid: ChebGrid, cofactor_values) -> ChordFunction:
    return ChordFunction(grid, np.asarray(cofactor_values, dtype=complex), INVERSE_SQRT_SINGULAR)


def finite_hilbert(f: ChordFunction) -> ChordFunction:
    """(1/pi) PV int f(xi)/(xi - x) dxi on the same grid.

    Bounded input is expanded in the half-weighted basis sqrt(1-x^2) U_{k-1};
    singular input is expanded through its cofactor in T_k.  Components
    invisible on the grid (T_0 for singular input, the top U mode for bounded
    input) are annihilated or dropped; both are exactly invisible in the
    returned node values.
    """
    _require_first_kind(f.grid)
    n = f.grid.n
    out = np.zeros(n, dtype=complex)
    if f.endpoint_class == INVERSE_SQRT_SINGULAR:
        a = t_coefficients(f.grid, f.values)
        c = np.zeros(n, dtype=complex)
        c[: n - 1] = a[1:]
        return bounded_function(f.grid, u_values(f.grid, c))
    # f = sqrt(1-x^2) u: the U coefficients of u come from a DST of the raw
    # node values, since u_i sin(theta_i) = f_i
    x = _dst2(np.asarray(f.values, dtype=complex))
    c = x / n
    c[-1] *= 0.5
    b = np.zeros(n, dtype=complex)
    b[1:] = -c[: n - 1]
    out = t_values(f.grid, b)
    return bounded_function(f.grid, out)


def inverse_finite_hilbert(g: ChordFunction) -> ChordFunction:
    """The square-root-singular solution p of T[p] = g with zero-mean cofactor.

    Input must be bounded.  The returned function carries endpoint class
    inverse_sqrt_singular; its cofactor is sum_k d_k T_{k+1} where d are the
    U coefficients of g.  The top U mode of g (degree n-1) is not liftable on
    an n-point grid and is dropped.
    """
    _require_first_kind(g.grid)
    if g.endpoint_class != BOUNDED:
        raise DomainError("inversion expects a bounded right-hand side")
    n = g.grid.n
    d = u_coefficients(g.grid, g.values)
    b = np.zeros(n, dtype=complex)
    b[1:] = d[: n - 1]
    cof = t_values(g.grid, b)
    return inverse_sqrt_function(g.grid, cof)
