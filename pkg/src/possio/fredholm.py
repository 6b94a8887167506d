"""Discretization and solution of the regularized chord equation.

The singular equation  int kern(x, xi, s) p(xi) dxi = wbar(x)  is normalized
by gamma = iU/(2(1-M^2)) so that its dominant part is the finite Hilbert
transform.  Substituting r = H[p] (with the zero-mean-cofactor inverse from
:mod:`possio.cheb`) turns it into a second-kind equation

    (I + N_s) r = gamma * wbar,      N_s = gamma * K_s o H^{-1},

with N_s compact (its kernel is log-singular only), so the machinery of
2-modified Fredholm determinants applies: det2 = det(I + N) exp(-tr N), a
convergent series expansion with Hilbert-Schmidt-controlled terms, and a
Carleman-type pointwise bound on det2-times-resolvent.

The unknown returns to pressure space through p = H^{-1}[r], which restores
the inverse-square-root edge behavior with a bounded trailing edge.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import cheb
from ._quadutil import gauss_nodes_weights, graded_breaks, tanh_sinh_panel
from .errors import CharacteristicValueError, DomainError, GridMismatchError
from .flowconfig import FlowParams
from .kernel import get_engine, kernel_constants

DIAG_CLIP = 1e-13          # closest approach of a quadrature node to x_i
ROW_WINDOW_SCALE = 3.0     # half-width of the double-exponential window, *1/n
ROW_PANEL_CAP = 5.0        # outer panel cap in radians, *1/n
CHAR_FLOOR = 1e-12         # |det2| floor (relative to exp(hs^2/2)) for solves


def _row_nodes(phi_i: float, n: int):
    """Quadrature nodes/weights on [0, pi] for one collocation row.

    Double-exponential panels absorb the log singularity at phi_i; outside
    them the panels grow geometrically away from the window and are capped so
    the highest Chebyshev mode stays resolved.
    """
    w = min(ROW_WINDOW_SCALE / n, 0.5 * phi_i, 0.5 * (np.pi - phi_i))
    cap = ROW_PANEL_CAP / n
    xs, ws = [], []
    for a, b in ((phi_i - w, phi_i), (phi_i, phi_i + w)):
        nodes, weights = tanh_sinh_panel(a, b)
        xs.append(nodes)
        ws.append(weights)
    left = graded_breaks(0.0, phi_i - w, phi_i, w, cap)
    right = graded_breaks(phi_i + w, np.pi, phi_i, w, cap)
    for br in (left, right):
        nodes, weights = gauss_nodes_weights(br)
        xs.append(nodes)
        ws.append(weights)
    return np.concatenate(xs), np.concatenate(ws)


def _coefficient_lift_matrix(grid: cheb.ChebGrid) -> np.ndarray:
    """Matrix taking node values of r to the T-coefficients of the cofactor
    of H^{-1}[r], column by column through the tested transform path."""
    n = grid.n
    out = np.empty((n, n))
    e = np.zeros(n)
    for j in range(n):
        e[:] = 0.0
        e[j] = 1.0
        d = cheb.u_coefficients(grid, e).real
        out[1:, j] = d[: n - 1]
        out[0, j] = 0.0
    return out


class DiscretizedOperator:
    """The collocation matrix of N_s on a first-kind grid, plus determinant
    and norm data derived from it."""

    def __init__(self, s, params, grid, gamma, matrix, weights):
        self.s = complex(s)
        self.params = params
        self.grid = grid
        self.gamma = complex(gamma)
        self.matrix = matrix
        self.weights = weights      # plain-measure weights (pi/n) sin(theta)

    @property
    def n(self) -> int:
        return self.grid.n

    @cached_property
    def kernel_values(self) -> np.ndarray:
        """Pointwise Schmidt-kernel samples N(x_i, x_j) = M_ij / w_j."""
        return self.matrix / self.weights[None, :]

    @cached_property
    def hs_norm(self) -> float:
        sym = self.matrix * np.sqrt(self.weights[:, None] / self.weights[None, :])
        return float(np.linalg.norm(sym))

    @cached_property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    @cached_property
    def det2(self) -> complex:
        sign, logabs = np.linalg.slogdet(np.eye(self.n) + self.matrix)
        return complex(sign * np.exp(logabs - self.trace))

    def power_traces(self, kmax: int) -> np.ndarray:
        """tr(N^k) for k = 1..kmax."""
        out = np.empty(kmax, dtype=complex)
        pk = self.matrix
        out[0] = np.trace(pk)
        for k in range(1, kmax):
            pk = pk @ self.matrix
            out[k] = np.trace(pk)
        return out

    def row_col_norms(self):
        """L2 norms of the Schmidt kernel in each variable,
        alpha_i = ||N(x_i, .)||, beta_j = ||N(., x_j)||."""
        nv2 = np.abs(self.kernel_values) ** 2
        alpha = np.sqrt(nv2 @ self.weights)
        beta = np.sqrt(self.weights @ nv2)
        return alpha, beta


def build_operator(s, params: FlowParams, n: int, *, kernel_fn=None,
                   gamma=None) -> DiscretizedOperator:
    """Assemble the discretized N_s.

    ``kernel_fn(x_i, xi_array)`` overrides the flow kernel (the regular part
    route); ``gamma`` then defaults to 1 so synthetic operators with known
    spectra can be injected by tests and by the scan machinery.
    """
    grid = cheb.cheb_grid(n, cheb.FIRST_KIND)
    if kernel_fn is None:
        engine = get_engine(s, params)
        gamma = kernel_constants(s, params).normalizer if gamma is None else gamma

        def kernel_fn(x, xi):
            return engine.regular(x, xi).ravel()
    elif gamma is None:
        gamma = 1.0

    rowmat = np.empty((n, n), dtype=complex)
    karr = np.arange(n)
    for i in range(n):
        phi, wq = _row_nodes(grid.theta[i], n)
        xi = np.cos(phi)
        d = grid.nodes[i] - xi
        tight = np.abs(d) < DIAG_CLIP
        if tight.any():
            xi = xi.copy()
            xi[tight] = grid.nodes[i] - np.where(d[tight] >= 0, DIAG_CLIP, -DIAG_CLIP)
        kv = kernel_fn(grid.nodes[i], xi)
        rowmat[i] = (wq * kv) @ np.cos(phi[:, None] * karr[None, :])
    lift = _coefficient_lift_matrix(grid)
    matrix = gamma * (rowmat @ lift)
    weights = (np.pi / n) * np.sin(grid.theta)
    return DiscretizedOperator(s, params, grid, gamma, matrix, weights)


# ----------------------------------------------------- determinant series ---


def det2_series_terms(op: DiscretizedOperator, m_max: int = 8) -> np.ndarray:
    """Terms c_0..c_{m_max} of det2 = sum_m c_m, from the power-trace
    recursion; c_1 vanishes identically because the trace is removed."""
    p = op.power_traces(m_max)
    c = np.zeros(m_max + 1, dtype=complex)
    c[0] = 1.0
    for m in range(2, m_max + 1):
        acc = 0.0 + 0.0j
        for k in range(2, m + 1):
            acc += (-1) ** (k - 1) * p[k - 1] * c[m - k]
        c[m] = acc / m
    return c


def det2_series_bound(hs_norm: float, m: int) -> float:
    """|c_m| <= (e/m)^(m/2) hs^m, the Hilbert-Schmidt term bound."""
    if m == 0:
        return 1.0
    if m == 1:
        return 0.0
    return (np.e / m) ** (m / 2.0) * hs_norm**m


@dataclass(frozen=True)
class Resolvent:
    """H = (I + N)^{-1} N, so that (I - H)(I + N) = I."""

    operator: DiscretizedOperator
    matrix: np.ndarray

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ values


def resolvent(op: DiscretizedOperator) -> Resolvent:
    h = np.linalg.solve(np.eye(op.n) + op.matrix, op.matrix)
    return Resolvent(op, h)


def carleman_bound_sides(op: DiscretizedOperator):
    """Pointwise Carleman-type control of the resolvent kernel:

        |det2 * H(x_i, x_j)| <= exp(hs^2/2) (|N(x_i, x_j)| + sqrt(e) a_i b_j)

    returned as (lhs, rhs) matrices for inspection.
    """
    h = resolvent(op).matrix / op.weights[None, :]
    lhs = np.abs(op.det2 * h)
    alpha, beta = op.row_col_norms()
    rhs = np.exp(op.hs_norm**2 / 2.0) * (
        np.abs(op.kernel_values) + np.sqrt(np.e) * np.outer(alpha, beta)
    )
    return lhs, rhs


# ---------------------------------------------------------------- solving ---


@dataclass(frozen=True)
class PressureSolution:
    """Solution of the chord equation at one transform point."""

    operator: DiscretizedOperator
    downwash_values: np.ndarray    # wbar at the nodes
    rhs: np.ndarray                # gamma * wbar * exp(-s c x)
    r_values: np.ndarray           # bounded intermediate r = H[p]
    pressure: cheb.ChordFunction   # inverse-sqrt class, cofactor stored
    residual_inf: float
    det2: complex
    hs_norm: float

    @property
    def s(self) -> complex:
        return self.operator.s


def solve_pressure(s, params: FlowParams, downwash, n: int, *,
                   operator: DiscretizedOperator | None = None,
                   det_floor: float = CHAR_FLOOR) -> PressureSolution:
    """Solve (I + N_s) r = gamma wbar exp(-scx), then lift p = H^{-1}[r].

    ``downwash`` is a callable giving the transformed downwash on the chord.
    Refuses to solve within ``det_floor`` (relative to the det2 a-priori
    scale) of a characteristic value.
    """
    op = operator if operator is not None else build_operator(s, params, n)
    if operator is not None and operator.grid.n != n:
        raise GridMismatchError(f"operator has n={operator.grid.n}, requested {n}")
    grid = op.grid
    wbar = np.asarray(downwash(grid.nodes), dtype=complex)
    if wbar.shape != grid.nodes.shape:
        raise GridMismatchError("downwash must return one value per node")
    scale = np.exp(op.hs_norm**2 / 2.0)
    if abs(op.det2) <= det_floor * scale:
        raise CharacteristicValueError(
            f"s={op.s} is within {det_floor} of a characteristic value "
            f"(|det2| = {abs(op.det2):.3e}, scale {scale:.3e})"
        )
    rhs = op.gamma * wbar * np.exp(-op.s * op.params.c * grid.nodes)
    r = np.linalg.solve(np.eye(op.n) + op.matrix, rhs)
    pressure = cheb.inverse_finite_hilbert(cheb.bounded_function(grid, r))
    # residual of the full normalized equation, evaluated on the grid
    back = cheb.finite_hilbert(pressure).values + op.matrix @ r
    residual = float(np.max(np.abs(back - rhs)))
    return PressureSolution(
        operator=op,
        downwash_values=wbar,
        rhs=rhs,
        r_values=r,
        pressure=pressure,
        residual_inf=residual,
        det2=op.det2,
        hs_norm=op.hs_norm,
    )


# ------------------------------------------------------------------- scan ---


@dataclass(frozen=True)
class ScanResult:
    sigma_values: np.ndarray
    nu_values: np.ndarray
    det_values: np.ndarray         # shape (n_nu, n_sigma)
    flagged: np.ndarray            # small-|det2| mask, same shape
    windings: list                 # (sigma, nu) plaquette centers with winding
    zeros: list                    # refined characteristic values


def _plaquette_winding(corners) -> float:
    """Net phase advance of det2 around a grid plaquette."""
    total = 0.0
    for k in range(4):
        dz = corners[(k + 1) % 4] / corners[k]
        total += np.angle(dz)
    return total


def scan_characteristic_values(params: FlowParams, sigma_range, nu_range,
                               n_sigma: int, n_nu: int, n: int, *,
                               operator_factory=None, flag_ratio: float = 1e-8,
                               refine: bool = True, max_iter: int = 40) -> ScanResult:
    """Sample det2 on a rectangle of the transform plane and locate its zeros.

    Candidates are flagged two ways: sample magnitudes below ``flag_ratio``
    times the rectangle maximum, and plaquettes around which the phase winds.
    Candidates are polished by a complex secant iteration on det2.

    ``operator_factory(s) -> matrix`` substitutes the discretized operator,
    which lets synthetic operators with known characteristic values exercise
    the whole detection path.
    """
    def det_fn(s):
        if operator_factory is not None:
            m = np.asarray(operator_factory(s))
            sign, logabs = np.linalg.slogdet(np.eye(m.shape[0]) + m)
            return complex(sign * np.exp(logabs - np.trace(m)))
        return build_operator(s, params, n).det2

    sigmas = np.linspace(sigma_range[0], sigma_range[1], n_sigma)
    nus = np.linspace(nu_range[0], nu_range[1], n_nu)
    det = np.empty((n_nu, n_sigma), dtype=complex)
    for iy, nu in enumerate(nus):
        for ix, sg in enumerate(sigmas):
            det[iy, ix] = det_fn(complex(sg, nu))

    flagged = np.abs(det) < flag_ratio * np.abs(det).max()
    windings = []
    seeds = []
    for iy in range(n_nu - 1):
        for ix in range(n_sigma - 1):
            corners = [det[iy, ix], det[iy, ix + 1],
                       det[iy + 1, ix + 1], det[iy + 1, ix]]
            if min(abs(c) for c in corners) == 0.0:
                seeds.append(complex(sigmas[ix], nus[iy]))
                continue
            wind = _plaquette_winding(corners)
            if abs(wind) > np.pi:
                center = complex(0.5 * (sigmas[ix] + sigmas[ix + 1]),
                                 0.5 * (nus[iy] + nus[iy + 1]))
                windings.append((center, wind))
                seeds.append(center)
    for iy, ix in zip(*np.nonzero(flagged)):
        seeds.append(complex(sigmas[ix], nus[iy]))

    zeros = []
    if refine:
        step = complex(sigmas[1] - sigmas[0] if n_sigma > 1 else 1e-3,
                       nus[1] - nus[0] if n_nu > 1 else 1e-3)
        tol = 1e-10 * max(abs(sigma_range[1]), abs(nu_range[1]), 1.0)
        for seed in seeds:
            z0, z1 = seed + 0.25 * step, seed - 0.25 * step
            f0, f1 = det_fn(z0), det_fn(z1)
            converged = False
            for _ in range(max_iter):
                if f1 == f0:
                    break
                z2 = z1 - f1 * (z1 - z0) / (f1 - f0)
                z0, f0, z1 = z1, f1, z2
                f1 = det_fn(z2)
                if abs(z1 - z0) < tol:
                    converged = True
                    break
            if converged and not any(abs(z1 - z) < 100 * tol for z in zeros):
                zeros.append(z1)
    return ScanResult(sigmas, nus, det, flagged, windings, zeros)
