"""Space-time reconstruction of the induced fields from solved densities.

A solved family pairs transform points on a vertical contour with one chord
density per point.  Every field quantity is a chordwise moment of the density
against a doublet influence; the streamwise phase exp(s c x) is realized by
inverting at the shifted time t + c x instead of multiplying kernels.  A
one-point family (the harmonic shortcut) carries its time dependence as a
single exp(s t) factor in place of the contour sum.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _core, cheb
from ._quadutil import gauss_nodes_weights, graded_breaks
from .errors import ConfigError, DomainError, GridMismatchError
from .flowconfig import FlowParams, lambda_of
from .fredholm import CHAR_FLOOR, solve_pressure
from .kernel import _StreamwiseTail, _psi_difference_field, doublet_psi
from .laplace import (HARMONIC, SIGMA_SHIFT_DEFAULT, ContourGrid, DownwashSpec,
                      bromwich_invert, harmonic_solve_point, laplace_transform)

EXTRAPOLATION_HEIGHTS = (0.05, 0.025, 0.0125)
KUTTA_TOL = 1e-10
TANGENCY_TOL = 1e-2


def density_moment(density: cheb.ChordFunction, factor_values) -> complex:
    """int density(xi) factor(xi) dxi honoring the endpoint class.

    The inverse-square-root class integrates its bounded cofactor under the
    first-kind Gauss-Chebyshev rule, which absorbs the edge weight exactly;
    bounded densities pick up the sin(theta) Jacobian instead.
    """
    g = np.asarray(density.values) * np.asarray(factor_values)
    if density.endpoint_class == cheb.BOUNDED:
        g = g * np.sin(density.grid.theta)
    return complex(np.pi / density.grid.n * np.sum(g))


def _graded_moment(density: cheb.ChordFunction, kernel_of_xi, x_feature: float,
                   width: float) -> complex:
    """int density(xi) K(xi) dxi by a graded panel rule in the angle variable.

    The collocation rule cannot see kernel features narrower than the node
    spacing; near the chord the doublet influence concentrates in a strip of
    width ~|y| around xi = x, so the panels are graded into that point and
    capped so the density polynomial stays resolved.  The endpoint weight is
    absorbed by the cos substitution.
    """
    grid = density.grid
    coeffs = cheb.t_coefficients(grid, density.values)
    xf = float(np.clip(x_feature, -1.0, 1.0))
    phi_f = float(np.arccos(xf))
    sin_f = max(np.sin(phi_f), width, 1e-12)
    inner = max(width / (4.0 * sin_f), 1e-6)
    cap = max(3.0 / grid.n, inner)
    breaks = graded_breaks(0.0, np.pi, phi_f, inner, cap)
    nodes, weights = gauss_nodes_weights(breaks)
    xi = np.cos(nodes)
    vals = cheb.t_eval(coeffs, xi) * kernel_of_xi(xi)
    if density.endpoint_class == cheb.BOUNDED:
        vals = vals * np.sin(nodes)
    return complex(np.sum(weights * vals))


def _psi_dy_field(y: float, s: complex, params: FlowParams):
    """Height derivative of the doublet trace at y, as a function of v = x - xi."""
    beta2 = 1.0 - params.M**2
    rtb = np.sqrt(beta2)
    c = 1j * s / (params.a * rtb)

    def f(v):
        rho = np.sqrt(v * v / beta2 + y * y)
        h0, h1, _ = _core.hankel_pair_raw(c * rho)
        return c * (c * y * y * h0 / rho**2
                    + h1 * (rho * rho - 2.0 * y * y) / rho**3)

    decay_radial = s.real / (params.a * beta2)
    osc = abs(c) / rtb
    return f, decay_radial, osc


class DoubletColumn:
    """Streamwise tail integrals for one (s, y), shared across separations.

    Evaluates the potential-type doublet influence, and optionally its height
    derivative, at many d = x - xi from one cumulative table instead of
    re-integrating the upstream ray for every pair.
    """

    def __init__(self, s: complex, y: float, params: FlowParams,
                 d_lo: float, d_hi: float, want_dy: bool = False):
        s = complex(s)
        if s.real <= 0:
            raise DomainError("potential tail integral requires Re s > 0")
        if y == 0:
            raise DomainError("columns are defined off the chord line only")
        self.lam = lambda_of(s, params)
        self.u_speed = params.U
        f, decay_radial, osc = _psi_difference_field(y, s, params)
        decay = -self.lam.real + decay_radial
        osc_total = abs(self.lam.imag) + osc
        inner = abs(y) / 4.0
        lam = self.lam
        self._pot = _StreamwiseTail(
            lam, lambda v: np.exp(-lam * v) * f(v),
            d_lo, d_hi, decay, osc_total, inner)
        self._dpot = None
        if want_dy:
            fd, _, _ = _psi_dy_field(y, s, params)
            self._dpot = _StreamwiseTail(
                lam, lambda v: np.exp(-lam * v) * fd(v),
                d_lo, d_hi, decay, osc_total, inner)

    def potential(self, d):
        d = np.asarray(d, dtype=float)
        return np.exp(self.lam * d) / self.u_speed * self._pot.values(d)

    def dpotential_dy(self, d):
        if self._dpot is None:
            raise DomainError("column was built without the height derivative")
        d = np.asarray(d, dtype=float)
        return np.exp(self.lam * d) / self.u_speed * self._dpot.values(d)


# -------------------------------------------------------- solution family ---


@dataclass(frozen=True)
class SolveDiagnostics:
    """Per-point solver health snapshot kept for run manifests."""

    s: complex
    residual_inf: float
    rhs_scale: float
    abs_det2: float
    hs_norm: float


@dataclass(frozen=True)
class SolutionFamily:
    """Transform-domain chord densities, one per contour point.

    ``contour`` is None for a one-point family, whose inversion degenerates
    to multiplication by exp(s t).  ``diagnostics`` covers the points that
    were actually solved (mirrored points share their source's numbers).
    """

    points: np.ndarray
    pressures: tuple[cheb.ChordFunction, ...]
    params: FlowParams
    contour: ContourGrid | None = None
    diagnostics: tuple[SolveDiagnostics, ...] = ()

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=complex))
        object.__setattr__(self, "points", pts)
        if len(self.pressures) != pts.size:
            raise GridMismatchError("one density per transform point required")
        if self.contour is not None and not np.array_equal(
                self.contour.points, pts):
            raise GridMismatchError("family points disagree with the contour")
        n = self.pressures[0].grid.n
        if any(p.grid.n != n for p in self.pressures):
            raise GridMismatchError("all densities must share one grid")

    @property
    def single(self) -> bool:
        return self.contour is None

    @property
    def grid(self) -> cheb.ChebGrid:
        return self.pressures[0].grid

    def pressure_matrix(self) -> np.ndarray:
        """Density cofactor samples stacked per point, shape (ns, n)."""
        return np.stack([np.asarray(p.values) for p in self.pressures])

    def terms(self, samples: np.ndarray, t: float) -> np.ndarray:
        """Weighted per-point contributions to the inversion at time t."""
        samples = np.asarray(samples, dtype=complex)
        w = 1.0 if self.single else self.contour.d_nu / (2.0 * np.pi)
        return np.exp(self.points * t) * samples * w

    def invert(self, samples, t, check: bool = True):
        """Time reconstruction of per-point transform samples."""
        samples = np.asarray(samples, dtype=complex)
        if samples.shape[0] != self.points.size:
            raise GridMismatchError("one sample per transform point required")
        if self.single:
            phase = np.exp(self.points[0] * np.asarray(t, dtype=float))
            out = np.multiply.outer(phase, samples[0])
            if np.ndim(t) == 0 and samples[0].ndim == 0:
                return complex(out)
            return out
        return bromwich_invert(self.contour, samples, t, check=check)

    @classmethod
    def from_mapping(cls, mapping, params: FlowParams) -> "SolutionFamily":
        pts = sorted(mapping, key=lambda s: complex(s).imag)
        press = tuple(mapping[s] for s in pts)
        pts = np.array([complex(s) for s in pts])
        if pts.size == 1:
            return cls(pts, press, params, None)
        sigma = pts[0].real
        if np.abs(pts.real - sigma).max() > 1e-12 * max(1.0, abs(sigma)):
            raise ConfigError("family points must share one abscissa")
        return cls(pts, press, params, ContourGrid(sigma, pts.imag.copy()))


def _map_points(fn, items, workers):
    if workers is None:
        workers = int(os.environ.get("POSSIO_WORKERS", "1"))
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(fn, items))


def solve_family(params: FlowParams, downwash: DownwashSpec, n: int,
                 contour: ContourGrid | None = None, *,
                 sigma_shift: float = SIGMA_SHIFT_DEFAULT,
                 det_floor: float = CHAR_FLOOR,
                 workers: int | None = None) -> SolutionFamily:
    """Solve the chord equation across the contour (or at the harmonic point).

    For real time signals only the upper half contour is solved; the lower
    half follows from the reflection p(conj s) = -conj p(s).
    """
    grid = cheb.cheb_grid(n)

    def diag(sol):
        return SolveDiagnostics(
            s=complex(sol.s),
            residual_inf=sol.residual_inf,
            rhs_scale=float(np.max(np.abs(sol.rhs))),
            abs_det2=abs(sol.det2),
            hs_norm=sol.hs_norm,
        )

    if downwash.mode == HARMONIC and contour is None:
        s0 = harmonic_solve_point(downwash, sigma_shift)
        w = laplace_transform(downwash, s0, grid)
        sol = solve_pressure(s0, params, lambda x, v=w.values: v, n,
                             det_floor=det_floor)
        return SolutionFamily(np.array([s0]), (sol.pressure,), params, None,
                              (diag(sol),))
    if contour is None:
        raise ConfigError("non-harmonic downwash requires a contour grid")

    def solve_at(s):
        w = laplace_transform(downwash, s, grid)
        return solve_pressure(s, params, lambda x, v=w.values: v, n,
                              det_floor=det_floor)

    pts = contour.points
    if downwash.real_time_signal:
        half = contour.half_indices
        sols = _map_points(solve_at, pts[half], workers)
        press: list = [None] * pts.size
        m = pts.size // 2
        for idx, sol in zip(half, sols):
            press[idx] = sol.pressure
            if idx != m:
                press[2 * m - idx] = cheb.inverse_sqrt_function(
                    grid, -np.conj(sol.pressure.values))
    else:
        sols = _map_points(solve_at, pts, workers)
        press = [sol.pressure for sol in sols]
    return SolutionFamily(pts.copy(), tuple(press), params, contour,
                          tuple(diag(sol) for sol in sols))


# ------------------------------------------------------- field evaluation ---


@dataclass(frozen=True)
class FieldSample:
    """One probe of the reconstructed fields.

    ``contributions`` holds the running partial sums of the inversion over
    the transform points, as a convergence diagnostic.
    """

    x: float
    y: float
    t: float
    phi: complex | None
    psi: complex | None
    contributions: np.ndarray


def _transform_brackets(family: SolutionFamily, x: float, y: float,
                        kind: str) -> np.ndarray:
    """Per-point transform-side field brackets at the probe (x, y)."""
    out = np.empty(family.points.size, dtype=complex)
    width = max(abs(y), 1e-3)
    if kind == "psi":
        for j, (s, p) in enumerate(zip(family.points, family.pressures)):
            out[j] = _graded_moment(
                p, lambda xi: doublet_psi(x, y, xi, s, family.params), x, width)
        return out
    if y == 0:
        if x > -1.0:
            raise DomainError(
                "the on-axis potential is distributional on the chord "
                "and wake; probe off the line y = 0 or upstream of it")
        out[:] = 0.0
        return out
    d_lo, d_hi = x - 1.0, x + 1.0
    for j, (s, p) in enumerate(zip(family.points, family.pressures)):
        col = DoubletColumn(s, y, family.params, d_lo, d_hi,
                            want_dy=(kind == "dphi_dy"))
        fn = col.dpotential_dy if kind == "dphi_dy" else col.potential
        out[j] = _graded_moment(p, lambda xi: fn(x - xi), x, width)
    return out


def evaluate_phi(x: float, y: float, t: float, family: SolutionFamily,
                 params: FlowParams | None = None, *,
                 check: bool = True) -> FieldSample:
    """Velocity potential at one probe, by the doublet-layer reconstruction."""
    params = family.params if params is None else params
    brackets = _transform_brackets(family, float(x), float(y), "phi")
    t_eff = float(t) + params.c * float(x)
    terms = family.terms(brackets, t_eff)
    value = family.invert(brackets, t_eff, check=check)
    return FieldSample(float(x), float(y), float(t), complex(value), None,
                       np.cumsum(terms))


def evaluate_psi(x: float, y: float, t: float, family: SolutionFamily,
                 params: FlowParams | None = None, *,
                 check: bool = True) -> FieldSample:
    """Acceleration potential at one probe; exactly zero on y = 0 off chord."""
    params = family.params if params is None else params
    brackets = _transform_brackets(family, float(x), float(y), "psi")
    t_eff = float(t) + params.c * float(x)
    terms = family.terms(brackets, t_eff)
    value = family.invert(brackets, t_eff, check=check)
    return FieldSample(float(x), float(y), float(t), None, complex(value),
                       np.cumsum(terms))


def evaluate_point(x: float, y: float, t: float, family: SolutionFamily, *,
                   check: bool = True) -> FieldSample:
    """Both fields at one probe (the CSV row of the field interface)."""
    phi = evaluate_phi(x, y, t, family, check=check)
    psi = evaluate_psi(x, y, t, family, check=check)
    return FieldSample(phi.x, phi.y, phi.t, phi.phi, psi.psi,
                       phi.contributions)


# ----------------------------------------------------- verification probes ---


def _neville_to_zero(heights, values):
    """Polynomial extrapolation of values(h) to h = 0 along axis 0."""
    y = [float(h) for h in heights]
    rows = [np.asarray(v, dtype=complex) for v in values]
    k = len(rows)
    for level in range(1, k):
        rows = [
            (y[i] * rows[i + 1] - y[i + level] * rows[i])
            / (y[i] - y[i + level])
            for i in range(k - level)
        ]
    return rows[0]


@dataclass(frozen=True)
class FlowTangencyReport:
    """Extrapolated normal flow at the chord against the prescribed downwash."""

    probes: np.ndarray
    t: float
    heights: tuple[float, ...]
    extrapolated: np.ndarray
    target: np.ndarray
    residuals: np.ndarray
    scale: float
    relative: float
    flagged: np.ndarray
    tolerance: float


def flow_tangency_residual(family: SolutionFamily, downwash: DownwashSpec,
                           probes, *, t: float = 1.0,
                           heights=EXTRAPOLATION_HEIGHTS,
                           tolerance: float = TANGENCY_TOL) -> FlowTangencyReport:
    """End-to-end correctness functional: d(phi)/dy at y -> 0+ versus w.

    The normal derivative is evaluated analytically at a ladder of heights
    and extrapolated to the chord; nothing is re-differenced numerically.
    """
    probes = np.atleast_1d(np.asarray(probes, dtype=float))
    dner = np.empty((family.points.size, len(heights), probes.size),
                    dtype=complex)
    for j, (s, p) in enumerate(zip(family.points, family.pressures)):
        for h, yh in enumerate(heights):
            col = DoubletColumn(s, yh, family.params,
                                float(probes.min()) - 1.0,
                                float(probes.max()) + 1.0, want_dy=True)
            for i, xp in enumerate(probes):
                dner[j, h, i] = _graded_moment(
                    p, lambda xi: col.dpotential_dy(xp - xi), xp, yh)
    extrap_hat = _neville_to_zero(heights, [dner[:, h, :] for h in
                                            range(len(heights))])
    extrapolated = np.empty(probes.size, dtype=complex)
    target = np.empty(probes.size, dtype=complex)
    for i, xp in enumerate(probes):
        t_eff = t + family.params.c * xp
        extrapolated[i] = np.sum(family.terms(extrap_hat[:, i], t_eff))
        # target downwash in the same time convention as the reconstruction
        w_hat = np.array([
            _downwash_at(downwash, s, xp, family.grid)
            for s in family.points])
        target[i] = np.sum(family.terms(w_hat, float(t)))
    residuals = np.abs(extrapolated - target)
    scale = float(np.abs(target).max())
    relative = float(residuals.max() / scale) if scale > 0 else (
        0.0 if residuals.max() == 0 else np.inf)
    flagged = residuals > tolerance * max(scale, 1e-300)
    return FlowTangencyReport(probes, float(t), tuple(heights), extrapolated,
                              target, residuals, scale, relative, flagged,
                              tolerance)


def _downwash_at(downwash: DownwashSpec, s: complex, x: float,
                 grid: cheb.ChebGrid) -> complex:
    """Transformed downwash at one chord station via its polynomial rep."""
    w = laplace_transform(downwash, s, grid)
    coeffs = cheb.t_coefficients(grid, w.values)
    return complex(cheb.t_eval(coeffs, np.array([x]))[0])


@dataclass(frozen=True)
class PdeReport:
    """Finite-difference residual of the governing equation at probes."""

    probes: np.ndarray
    h_values: np.ndarray
    residuals: np.ndarray   # shape (n_probes, n_levels)
    ratios: np.ndarray      # per halving; >= 3 indicates second order
    scale: float


def pde_residual(target, params: FlowParams, probes, *, h: float = 0.05,
                 levels: int = 3, check: bool = False) -> PdeReport:
    """a^2(1-M^2) phi_xx + a^2 phi_yy - phi_tt - 2 M a phi_xt at probes.

    ``target`` is a solution family or a callable phi(x, y, t).
    """
    if isinstance(target, SolutionFamily):
        fam = target

        def fn(xx, yy, tt):
            return evaluate_phi(xx, yy, tt, fam, check=check).phi
    else:
        fn = target
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    a, m_flow = params.a, params.M
    beta2 = 1.0 - m_flow**2
    res = np.empty((probes.shape[0], levels))
    scale = 0.0
    h_values = h / 2.0 ** np.arange(levels)
    for ip, (x, y, t) in enumerate(probes):
        for lv, hh in enumerate(h_values):
            c0 = fn(x, y, t)
            pxx = (fn(x + hh, y, t) - 2 * c0 + fn(x - hh, y, t)) / hh**2
            pyy = (fn(x, y + hh, t) - 2 * c0 + fn(x, y - hh, t)) / hh**2
            ptt = (fn(x, y, t + hh) - 2 * c0 + fn(x, y, t - hh)) / hh**2
            pxt = (fn(x + hh, y, t + hh) - fn(x + hh, y, t - hh)
                   - fn(x - hh, y, t + hh) + fn(x - hh, y, t - hh)) / (4 * hh**2)
            res[ip, lv] = abs(a * a * beta2 * pxx + a * a * pyy - ptt
                              - 2 * m_flow * a * pxt)
            scale = max(scale, abs(ptt))
    nxt = res[:, 1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(nxt == 0, np.inf, res[:, :-1] / np.where(nxt == 0, 1, nxt))
    return PdeReport(probes, h_values, res, ratios, float(scale))


def compute_loads(family: SolutionFamily, t, *, check: bool = True):
    """Chordwise force and moment resultants of the density family at t."""
    ones = np.ones(family.grid.n)
    lift_hat = np.array([density_moment(p, ones) for p in family.pressures])
    mom_hat = np.array([density_moment(p, family.grid.nodes)
                        for p in family.pressures])
    return (family.invert(lift_hat, t, check=check),
            family.invert(mom_hat, t, check=check))


@dataclass(frozen=True)
class KuttaReport:
    """Off-chord line probe of the acceleration potential."""

    x_probes: np.ndarray
    t_probes: np.ndarray
    max_off_chord: float
    chord_scale: float
    ratio: float
    tolerance: float
    passed: bool


def kutta_residual(family: SolutionFamily, *, x_probes=None,
                   t_probes=(0.5, 1.0, 2.0),
                   tolerance: float = KUTTA_TOL) -> KuttaReport:
    """|psi(x, 0, t)| beyond the chord against the on-chord density scale."""
    if x_probes is None:
        base = np.linspace(1.05, 3.0, 8)
        x_probes = np.concatenate([-base[::-1], base])
    x_probes = np.asarray(x_probes, dtype=float)
    t_probes = np.asarray(t_probes, dtype=float)
    worst = 0.0
    for xp in x_probes:
        for tp in t_probes:
            worst = max(worst,
                        abs(evaluate_psi(xp, 0.0, tp, family, check=False).psi))
    p_time = family.invert(family.pressure_matrix(), t_probes, check=False)
    chord_scale = float(np.abs(p_time).max())
    ratio = worst / chord_scale if chord_scale > 0 else (
        0.0 if worst == 0 else np.inf)
    return KuttaReport(x_probes, t_probes, worst, chord_scale, ratio,
                       tolerance, ratio < tolerance)


def psi_consistency_residual(family: SolutionFamily, probe=(0.3, 0.4, 1.0),
                             h: float = 0.02, *, check: bool = False) -> float:
    """Relative gap between psi and (d/dt + U d/dx) phi at one probe."""
    x, y, t = probe

    def phi(xx, yy, tt):
        return evaluate_phi(xx, yy, tt, family, check=check).phi

    dpdt = (phi(x, y, t + h) - phi(x, y, t - h)) / (2 * h)
    dpdx = (phi(x + h, y, t) - phi(x - h, y, t)) / (2 * h)
    psi = evaluate_psi(x, y, t, family, check=check).psi
    return abs(dpdt + family.params.U * dpdx - psi) / abs(psi)
