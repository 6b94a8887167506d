"""Panel quadrature helpers shared by the kernel, operator, and field layers.

Everything here works on explicit breakpoint chains so that callers control
grading: geometric refinement into logarithmic or peaked points, and length
caps that keep the per-panel phase change of oscillatory factors small enough
for a 16-point Gauss rule.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def graded_breaks(lo: float, hi: float, center: float, inner: float, cap: float) -> np.ndarray:
    """Ascending breakpoints on [lo, hi], geometrically refined toward
    ``center`` starting at panel length ``inner`` and capped at ``cap``."""
    if not hi > lo:
        raise DomainError(f"empty panel range [{lo}, {hi}]")
    inner = min(max(inner, 1e-300), cap)
    if not lo < center < hi:
        # the feature sits outside the range; its shoulder still needs
        # resolution, so grade one-sided toward the nearer endpoint with a
        # start scale set by the gap
        if center >= hi:
            start = min(max(center - hi, inner), cap)
            edges = [hi]
            pos, step = hi, start
            while pos > lo:
                pos = max(pos - step, lo)
                edges.append(pos)
                step = min(step * 2.0, cap)
            return np.array(edges[::-1])
        start = min(max(lo - center, inner), cap)
        edges = [lo]
        pos, step = lo, start
        while pos < hi:
            pos = min(pos + step, hi)
            edges.append(pos)
            step = min(step * 2.0, cap)
        return np.array(edges)
    right = []
    step = inner
    pos = center
    while pos < hi:
        pos = min(pos + step, hi)
        right.append(pos)
        step = min(step * 2.0, cap)
    left = []
    step = inner
    pos = center
    while pos > lo:
        pos = max(pos - step, lo)
        left.append(pos)
        step = min(step * 2.0, cap)
    return np.array(left[::-1] + [center] + right)


def gauss_nodes_weights(breaks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """16-point Gauss nodes and weights on every panel of a breakpoint chain,
    returned flattened in ascending order."""
    a = breaks[:-1]
    b = breaks[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    weights = half[:, None] * _GL_WEIGHTS[None, :]
    return nodes.ravel(), weights.ravel()


def gauss_panel(a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * _GL_NODES, half * _GL_WEIGHTS


def tanh_sinh_panel(a: float, b: float, h: float = 0.09, kmax: int = 31) -> tuple[np.ndarray, np.ndarray]:
    """Double-exponential rule on (a, b); handles integrable endpoint
    singularities (log, inverse square root).

    The level is capped so the extreme nodes keep a representable offset
    (about 3e-12 of the panel width) from the endpoints instead of rounding
    onto them.
    """
    k = np.arange(-kmax, kmax + 1)
    t = k * h
    u = 0.5 * np.pi * np.sinh(t)
    x = np.tanh(u)
    w = h * 0.5 * np.pi * np.cosh(t) / np.cosh(u) ** 2
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


class CumulativeIntegral:
    """Prefix integrals of a vectorized integrand over a breakpoint chain.

    Stores cumulative values at every breakpoint; ``partial`` returns the
    integral from ``breaks[0]`` to arbitrary interior points by adding one
    16-point panel from the nearest breakpoint below.
    """

    def __init__(self, breaks: np.ndarray, integrand):
        self.breaks = np.asarray(breaks, dtype=float)
        self.integrand = integrand
        nodes, weights = gauss_nodes_weights(self.breaks)
        vals = integrand(nodes)
        panel_sums = (vals * weights).reshape(-1, 16).sum(axis=1)
        self.prefix = np.concatenate([[0.0 + 0.0j], np.cumsum(panel_sums)])

    @property
    def total(self) -> complex:
        return self.prefix[-1]

    def partial(self, d) -> np.ndarray:
        d = np.atleast_1d(np.asarray(d, dtype=float))
        if np.any(d < self.breaks[0] - 1e-12) or np.any(d > self.breaks[-1] + 1e-12):
            raise DomainError("cumulative integral queried outside its table range")
        d = np.clip(d, self.breaks[0], self.breaks[-1])
        j = np.searchsorted(self.breaks, d, side="right") - 1
        j = np.clip(j, 0, len(self.breaks) - 2)
        lo = self.breaks[j]
        half = 0.5 * (d - lo)
        mid = 0.5 * (d + lo)
        nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = self.integrand(nodes.ravel()).reshape(nodes.shape)
        extra = (vals * _GL_WEIGHTS[None, :]).sum(axis=1) * half
        return self.prefix[j] + extra
