"""Flow configuration: free-stream constants and the Laplace-domain strip.

All lengths are normalized by the half chord, so the airfoil occupies
[-1, 1].  From the speed of sound ``a`` and Mach number ``M`` the derived
constants are the free-stream speed ``U = M a``, the convection slope
``c = M / (a (1 - M^2))`` used in the moving-frame phase factor
exp(s(t + c x)), and the strip [sigma1, sigma2] of Laplace abscissas on
which the solver operates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class FlowParams:
    a: float          # speed of sound (chord-normalized units)
    M: float          # Mach number, subsonic
    U: float          # free-stream speed, M * a
    c: float          # convection slope M / (a (1 - M^2))
    sigma1: float     # left edge of the Laplace strip, > 0
    sigma2: float     # right edge of the Laplace strip
    half_chord: float = 1.0


def derive_params(a: float, M: float, *, sigma1: float = 0.05, sigma2: float = 8.0) -> FlowParams:
    a = float(a)
    M = float(M)
    if not math.isfinite(a) or a <= 0:
        raise ConfigError(f"speed of sound must be positive and finite, got {a!r}")
    if not math.isfinite(M) or not 0.0 <= M < 1.0:
        raise ConfigError(f"Mach number must satisfy 0 <= M < 1, got {M!r}")
    if not (math.isfinite(sigma1) and math.isfinite(sigma2)) or not 0.0 < sigma1 < sigma2:
        raise ConfigError(
            f"strip edges need 0 < sigma1 < sigma2, got ({sigma1!r}, {sigma2!r})"
        )
    beta2 = 1.0 - M * M
    return FlowParams(
        a=a,
        M=M,
        U=M * a,
        c=M / (a * beta2),
        sigma1=float(sigma1),
        sigma2=float(sigma2),
    )


def lambda_of(s: complex, params: FlowParams) -> complex:
    """Decay rate of the streamwise integrating factor, -s (1 + c U) / U."""
    if params.U == 0.0:
        raise DomainError("streamwise rate is undefined at zero free-stream speed")
    return -s * (1.0 + params.c * params.U) / params.U


@dataclass(frozen=True)
class LaplaceParameter:
    """A Laplace point bundled with its streamwise rate."""

    s: complex
    lam: complex


def laplace_parameter(s: complex, params: FlowParams) -> LaplaceParameter:
    return LaplaceParameter(s=complex(s), lam=lambda_of(s, params))


def in_strip(s: complex, params: FlowParams) -> bool:
    return params.sigma1 <= s.real <= params.sigma2


def convection_identity_residual(params: FlowParams) -> float:
    """a^2 (1-M^2) c^2 - 2 M a c - 1 + 1/(1-M^2); zero in exact arithmetic.

    This is the cancellation that turns the convected wave operator into a
    reduced wave equation in the tilted frame.
    """
    beta2 = 1.0 - params.M**2
    return params.a**2 * beta2 * params.c**2 - 2.0 * params.M * params.a * params.c - 1.0 + 1.0 / beta2
