"""Closed-form echo predictions.

The averaged echo is a Lyapunov decay on top of a time-independent freeze,

    <M_D(t)> = exp[-(P s)^2 / 2] * (alpha * exp(-lambda t) + g(PL) / (PL)^2),

bounded below by 1/N.  On the torus L = N, so PL = N * P, and s is the packet
width measured in lattice sites (sigma / h_eff), the unit in which P is a
wavenumber.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .statespace import TorusGrid

# below this argument J1 uses its power series, above it the Hankel expansion;
# both reach ~1e-11 absolute accuracy at the seam
J1_SERIES_LIMIT = 12.0


def lyapunov_rate(K: float) -> float:
    """ln(K/2), the standard-map Lyapunov exponent for large K."""
    if not K > 0:
        raise ValueError(f"K must be positive, got {K}")
    return math.log(K / 2.0)


def _j1_series(z: float) -> float:
    half = 0.5 * z
    term = half
    total = term
    k = 0
    while abs(term) > 1e-17 * max(abs(total), 1e-300):
        k += 1
        term *= -(half * half) / (k * (k + 1))
        total += term
    return total


def _j1_asymptotic(z: float) -> float:
    # Hankel expansion, summed until the terms stop shrinking
    mu = 4.0
    chi = z - 0.75 * math.pi
    p_sum, q_sum = 1.0, 0.0
    term = 1.0
    prev = math.inf
    k = 0
    while True:
        k += 1
        term *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        if abs(term) >= prev or abs(term) < 1e-17:
            break
        prev = abs(term)
        if k % 2:
            q_sum += term * (-1) ** ((k - 1) // 2)
        else:
            p_sum += term * (-1) ** (k // 2)
    return math.sqrt(2.0 / (math.pi * z)) * (p_sum * math.cos(chi) - q_sum * math.sin(chi))


def bessel_j1(z: float) -> float:
    """First-order Bessel function of the first kind."""
    z = float(z)
    if z < 0:
        return -bessel_j1(-z)
    if z < J1_SERIES_LIMIT:
        return _j1_series(z)
    return _j1_asymptotic(z)


def g_function(d: int, z: float) -> float:
    """Oscillatory freeze factor: 4 sin^2(z/2) for d=1, 4 J1(z)^2 for d=2."""
    if z < 0:
        raise ValueError(f"g is defined for z >= 0, got {z}")
    if d == 1:
        return 4.0 * math.sin(0.5 * z) ** 2
    if d == 2:
        return 4.0 * bessel_j1(z) ** 2
    if d == 3:
        raise NotImplementedError(
            "d=3 needs Bessel and Struve functions with no closed form available; not supported"
        )
    raise ValueError(f"dimension must be 1 or 2, got {d}")


def _g_over_z2(d: int, z: float) -> float:
    if z < 1e-4:
        # leading terms: (sin(z/2)/(z/2))^2 and (2 J1(z)/z)^2
        return 1.0 - z * z / (12.0 if d == 1 else 4.0)
    return g_function(d, z) / (z * z)


@dataclass(frozen=True)
class TheoryParams:
    N: int
    sigma: float
    P: float
    K: float = 0.0
    alpha: float = 1.0
    d: int = 1
    L: Optional[float] = None

    def __post_init__(self):
        if self.d not in (1, 2):
            if self.d == 3:
                raise NotImplementedError("d=3 freeze factor is not supported")
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        for name in ("sigma", "P", "K", "alpha"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.L is None:
            object.__setattr__(self, "L", float(self.N))

    @classmethod
    def from_grid(cls, grid: TorusGrid, P: float, sigma: Optional[float] = None, **kw):
        sigma = grid.default_sigma() if sigma is None else sigma
        return cls(N=grid.N, sigma=sigma, P=P, **kw)

    @property
    def PL(self) -> float:
        return abs(self.P) * self.L

    @property
    def width_sites(self) -> float:
        return self.sigma * self.N / (2.0 * math.pi)

    def prefactor(self, power: float = 2.0) -> float:
        """exp[-(P s)^2 / power] with s the width in lattice sites."""
        return math.exp(-((self.P * self.width_sites) ** 2) / power)


def freeze_term(params: TheoryParams) -> float:
    return params.prefactor() * _g_over_z2(params.d, params.PL)


def predicted_echo(params: TheoryParams, t, rate: float, clamp: bool = True):
    """Decay plus freeze at time(s) ``t``; ``rate`` is the decay exponent to use.

    With ``clamp`` the result is kept inside [1/N, 1]; the raw formula exceeds 1
    near t = 0 because alpha and the freeze term are both of order one there.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    raw = params.prefactor() * (params.alpha * np.exp(-rate * t) + _g_over_z2(params.d, params.PL))
    out = np.clip(raw, 1.0 / params.N, 1.0) if clamp else raw
    return float(out) if out.ndim == 0 else out


def decay_term(params: TheoryParams, t, rate: float):
    t = np.asarray(t, dtype=float)
    out = params.prefactor() * params.alpha * np.exp(-rate * t)
    return float(out) if out.ndim == 0 else out


def saturation_prediction(params: TheoryParams) -> float:
    """Long-time echo: max(freeze term, 1/N)."""
    if params.d != 1:
        raise ValueError("saturation prediction is defined for d=1 only")
    return max(freeze_term(params), 1.0 / params.N)


def y_correlation_prediction(params: TheoryParams) -> float:
    """|Y| = exp[-(P s)^2/4] sqrt(g(PL)) / PL, the square root of the freeze term."""
    return params.prefactor(4.0) * math.sqrt(_g_over_z2(params.d, params.PL))
