"""Chirikov standard map and its Lyapunov exponent.

Convention: p' = p + K sin x, x' = x + p', both reduced mod 2 pi.  The
tangent map is [[1 + K cos x, 1], [K cos x, 1]] evaluated at the pre-kick x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhasePoint:
    x: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "x", self.x % TWO_PI)
        object.__setattr__(self, "p", self.p % TWO_PI)


def standard_map_step(pt: PhasePoint, K: float) -> PhasePoint:
    p = pt.p + K * math.sin(pt.x)
    return PhasePoint(pt.x + p, p)


def inverse_standard_map_step(pt: PhasePoint, K: float) -> PhasePoint:
    x = pt.x - pt.p
    return PhasePoint(x, pt.p - K * math.sin(x))


def jacobian(pt: PhasePoint, K: float) -> np.ndarray:
    c = K * math.cos(pt.x)
    return np.array([[1.0 + c, 1.0], [c, 1.0]])


def tangent_step(pt: PhasePoint, vec, K: float):
    """Advance point and tangent vector; returns (point, unit vector, stretch)."""
    w = jacobian(pt, K) @ np.asarray(vec, dtype=float)
    stretch = float(np.hypot(w[0], w[1]))
    return standard_map_step(pt, K), w / stretch, stretch


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    stderr: float
    n_steps: int
    n_blocks: int

    @property
    def interval(self) -> tuple[float, float]:
        return self.value - self.stderr, self.value + self.stderr


def benettin_lyapunov(
    K: float,
    n_steps: int = 1_000_000,
    n_transient: int = 1000,
    seed: int = 0,
    n_blocks: int = 100,
) -> LyapunovEstimate:
    """Largest Lyapunov exponent from tangent-vector renormalization.

    The tangent vector is renormalized after every step; the log stretch
    factors are grouped into ``n_blocks`` consecutive blocks whose means give
    the standard error.
    """
    if n_steps < n_blocks:
        raise ValueError("need at least one step per block")
    rng = np.random.default_rng(seed)
    x, p = (float(v) for v in rng.uniform(0.0, TWO_PI, size=2))
    angle = float(rng.uniform(0.0, TWO_PI))
    u, v = math.cos(angle), math.sin(angle)

    sin, cos, log, hypot = math.sin, math.cos, math.log, math.hypot
    for _ in range(n_transient):
        c = K * cos(x)
        u, v = u + c * u + v, c * u + v
        norm = hypot(u, v)
        u /= norm
        v /= norm
        p = (p + K * sin(x)) % TWO_PI
        x = (x + p) % TWO_PI

    block_len = n_steps // n_blocks
    blocks = []
    for _ in range(n_blocks):
        acc = 0.0
        for _ in range(block_len):
            c = K * cos(x)
            u, v = u + c * u + v, c * u + v
            norm = hypot(u, v)
            acc += log(norm)
            u /= norm
            v /= norm
            p = (p + K * sin(x)) % TWO_PI
            x = (x + p) % TWO_PI
        blocks.append(acc / block_len)

    blocks = np.asarray(blocks)
    return LyapunovEstimate(
        value=float(blocks.mean()),
        stderr=float(blocks.std(ddof=1) / math.sqrt(n_blocks)),
        n_steps=block_len * n_blocks,
        n_blocks=n_blocks,
    )
