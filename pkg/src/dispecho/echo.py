"""Displacement echo of the quantum kicked rotator.

For a start state psi0 and momentum boost P the kernel is

    I(n) = <psi0| exp(-iPx) (U^dagger)^n exp(iPx) U^n |psi0>
         = < U^n exp(iPx) psi0 | exp(iPx) U^n psi0 >

and the echo is M_D(n) = |I(n)|**2.  Two states are carried along, so one
time step costs two Floquet steps, one diagonal phase and one inner product.
When several boosts are requested for the same start state, the unboosted
branch U^n psi0 is shared between them.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .floquet import KickedRotatorParams, PhaseTables, phase_tables, step_array
from .statespace import (
    TWO_PI,
    CoherentParams,
    QuantumState,
    TorusGrid,
    coherent_amplitudes,
    displacement_phases,
)


@dataclass(frozen=True)
class ExperimentConfig:
    N: int
    K: float
    P_list: tuple
    n_max: int
    ensemble_size: int
    seed: int
    sigma: Optional[float] = None  # None -> sqrt(2 pi / N)

    def __post_init__(self):
        object.__setattr__(self, "P_list", tuple(float(P) for P in self.P_list))
        if not self.P_list:
            raise ValueError("at least one displacement is required")
        if not all(math.isfinite(P) for P in self.P_list):
            raise ValueError("displacements must be finite reals")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be a positive integer, got {self.n_max}")
        if int(self.ensemble_size) != self.ensemble_size or self.ensemble_size < 1:
            raise ValueError(f"ensemble_size must be >= 1, got {self.ensemble_size}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        # validates N and K eagerly
        KickedRotatorParams(self.K, TorusGrid(self.N))

    @property
    def grid(self) -> TorusGrid:
        return TorusGrid(self.N)

    @property
    def width(self) -> float:
        return self.grid.default_sigma() if self.sigma is None else float(self.sigma)


@dataclass
class EchoSeries:
    """Ensemble-averaged echo for one displacement."""

    mean_MD: np.ndarray
    stderr_MD: Optional[np.ndarray] = None
    mean_I: Optional[np.ndarray] = None
    mean_abs_I: Optional[np.ndarray] = None
    P: float = 0.0
    N: Optional[int] = None
    K: Optional[float] = None
    ensemble_size: int = 1
    times: np.ndarray = field(init=False)

    def __post_init__(self):
        self.mean_MD = np.asarray(self.mean_MD, dtype=float)
        self.times = np.arange(len(self.mean_MD))
        if self.stderr_MD is None:
            self.stderr_MD = np.zeros_like(self.mean_MD)
        else:
            self.stderr_MD = np.asarray(self.stderr_MD, dtype=float)

    @property
    def np_over_2pi(self) -> Optional[float]:
        if self.N is None:
            return None
        return self.N * self.P / TWO_PI

    @property
    def label(self) -> str:
        parts = []
        if self.K is not None:
            parts.append(f"K={self.K:g}")
        if self.N is not None:
            parts.append(f"NP/2pi={self.np_over_2pi:g}")
        else:
            parts.append(f"P={self.P:g}")
        return " ".join(parts)


def member_generator(seed: int, index: int) -> np.random.Generator:
    """Independent Philox substream for ensemble member ``index``.

    The stream depends only on (seed, index), so enlarging an ensemble never
    changes the centers of existing members.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def member_center(seed: int, index: int) -> tuple[float, float]:
    x0, p0 = member_generator(seed, index).uniform(0.0, TWO_PI, size=2)
    return float(x0), float(p0)


def _kernel_rows(
    psi0: np.ndarray, tables: PhaseTables, boosts: np.ndarray, n_max: int
) -> np.ndarray:
    """I(n) for every row of ``boosts`` (displacement phase vectors)."""
    kernel = np.empty((boosts.shape[0], n_max + 1), dtype=complex)
    a = boosts * psi0
    b = psi0
    for n in range(n_max + 1):
        if n:
            a = step_array(a, tables)
            b = step_array(b, tables)
        kernel[:, n] = np.sum(a.conj() * (boosts * b), axis=-1)
    return kernel


def echo_series(psi0: QuantumState, params: KickedRotatorParams, P: float, n_max: int) -> dict:
    """Kernel I(n) and echo M_D(n) = |I(n)|^2 for n = 0..n_max."""
    if psi0.grid.N != params.grid.N:
        raise ValueError("state and dynamics live on different grids")
    if int(n_max) != n_max or n_max < 0:
        raise ValueError(f"n_max must be a non-negative integer, got {n_max}")
    norm = psi0.norm()
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"start state is not normalized (norm={norm!r})")
    boosts = displacement_phases(psi0.grid, P)[None, :]
    I = _kernel_rows(psi0.amplitudes, phase_tables(params), boosts, int(n_max))[0]
    return {"n": np.arange(n_max + 1), "I": I, "M_D": np.abs(I) ** 2}


def member_kernels(config: ExperimentConfig, index: int) -> np.ndarray:
    """Kernel rows, shape (len(P_list), n_max + 1), for one ensemble member."""
    grid = config.grid
    x0, p0 = member_center(config.seed, index)
    psi0 = coherent_amplitudes(grid, CoherentParams(x0, p0, config.width))
    boosts = np.stack([displacement_phases(grid, P) for P in config.P_list])
    tables = phase_tables(KickedRotatorParams(config.K, grid))
    return _kernel_rows(psi0, tables, boosts, config.n_max)


def _member_block(config: ExperimentConfig, start: int, stop: int) -> np.ndarray:
    return np.stack([member_kernels(config, k) for k in range(start, stop)])


def default_workers() -> int:
    env = os.environ.get("DISPECHO_WORKERS")
    return max(1, int(env)) if env else 1


def compute_member_kernels(config: ExperimentConfig, workers: Optional[int] = None) -> np.ndarray:
    """All member kernels in member-index order, shape (M, nP, n_max + 1)."""
    workers = default_workers() if workers is None else max(1, int(workers))
    M = config.ensemble_size
    if workers == 1 or M == 1:
        return _member_block(config, 0, M)
    chunk = max(1, math.ceil(M / (4 * workers)))
    bounds = [(s, min(s + chunk, M)) for s in range(0, M, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        blocks = list(pool.map(_member_block, [config] * len(bounds), *zip(*bounds)))
    return np.concatenate(blocks)


def _serial_mean(rows: np.ndarray) -> np.ndarray:
    total = np.zeros(rows.shape[1:], dtype=rows.dtype)
    for row in rows:
        total = total + row
    return total / rows.shape[0]


def reduce_ensemble(config: ExperimentConfig, kernels: np.ndarray) -> list[EchoSeries]:
    """Index-ordered serial reduction of per-member kernels into one series per P."""
    M = kernels.shape[0]
    echoes = np.abs(kernels) ** 2
    mean_MD = _serial_mean(echoes)
    if M > 1:
        spread = _serial_mean((echoes - mean_MD) ** 2) * M / (M - 1)
        stderr = np.sqrt(spread / M)
    else:
        stderr = np.zeros_like(mean_MD)
    mean_I = _serial_mean(kernels)
    mean_abs_I = _serial_mean(np.abs(kernels))
    return [
        EchoSeries(
            mean_MD=mean_MD[j],
            stderr_MD=stderr[j],
            mean_I=mean_I[j],
            mean_abs_I=mean_abs_I[j],
            P=P,
            N=config.N,
            K=config.K,
            ensemble_size=M,
        )
        for j, P in enumerate(config.P_list)
    ]


def ensemble_echo(config: ExperimentConfig, workers: Optional[int] = None) -> list[EchoSeries]:
    """Average echo and kernel over ``ensemble_size`` random coherent states."""
    return reduce_ensemble(config, compute_member_kernels(config, workers))


def boost_from_multiple(N: int, m: float) -> float:
    """Displacement P = m * 2 pi / N."""
    return m * TWO_PI / N
