"""Kicked-rotator Floquet operator on the torus.

One period is a kick exp[-i (N K / 2 pi) cos x_l], diagonal in position,
followed by free rotation.  The free part is the real-space kernel
N**-0.5 exp[i pi (l - l')**2 / N]; for even N the quadratic Gauss sum turns it
into the momentum multiplier exp(i pi/4) exp(-i pi m**2 / N), so a step costs
two FFTs.  ``dense_floquet`` builds the real-space matrix element by element
and serves as the oracle for the fast path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .statespace import TorusGrid, QuantumState

FORWARD = "forward"
ADJOINT = "adjoint"

DENSE_MAX_N = 4096
CHAOTIC_K = 7.0


@dataclass(frozen=True)
class KickedRotatorParams:
    K: float
    grid: TorusGrid

    def __post_init__(self):
        # K = 0 is the free rotor, kept for oracle checks
        if not (math.isfinite(self.K) and self.K >= 0):
            raise ValueError(f"kicking strength must be non-negative, got {self.K}")

    @property
    def chaotic(self) -> bool:
        return self.K > CHAOTIC_K


class PhaseTables(NamedTuple):
    kick: np.ndarray
    kinetic: np.ndarray


@lru_cache(maxsize=32)
def _cached_tables(N: int, K_bits: str, global_phase: bool) -> PhaseTables:
    K = float.fromhex(K_bits)
    l = np.arange(N)
    kick = np.exp(-1j * (N * K / (2 * math.pi)) * np.cos(2 * math.pi * l / N))
    # (m*m) % (2N) keeps the argument small; exp(-i pi m^2/N) has period 2N in m^2
    kinetic = np.exp(-1j * math.pi * ((l * l) % (2 * N)) / N)
    if global_phase:
        kinetic = kinetic * np.exp(1j * math.pi / 4)
    kick.setflags(write=False)
    kinetic.setflags(write=False)
    return PhaseTables(kick, kinetic)


def phase_tables(params: KickedRotatorParams, global_phase: bool = True) -> PhaseTables:
    """Precomputed kick and kinetic phases, cached per (N, exact bits of K)."""
    return _cached_tables(params.grid.N, float(params.K).hex(), global_phase)


def step_array(psi: np.ndarray, tables: PhaseTables, direction: str = FORWARD) -> np.ndarray:
    """Apply U (or U^dagger) along the last axis of ``psi``.

    Works on a single state or a stack of states.
    """
    if direction == FORWARD:
        return np.fft.ifft(tables.kinetic * np.fft.fft(tables.kick * psi, axis=-1), axis=-1)
    if direction == ADJOINT:
        return tables.kick.conj() * np.fft.ifft(
            tables.kinetic.conj() * np.fft.fft(psi, axis=-1), axis=-1
        )
    raise ValueError(f"direction must be {FORWARD!r} or {ADJOINT!r}, got {direction!r}")


def floquet_step(
    state: QuantumState,
    params: KickedRotatorParams,
    direction: str = FORWARD,
    global_phase: bool = True,
) -> QuantumState:
    if state.grid.N != params.grid.N:
        raise ValueError("state and dynamics live on different grids")
    tables = phase_tables(params, global_phase)
    return state.with_amplitudes(step_array(state.amplitudes, tables, direction))


def evolve(
    state: QuantumState,
    params: KickedRotatorParams,
    n: int,
    direction: str = FORWARD,
) -> QuantumState:
    if int(n) != n or n < 0:
        raise ValueError(f"number of kicks must be a non-negative integer, got {n!r}")
    if state.grid.N != params.grid.N:
        raise ValueError("state and dynamics live on different grids")
    tables = phase_tables(params)
    psi = state.amplitudes
    for _ in range(int(n)):
        psi = step_array(psi, tables, direction)
    return state.with_amplitudes(psi)


def dense_floquet(params: KickedRotatorParams) -> np.ndarray:
    """U[l, l'] = N**-0.5 exp[i pi (l-l')^2 / N] exp[-i (N K / 2 pi) cos(2 pi l' / N)]."""
    N = params.grid.N
    if N > DENSE_MAX_N:
        raise ValueError(f"dense Floquet matrix refused for N={N} > {DENSE_MAX_N}")
    l = np.arange(N)
    diff = l[:, None] - l[None, :]
    # exp(i pi k / N) has period 2N in k, so reducing (l-l')^2 is exact
    kinetic = np.exp(1j * math.pi * ((diff * diff) % (2 * N)) / N) / math.sqrt(N)
    kick = np.exp(-1j * (N * params.K / (2 * math.pi)) * np.cos(2 * math.pi * l / N))
    return kinetic * kick[None, :]
