"""Torus phase space, coherent states and the momentum displacement.

Position and momentum both live on the lattice 2*pi*l/N, l = 0..N-1, with
effective Planck constant h_eff = 2*pi/N.  States are stored in the position
basis; the momentum representation is only formed transiently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

# periodic images summed on each side when building a coherent state
IMAGE_RANGE = 3
MAX_SIGMA = TWO_PI / 8


@dataclass(frozen=True)
class TorusGrid:
    N: int
    h_eff: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False, compare=False)
    p: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N:
            raise ValueError(f"N must be an integer, got {self.N!r}")
        if self.N < 2 or self.N % 2:
            raise ValueError(f"N must be even and >= 2, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "h_eff", TWO_PI / self.N)
        lattice = TWO_PI * np.arange(self.N) / self.N
        lattice.setflags(write=False)
        object.__setattr__(self, "x", lattice)
        object.__setattr__(self, "p", lattice)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.N)

    def default_sigma(self) -> float:
        """Minimal-uncertainty width sqrt(h_eff), equal in x and p."""
        return math.sqrt(self.h_eff)


def build_grid(N: int) -> TorusGrid:
    return TorusGrid(N)


@dataclass(frozen=True)
class CoherentParams:
    x0: float
    p0: float
    sigma: float

    def __post_init__(self):
        for name in ("x0", "p0", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.sigma > MAX_SIGMA:
            raise ValueError(
                f"sigma={self.sigma:.4g} exceeds 2*pi/8; the packet would not fit on the torus"
            )


@dataclass(frozen=True)
class QuantumState:
    grid: TorusGrid
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def with_amplitudes(self, amplitudes) -> "QuantumState":
        return QuantumState(self.grid, amplitudes)


def coherent_amplitudes(grid: TorusGrid, params: CoherentParams) -> np.ndarray:
    """Periodized Gaussian packet, normalized on the lattice.

    The plane-wave factor is exp(i p0 d / h_eff), so p0 is the mean momentum
    on the same [0, 2 pi) lattice as x.
    """
    images = TWO_PI * np.arange(-IMAGE_RANGE, IMAGE_RANGE + 1)
    d = grid.x[None, :] + images[:, None] - params.x0
    wavenumber = params.p0 / grid.h_eff
    psi = np.exp(1j * wavenumber * d - d**2 / (2.0 * params.sigma**2)).sum(axis=0)
    return psi / np.linalg.norm(psi)


def coherent_state(grid: TorusGrid, params: CoherentParams) -> QuantumState:
    return QuantumState(grid, coherent_amplitudes(grid, params))


def to_momentum(state: QuantumState) -> np.ndarray:
    """phi_m = N**-0.5 * sum_l exp(-2j*pi*m*l/N) psi_l."""
    return np.fft.fft(state.amplitudes, norm="ortho")


def to_position(grid: TorusGrid, momentum_amplitudes) -> QuantumState:
    phi = np.asarray(momentum_amplitudes, dtype=complex)
    if phi.shape != (grid.N,):
        raise ValueError(f"expected {grid.N} momentum amplitudes, got shape {phi.shape}")
    return QuantumState(grid, np.fft.ifft(phi, norm="ortho"))


def displacement_phases(grid: TorusGrid, P: float) -> np.ndarray:
    """Diagonal of exp(i P x) with x counted in lattice sites (L = N).

    P = m * 2*pi/N therefore shifts momentum by exactly m quanta.
    """
    return np.exp(1j * P * grid.sites)


def displace(state: QuantumState, P: float) -> QuantumState:
    return state.with_amplitudes(displacement_phases(state.grid, P) * state.amplitudes)


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    if a.grid.N != b.grid.N:
        raise ValueError(f"grid mismatch: N={a.grid.N} vs N={b.grid.N}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))
