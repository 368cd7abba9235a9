"""Self-checks of the propagator against brute-force references.

Each check returns an ``OracleCheck`` with the observed deviation and the
threshold it was held to.  ``corrupt_kinetic`` perturbs the fast-path kinetic
phases so the suite can demonstrate that it catches a broken propagator.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .echo import _kernel_rows, echo_series
from .floquet import ADJOINT, FORWARD, KickedRotatorParams, PhaseTables, dense_floquet, phase_tables, step_array
from .statespace import QuantumState, TorusGrid, displacement_phases

ORACLE_NS = (8, 16, 32)
ORACLE_KS = (0.5, 10.09, 200.09)


@dataclass(frozen=True)
class OracleCheck:
    name: str
    observed: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.observed < self.threshold)

    def as_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


def random_state(N: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=N) + 1j * rng.normal(size=N)
    return psi / np.linalg.norm(psi)


def _tables(params: KickedRotatorParams, corrupt: bool) -> PhaseTables:
    tables = phase_tables(params)
    if not corrupt:
        return tables
    m = np.arange(params.grid.N)
    return PhaseTables(tables.kick, tables.kinetic * np.exp(1e-3j * m))


def dense_vs_fast(N: int, K: float, n_states: int = 20, seed: int = 0, corrupt: bool = False) -> float:
    """Largest element-wise |U_fast psi - U_dense psi| over random states."""
    params = KickedRotatorParams(K, TorusGrid(N))
    U = dense_floquet(params)
    tables = _tables(params, corrupt)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_states):
        psi = random_state(N, rng)
        worst = max(worst, float(np.max(np.abs(step_array(psi, tables) - U @ psi))))
    return worst


def brute_force_kernel(psi0: np.ndarray, U: np.ndarray, P: float, n: int) -> complex:
    """<psi0| D^dagger (U^dagger)^n D U^n |psi0> with explicit matrix powers."""
    D = np.diag(displacement_phases(TorusGrid(len(psi0)), P))
    Un = np.linalg.matrix_power(U, n)
    op = D.conj().T @ Un.conj().T @ D @ Un
    return complex(psi0.conj() @ op @ psi0)


def run_oracle_suite(corrupt_kinetic: bool = False, Ns=ORACLE_NS, Ks=ORACLE_KS) -> list[OracleCheck]:
    checks = []
    for N in Ns:
        for K in Ks:
            dev = dense_vs_fast(N, K, corrupt=corrupt_kinetic)
            checks.append(OracleCheck(f"dense_vs_fast N={N} K={K:g}", dev, 1e-10))
        U = dense_floquet(KickedRotatorParams(10.09, TorusGrid(N)))
        checks.append(OracleCheck(
            f"dense_unitarity N={N}", float(np.max(np.abs(U.conj().T @ U - np.eye(N)))), 1e-10
        ))

    rng = np.random.default_rng(1)
    params = KickedRotatorParams(10.09, TorusGrid(1024))
    tables = _tables(params, corrupt_kinetic)
    psi = random_state(1024, rng)
    evolved = psi
    for _ in range(100):
        evolved = step_array(evolved, tables, FORWARD)
    checks.append(OracleCheck("norm_drift N=1024 n=100", abs(np.linalg.norm(evolved) - 1.0), 1e-10))
    back = evolved
    for _ in range(100):
        back = step_array(back, tables, ADJOINT)
    checks.append(OracleCheck("adjoint_inverts N=1024 n=100", float(np.max(np.abs(back - psi))), 1e-9))

    N, n, m = 16, 3, 3
    params = KickedRotatorParams(10.09, TorusGrid(N))
    P = 2 * math.pi * m / N
    psi0 = random_state(N, rng)
    boosts = displacement_phases(params.grid, P)[None, :]
    fast = _kernel_rows(psi0, _tables(params, corrupt_kinetic), boosts, n)[0, n]
    brute = brute_force_kernel(psi0, dense_floquet(params), P, n)
    checks.append(OracleCheck("echo_vs_brute_force N=16 n=3", abs(fast - brute), 1e-10))

    state = QuantumState(TorusGrid(64), random_state(64, rng))
    params = KickedRotatorParams(50.09, state.grid)
    with_phase = _kernel_rows(state.amplitudes, phase_tables(params, True), boosts_for(state, 0.3), 10)
    without = _kernel_rows(state.amplitudes, phase_tables(params, False), boosts_for(state, 0.3), 10)
    checks.append(OracleCheck("global_phase_invariance N=64", float(np.max(np.abs(with_phase - without))), 1e-12))

    for ratio in (0.0, 0.5, 1.0, 3.7):
        series = echo_series(state, params, ratio * 2 * math.pi / 64, 0)
        checks.append(OracleCheck(f"echo_at_zero NP/2pi={ratio:g}", abs(series["M_D"][0] - 1.0), 1e-12))
    return checks


def boosts_for(state: QuantumState, ratio: float) -> np.ndarray:
    return displacement_phases(state.grid, ratio * 2 * math.pi / state.grid.N)[None, :]
