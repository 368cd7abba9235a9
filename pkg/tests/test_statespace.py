import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dispecho.statespace import (
    CoherentParams,
    QuantumState,
    TorusGrid,
    build_grid,
    coherent_state,
    displace,
    inner_product,
    to_momentum,
    to_position,
)

from conftest import random_unit


def test_grid_lattices():
    grid = build_grid(8)
    assert grid.x[3] == pytest.approx(3 * math.pi / 4, abs=1e-15)
    assert grid.h_eff == pytest.approx(math.pi / 4)
    assert np.allclose(build_grid(2).x, [0.0, math.pi])
    assert np.array_equal(grid.x, grid.p)
    assert np.allclose(np.diff(grid.x), 2 * math.pi / 8)


@pytest.mark.parametrize("N", [7, 0, -4, 1, 2.5])
def test_grid_rejects_bad_N(N):
    with pytest.raises(ValueError):
        build_grid(N)


@pytest.mark.parametrize("sigma", [0.0, -0.1, 2 * math.pi / 8 + 1e-9, math.nan])
def test_coherent_params_reject(sigma):
    with pytest.raises(ValueError):
        CoherentParams(0.0, 0.0, sigma)


def test_coherent_state_normalized_and_symmetric():
    grid = build_grid(256)
    state = coherent_state(grid, CoherentParams(0.0, 0.0, grid.default_sigma()))
    assert state.norm() == pytest.approx(1.0, abs=1e-12)
    mag = np.abs(state.amplitudes)
    assert np.argmax(mag) == 0
    assert np.allclose(mag[1:], mag[1:][::-1], atol=1e-15)


def test_coherent_overlap_matches_continuum():
    grid = build_grid(256)
    sigma = grid.default_sigma()
    dx = 4 * sigma
    a = coherent_state(grid, CoherentParams(0.0, 0.0, sigma))
    b = coherent_state(grid, CoherentParams(dx, 0.0, sigma))
    continuum = math.exp(-dx**2 / (4 * sigma**2))
    assert abs(inner_product(a, b)) == pytest.approx(continuum, abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(
    x0=st.floats(0, 2 * math.pi, exclude_max=True),
    p0=st.floats(0, 2 * math.pi, exclude_max=True),
)
def test_coherent_state_periodic_in_center(x0, p0):
    grid = build_grid(64)
    sigma = grid.default_sigma()
    base = coherent_state(grid, CoherentParams(x0, p0, sigma)).amplitudes
    shifted_x = coherent_state(grid, CoherentParams(x0 + 2 * math.pi, p0, sigma)).amplitudes
    assert np.allclose(base, shifted_x, atol=1e-12, rtol=0)


def test_coherent_state_periodic_in_momentum_on_lattice():
    # p0 -> p0 + 2 pi changes the phase by exp(2 pi i (x - x0)); on the lattice this
    # is a pure phase pattern only when N is such that it is a lattice momentum.
    grid = build_grid(64)
    sigma = grid.default_sigma()
    a = coherent_state(grid, CoherentParams(1.0, 0.5, sigma)).amplitudes
    b = coherent_state(grid, CoherentParams(1.0, 0.5 + 2 * math.pi, sigma)).amplitudes
    assert abs(np.vdot(a, b)) == pytest.approx(1.0, abs=1e-12)


def test_momentum_transform_conventions(rng):
    grid = build_grid(32)
    delta = np.zeros(32, complex)
    delta[0] = 1.0
    phi = to_momentum(QuantumState(grid, delta))
    assert np.allclose(np.abs(phi), 1 / math.sqrt(32), atol=1e-15)

    psi = QuantumState(grid, random_unit(rng, 32))
    phi = to_momentum(psi)
    assert np.allclose(to_position(grid, phi).amplitudes, psi.amplitudes, atol=1e-12)
    assert np.sum(np.abs(phi) ** 2) == pytest.approx(1.0, abs=1e-12)
    # phi_m = N^-1/2 sum_l exp(-2 pi i m l / N) psi_l, written out
    m = 5
    direct = np.sum(np.exp(-2j * math.pi * m * np.arange(32) / 32) * psi.amplitudes) / math.sqrt(32)
    assert phi[m] == pytest.approx(direct, abs=1e-13)


def test_to_position_rejects_wrong_length():
    with pytest.raises(ValueError):
        to_position(build_grid(8), np.ones(6))


def test_displacement_shifts_momentum_by_one_quantum():
    N = 16
    grid = build_grid(N)
    for m in (0, 3, N - 1):
        eig = np.exp(2j * math.pi * m * np.arange(N) / N) / math.sqrt(N)
        out = to_momentum(displace(QuantumState(grid, eig), 2 * math.pi / N))
        expected = np.zeros(N)
        expected[(m + 1) % N] = 1.0
        assert np.allclose(np.abs(out), expected, atol=1e-12)


def test_displacement_identity_and_norm(rng):
    grid = build_grid(64)
    psi = QuantumState(grid, random_unit(rng, 64))
    assert np.array_equal(displace(psi, 0.0).amplitudes, psi.amplitudes)
    assert displace(psi, 0.37 * 2 * math.pi / 64).norm() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_displacements_compose(P1, P2):
    grid = build_grid(32)
    psi = QuantumState(grid, np.full(32, 1 / math.sqrt(32), complex))
    twice = displace(displace(psi, P1), P2).amplitudes
    once = displace(psi, P1 + P2).amplitudes
    assert np.allclose(twice, once, atol=1e-12, rtol=0)


def test_inner_product(rng):
    grid = build_grid(16)
    psi = QuantumState(grid, random_unit(rng, 16))
    assert inner_product(psi, psi) == pytest.approx(1.0, abs=1e-12)
    assert inner_product(psi, psi.with_amplitudes(1j * psi.amplitudes)) == pytest.approx(1j, abs=1e-12)
    with pytest.raises(ValueError):
        inner_product(psi, QuantumState(build_grid(8), np.ones(8) / math.sqrt(8)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cauchy_schwarz(seed):
    rng = np.random.default_rng(seed)
    grid = build_grid(8)
    a = QuantumState(grid, random_unit(rng, 8))
    b = QuantumState(grid, random_unit(rng, 8))
    assert abs(inner_product(a, b)) <= 1 + 1e-12


def test_state_rejects_wrong_length():
    with pytest.raises(ValueError):
        QuantumState(TorusGrid(8), np.ones(4))
