import numpy as np
import pytest
from hypothesis import given, strategies as st

from semiclassica.errors import GridError
from semiclassica.grid import (GridSpec, WaveFunction, dump_binary, dump_csv, fourier_hbar,
                               inner_product, inverse_fourier_hbar, laplacian_apply, load_binary,
                               normalize)


@pytest.mark.parametrize("n, L, N", [(3, 1.0, 64), (1, 0.0, 64), (1, 1.0, 100), (1, 1.0, 32)])
def test_gridspec_rejects_bad_parameters(n, L, N):
    with pytest.raises(GridError):
        GridSpec(n, L, N)


def test_nodes_are_centred_on_the_box(grid1):
    x = grid1.x
    assert x[0] == -grid1.L
    assert x[grid1.N // 2] == 0.0
    assert np.isclose(x[-1], grid1.L - grid1.dx)


def test_resolution_check_uses_sqrt_hbar(grid1):
    grid1.check_resolution(0.02)
    with pytest.raises(GridError):
        grid1.check_resolution(0.001)


@given(seed=st.integers(0, 2 ** 31), hbar=st.floats(0.02, 1.0))
def test_fourier_is_unitary_parseval(seed, hbar):
    g = GridSpec(1, 6.0, 256)
    rng = np.random.default_rng(seed)
    psi = WaveFunction(g, rng.normal(size=256) + 1j * rng.normal(size=256), hbar)
    phi = fourier_hbar(psi)
    assert np.isclose(phi.norm(), psi.norm(), rtol=1e-12)
    back = inverse_fourier_hbar(phi)
    assert np.allclose(back.values, psi.values, atol=1e-12 * np.abs(psi.values).max())


def test_fourier_of_gaussian_matches_closed_form():
    g = GridSpec(1, 6.0, 512)
    hbar = 0.1
    x = g.x
    psi = WaveFunction(g, (np.pi * hbar) ** -0.25 * np.exp(-x ** 2 / (2 * hbar)), hbar)
    phi = fourier_hbar(psi)
    p = g.momentum_lattice(hbar)
    exact = (np.pi * hbar) ** -0.25 * np.exp(-p ** 2 / (2 * hbar))
    assert np.abs(phi.values - exact).max() < 1e-12


def test_fourier_in_two_dimensions_is_unitary(grid2, rng):
    psi = WaveFunction(grid2, rng.normal(size=grid2.shape), 0.1)
    assert np.isclose(fourier_hbar(psi).norm(), psi.norm(), rtol=1e-12)


def test_laplacian_of_plane_wave(grid1):
    k = 2 * np.pi * 5 / (2 * grid1.L)
    psi = WaveFunction(grid1, np.exp(1j * k * grid1.x))
    assert np.allclose(laplacian_apply(psi).values, -k ** 2 * psi.values, atol=1e-9)


def test_inner_product_is_conjugate_linear_in_first_slot(grid1, rng):
    a = WaveFunction(grid1, rng.normal(size=grid1.N) + 1j * rng.normal(size=grid1.N))
    b = WaveFunction(grid1, rng.normal(size=grid1.N))
    assert np.isclose(inner_product(a.with_values(2j * a.values), b), -2j * inner_product(a, b))
    assert np.isclose(inner_product(a, a).real, a.norm() ** 2)


def test_normalize_refuses_zero_state(grid1):
    with pytest.raises(GridError):
        normalize(WaveFunction(grid1, np.zeros(grid1.N)))


def test_binary_round_trip_is_exact(tmp_path, grid2, rng):
    psi = WaveFunction(grid2, rng.normal(size=grid2.shape) + 1j * rng.normal(size=grid2.shape), 0.05)
    dump_binary(psi, tmp_path / "psi.bin")
    back = load_binary(tmp_path / "psi.bin")
    assert back.grid == grid2 and back.hbar == 0.05
    assert np.array_equal(back.values, psi.values)


def test_csv_dump_is_lossless(tmp_path, small_grid1, rng):
    vals = rng.normal(size=small_grid1.N) + 1j * rng.normal(size=small_grid1.N)
    dump_csv(WaveFunction(small_grid1, vals), tmp_path / "psi.csv")
    data = np.loadtxt(tmp_path / "psi.csv", delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 0], small_grid1.x)
    assert np.array_equal(data[:, 1] + 1j * data[:, 2], vals)


def test_wavefunction_shape_is_checked(grid1):
    with pytest.raises(GridError):
        WaveFunction(grid1, np.zeros(10))
