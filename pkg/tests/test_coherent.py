import numpy as np
import pytest
from hypothesis import given, strategies as st

from semiclassica import kernels
from semiclassica.coherent import (PhaseGrid, berezin_dense, berezin_product, coherent_state,
                                   fitted_phase_grid, husimi, husimi_expectation, probe_states)
from semiclassica.errors import CoverageError, GridError, SymbolError
from semiclassica.grid import GridSpec, WaveFunction, inner_product
from semiclassica.linalg import krylov_ritz_values
from semiclassica.operators import operator_norm, probe_norm
from semiclassica.phase_space import (PhasePoint, constant, gaussian_bump, gibbs_symbol,
                                      hamiltonian_symbol)

HBAR = 0.1


@pytest.fixture(scope="module")
def pg1(grid1):
    return PhaseGrid(grid1, HBAR)


def test_coherent_state_is_normalised_and_centred(grid1):
    psi = coherent_state(PhasePoint((0.7,), (-0.4,)), HBAR, grid1)
    assert np.isclose(psi.norm(), 1.0, atol=1e-13)
    d = np.abs(psi.values) ** 2 * grid1.dx
    assert np.isclose(np.sum(d * grid1.x), 0.7, atol=1e-12)


def test_coherent_state_near_edge_is_refused(grid1):
    with pytest.raises(GridError):
        coherent_state(PhasePoint((5.9,), (0.0,)), HBAR, grid1)


def test_coherent_states_overlap_formula(grid1):
    a = coherent_state(PhasePoint((0.2,), (0.1,)), HBAR, grid1)
    b = coherent_state(PhasePoint((0.5,), (-0.3,)), HBAR, grid1)
    dist2 = 0.3 ** 2 + 0.4 ** 2
    assert np.isclose(abs(inner_product(a, b)), np.exp(-dist2 / (4 * HBAR)), rtol=1e-12)


def test_resolution_of_identity_on_probes(grid1, pg1):
    for psi in probe_states(grid1, HBAR, 4):
        assert abs(pg1.mass(psi) - 1.0) < 1e-12


def test_husimi_field_mass_and_expectation_of_one(grid1, pg1):
    psi = probe_states(grid1, HBAR, 1, seed=5)[0]
    field = husimi(psi, HBAR, pg1)
    assert abs(field.mass() - 1.0) < 1e-12
    assert abs(husimi_expectation(psi, constant(1.0, 1), pg1) - 1.0) < 1e-12


def test_berezin_of_one_is_identity(grid1, pg1):
    one = berezin_dense(constant(1.0, 1), HBAR, grid1, pg1)
    probes = probe_states(grid1, HBAR, 3)
    for psi in probes:
        assert np.linalg.norm(one.apply(psi.values) - psi.values) * np.sqrt(grid1.dx) < 1e-12


def test_berezin_top_eigenvalue_matches_gaussian_oracle(small_grid1):
    # Q(exp(-a(q^2+p^2))) has top eigenvalue 1/(1 + 2 a hbar)
    a, hbar = 1.0, 0.2
    f = gaussian_bump(PhasePoint((0.0,), (0.0,)), np.sqrt(0.5 / a))
    Q = berezin_dense(f, hbar, small_grid1)
    top = np.linalg.eigvalsh(Q.to_dense()).max()
    assert abs(top - 1 / (1 + 2 * a * hbar)) < 1e-10


def test_berezin_is_positive_on_positive_symbol(grid1, pg1):
    f = gaussian_bump(PhasePoint((0.3,), (0.2,)), 0.5)
    Q = berezin_dense(f, HBAR, grid1, pg1)
    v0 = np.random.default_rng(0).standard_normal(grid1.N)
    assert krylov_ritz_values(Q.flat(), v0, 30).min() > -1e-12


def test_dense_and_separable_berezin_agree(grid1, doublewell, pg1):
    g = gibbs_symbol(doublewell, 1.0)
    dense = berezin_dense(g, HBAR, grid1, pg1)
    fast = berezin_product(g, HBAR, grid1)
    probes = probe_states(grid1, HBAR, 3)
    assert probe_norm(dense - fast, probes) < 1e-10


def test_unbounded_symbols_are_rejected(grid1, doublewell):
    with pytest.raises(SymbolError):
        berezin_dense(hamiltonian_symbol(doublewell), HBAR, grid1)


def test_coverage_check_catches_truncated_lattice(grid1):
    f = gaussian_bump(PhasePoint((1.5,), (0.0,)), 0.3)
    pg = PhaseGrid(grid1, HBAR, q_extent=0.5)
    with pytest.raises(CoverageError):
        berezin_dense(f, HBAR, grid1, pg)


def test_husimi_csv_round_trip(tmp_path, small_grid1):
    psi = coherent_state(PhasePoint((0.0,), (0.0,)), 0.2, small_grid1)
    field = husimi(psi, 0.2)
    field.dump_csv(tmp_path / "h.csv")
    data = np.loadtxt(tmp_path / "h.csv", delimiter=",", skiprows=1)
    q, p, v = field.ordered()
    assert np.array_equal(data[:, 2] + 1j * data[:, 3], v.ravel())


def test_fitted_lattice_reproduces_2d_expectations(grid2):
    hbar = 0.1
    psi = coherent_state(PhasePoint((0.5, -0.3), (0.2, 0.0)), hbar, grid2)
    f = gaussian_bump(PhasePoint((0.4, -0.2), (0.0, 0.1)), 0.6)
    pg = fitted_phase_grid(grid2, hbar, symbol=f, states=[psi])
    assert pg.size < PhaseGrid(grid2, hbar).size
    val = husimi_expectation(psi, f, pg)
    # the Husimi density of a coherent state is a Gaussian of variance hbar per
    # phase-space axis; against the bump that gives a closed form
    s2 = 0.36 + hbar
    d2 = 0.1 ** 2 * 2 + 0.2 ** 2 + 0.1 ** 2
    exact = (0.36 / s2) ** 2 * np.exp(-d2 / (2 * s2))
    assert abs(val - exact) < 1e-9


def test_operator_norm_of_berezin_gibbs_below_one(grid1, doublewell):
    Q = berezin_product(gibbs_symbol(doublewell, 1.0), HBAR, grid1)
    nrm, ok = operator_norm(Q, tol=1e-10, max_iter=3000)
    assert ok and nrm < 1.0


# -- compiled versus numpy kernels --------------------------------------------------------

compiled = pytest.mark.skipif(kernels.BACKEND != "compiled", reason="extension not built")


@compiled
@given(seed=st.integers(0, 2 ** 31), J=st.integers(1, 12), K=st.sampled_from([32, 64]))
def test_window_kernels_agree_across_backends(seed, J, K):
    rng = np.random.default_rng(seed)
    N = 64
    rows = rng.normal(size=(2, N)) + 1j * rng.normal(size=(2, N))
    centers = np.ascontiguousarray(rng.integers(0, N, 5), dtype=np.int64)
    taper = np.exp(-np.linspace(-1, 1, 2 * J + 1) ** 2)
    c, p = kernels.backend("compiled"), kernels.backend("python")
    a = c.window_gather(rows, centers, taper, K)
    b = p.window_gather(rows, centers, taper, K)
    assert np.allclose(a, b, atol=1e-14)
    seg = np.ascontiguousarray(rng.normal(size=(2, 5, K)) + 0j)
    assert np.allclose(c.window_scatter(seg, centers, taper, N),
                       p.window_scatter(seg, centers, taper, N), atol=1e-13)


@given(seed=st.integers(0, 2 ** 31))
def test_window_scatter_is_adjoint_of_gather(seed):
    rng = np.random.default_rng(seed)
    N, K = 64, 32
    rows = rng.normal(size=(1, N)) + 1j * rng.normal(size=(1, N))
    seg = np.ascontiguousarray(rng.normal(size=(1, 4, K)) + 1j * rng.normal(size=(1, 4, K)))
    centers = np.array([0, 7, 31, 63], dtype=np.int64)
    taper = np.exp(-np.linspace(-2, 2, 11) ** 2)
    lhs = np.vdot(kernels.window_gather(rows, centers, taper, K), seg)
    rhs = np.vdot(rows, kernels.window_scatter(seg, centers, taper, N))
    assert np.isclose(lhs, rhs, rtol=1e-12)


@compiled
def test_weyl_and_verlet_kernels_agree_across_backends():
    rng = np.random.default_rng(3)
    c, p = kernels.backend("compiled"), kernels.backend("python")
    psi = rng.normal(size=64) + 1j * rng.normal(size=64)
    half = rng.normal(size=128) + 0j
    coef = rng.normal(size=9) + 1j * rng.normal(size=9)
    m = np.arange(-4, 5, dtype=np.int64)
    assert np.allclose(c.weyl_shift_sum_1d(psi, half, coef, m),
                       p.weyl_shift_sum_1d(psi, half, coef, m), atol=1e-13)
    psi2 = np.ascontiguousarray(rng.normal(size=(64, 64)) + 0j)
    half2 = np.ascontiguousarray(rng.normal(size=(128, 128)) + 0j)
    m1, m2 = np.ascontiguousarray(m), np.ascontiguousarray(m[::-1])
    assert np.allclose(c.weyl_shift_sum_2d(psi2, half2, coef, m1, m2),
                       p.weyl_shift_sum_2d(psi2, half2, coef, m1, m2), atol=1e-12)
    sub = np.array([1.0])
    mono = np.array([1.0, 0.0, -2.0, 0.0, 1.0])
    assert np.allclose(c.verlet_monomial(0.5, 0.0, mono, 1e-3, 500, 10, sub),
                       p.verlet_monomial(0.5, 0.0, mono, 1e-3, 500, 10, sub), atol=1e-13)
    rad = np.array([1.0, -2.0, 1.0])
    assert np.allclose(c.verlet_radial(np.array([0.5, 0.1]), np.array([0.0, 0.2]), rad, 1e-3, 500, 10, sub),
                       p.verlet_radial(np.array([0.5, 0.1]), np.array([0.0, 0.2]), rad, 1e-3, 500, 10, sub),
                       atol=1e-13)
