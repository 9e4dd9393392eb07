import numpy as np
import pytest
from hypothesis import given, strategies as st

from semiclassica.coherent import PhaseGrid, coherent_state, probe_states
from semiclassica.errors import ConfigError
from semiclassica.grid import GridSpec, WaveFunction, inner_product
from semiclassica.phase_space import PhasePoint, builtin_potential, gaussian_bump
from semiclassica.schrodinger import build_hamiltonian
from semiclassica.symmetry import (GroupAction, act_phase, commutator_defect, equivariance_defect,
                                   haar_average, haar_symbol, make_group, pullback_symbol,
                                   unitary_rep)

G2 = GridSpec(2, 4.0, 128)
angles = st.floats(0.0, 2 * np.pi)


def _state(seed, grid):
    rng = np.random.default_rng(seed)
    X = grid.points()
    c = rng.uniform(-0.8, 0.8, 2)
    vals = np.exp(-np.sum((X - c) ** 2, axis=-1) / 0.3) * (1 + 0.3 * X[..., 0])
    return WaveFunction(grid, vals)


@given(a=angles, b=angles)
def test_so2_composition_law(a, b):
    G = make_group("so2", 2)
    R = lambda g: G.matrix(g)[0]
    assert np.allclose(R(G.compose(a, b)), R(a) @ R(b), atol=1e-12)
    assert np.allclose(R(G.inverse(a)) @ R(a), np.eye(2), atol=1e-12)


@given(seed=st.integers(0, 1000), a=st.integers(0, 3), b=st.integers(0, 3))
def test_quarter_turn_representation_is_a_homomorphism(seed, a, b):
    G = make_group("so2", 2)
    psi = _state(seed, G2)
    ga, gb = a * np.pi / 2, b * np.pi / 2
    lhs = unitary_rep(G, ga, unitary_rep(G, gb, psi)).values
    rhs = unitary_rep(G, G.compose(ga, gb), psi).values
    assert np.array_equal(lhs, rhs)


def test_reflection_squares_to_identity(grid1):
    G = make_group("z2", 1)
    psi = WaveFunction(grid1, np.exp(-(grid1.x - 0.4) ** 2))
    twice = unitary_rep(G, -1, unitary_rep(G, -1, psi))
    assert np.array_equal(twice.values, psi.values)
    assert unitary_rep(G, -1, psi).meta["exact"]


@given(theta=angles)
def test_generic_rotation_is_unitary_and_matches_rotated_coherent_state(theta):
    G = make_group("so2", 2)
    hbar = 0.1
    g = GridSpec(2, 4.0, 256)
    sigma = PhasePoint((0.6, -0.2), (0.3, 0.1))
    psi = coherent_state(sigma, hbar, g)
    out = unitary_rep(G, theta, psi)
    ref = coherent_state(act_phase(G, theta, sigma), hbar, g)
    assert abs(out.norm() - 1) < 1e-12
    assert np.abs(out.values - ref.values).max() < 1e-10


@given(q=st.floats(-1.5, 1.5), p=st.floats(-1.0, 1.0), theta=angles)
def test_haar_average_is_invariant(q, p, theta):
    G = make_group("so2", 2)
    f = gaussian_bump(PhasePoint((0.5, 0.2), (0.1, -0.3)), 0.7)
    s = PhasePoint((q, 0.3), (p, 0.0))
    a = haar_average(G, f, s)
    b = haar_average(G, f, act_phase(G, theta, s))
    assert abs(a - b) < 1e-10


def test_haar_symbol_of_z2_is_even(grid1):
    G = make_group("z2", 1)
    F = haar_symbol(G, gaussian_bump(PhasePoint((0.8,), (0.2,)), 0.5))
    assert np.isclose(F(np.array([0.3]), np.array([0.1])), F(np.array([-0.3]), np.array([-0.1])))


def test_pullback_moves_the_bump():
    G = make_group("z2", 1)
    f = gaussian_bump(PhasePoint((0.8,), (0.2,)), 0.5)
    pf = pullback_symbol(G, -1, f)
    assert np.isclose(pf.at(PhasePoint((-0.8,), (-0.2,))), 1.0)


def test_berezin_equivariance_z2(grid1):
    G = make_group("z2", 1)
    f = gaussian_bump(PhasePoint((0.5,), (0.3,)), 0.6)
    assert equivariance_defect(G, -1, f, 0.1, grid1) < 1e-6


def test_berezin_equivariance_quarter_turn():
    G = make_group("so2", 2)
    f = gaussian_bump(PhasePoint((0.5, 0.1), (0.3, 0.0)), 0.6)
    pg = PhaseGrid(G2, 0.2, q_extent=2.5, p_extent=2.5)
    probes = probe_states(G2, 0.2, 2, q_range=0.7, p_range=0.5)
    assert equivariance_defect(G, np.pi / 2, f, 0.2, G2, pg, probes) < 1e-6


@pytest.mark.parametrize("name, group, g", [("doublewell", "z2", -1),
                                            ("mexicanhat", "so2", np.pi / 2)])
def test_hamiltonian_commutes_with_symmetry(name, group, g):
    V = builtin_potential(name)
    grid = GridSpec(V.n, 4.0, 128)
    H = build_hamiltonian(V, 0.2, grid)
    probes = [_state(s, grid) if V.n == 2 else
              WaveFunction(grid, np.exp(-(grid.x - 0.3 * s) ** 2)) for s in range(3)]
    assert commutator_defect(make_group(group, V.n), g, H, probes) < 1e-10


def test_custom_group_must_be_orthogonal():
    with pytest.raises(ConfigError):
        GroupAction("custom", 1, isometries=(([[2.0]], [0.0]),))
    G = GroupAction("custom", 1, isometries=(([[1.0]], [0.0]), ([[-1.0]], [0.0])))
    assert G.compose(1, 1) == 0 and G.inverse(1) == 1
    with pytest.raises(ConfigError):
        make_group("so3", 2)
