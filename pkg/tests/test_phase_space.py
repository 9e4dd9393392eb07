import numpy as np
import pytest
from hypothesis import given, strategies as st

from semiclassica.errors import PotentialError, SymbolError
from semiclassica.phase_space import (PhasePoint, Potential, bracket_symbol, builtin_potential,
                                      constant, coordinate, critical_set, flow, gaussian_bump,
                                      gibbs_symbol, hamiltonian_symbol, poisson_bracket,
                                      polynomial_cutoff)

coord = st.floats(-1.5, 1.5)


def _bumps():
    return (gaussian_bump(PhasePoint((0.3,), (-0.2,)), 0.7),
            gaussian_bump(PhasePoint((-0.4,), (0.5,)), 0.9),
            polynomial_cutoff([1], [1], 1.2))


@given(q=coord, p=coord)
def test_poisson_bracket_is_antisymmetric(q, p):
    f, g, _ = _bumps()
    s = PhasePoint((q,), (p,))
    assert abs(poisson_bracket(f, g, s) + poisson_bracket(g, f, s)) < 1e-12


@given(q=coord, p=coord)
def test_poisson_bracket_satisfies_leibniz(q, p):
    f, g, k = _bumps()
    s = PhasePoint((q,), (p,))
    lhs = poisson_bracket(f, g * k, s)
    rhs = poisson_bracket(f, g, s) * k.at(s) + g.at(s) * poisson_bracket(f, k, s)
    assert abs(lhs - rhs) < 1e-10


def test_canonical_bracket_sign():
    s = PhasePoint((0.3,), (0.7,))
    q, p = coordinate(0, "q"), coordinate(0, "p")
    # {f, g} = df/dp dg/dq - df/dq dg/dp
    assert poisson_bracket(p, q, s) == 1.0
    assert poisson_bracket(q, p, s) == -1.0


def test_bracket_symbol_matches_pointwise_bracket():
    f, g, _ = _bumps()
    br = bracket_symbol(f, g)
    for q, p in [(0.1, 0.2), (-0.7, 0.4)]:
        s = PhasePoint((q,), (p,))
        assert np.isclose(br.at(s), poisson_bracket(f, g, s), atol=1e-14)


def test_finite_difference_gradient_matches_formula():
    f = gaussian_bump(PhasePoint((0.2, -0.1), (0.0, 0.3)), 0.6)
    from semiclassica.phase_space import Symbol
    plain = Symbol(f.func, 2)
    q, p = np.array([0.3, 0.1]), np.array([-0.2, 0.4])
    for a, b in zip(f.gradient(q, p), plain.gradient(q, p)):
        assert np.allclose(a, b, atol=1e-9)


def test_symbol_arithmetic_keeps_factors():
    f, g, _ = _bumps()
    fg = f * g
    assert fg.separable
    s = PhasePoint((0.2,), (0.1,))
    assert np.isclose(fg.at(s), f.at(s) * g.at(s))
    assert np.isclose((2.0 * f).at(s), 2 * f.at(s))
    assert np.isclose((f - g).at(s), f.at(s) - g.at(s))


def test_gaussian_bump_needs_positive_width():
    with pytest.raises(SymbolError):
        gaussian_bump(PhasePoint((0.0,), (0.0,)), 0.0)


def test_phase_point_dimension_checks():
    with pytest.raises(SymbolError):
        PhasePoint((0.0, 1.0), (0.0,))
    with pytest.raises(SymbolError):
        constant(1.0, 1).at(PhasePoint((0.0, 0.0), (0.0, 0.0)))


def test_builtin_potential_minima():
    dw = builtin_potential("doublewell")
    assert dw.minimum() == (0.0, {"kind": "points", "points": [(-1.0,), (1.0,)]})
    mh = builtin_potential("mexicanhat")
    assert mh.minimum()[1] == {"kind": "circle", "radius": 1.0}
    ho = builtin_potential("harmonic", 2)
    assert ho.minimum()[1] == {"kind": "points", "points": [(0.0, 0.0)]}


def test_potential_validation():
    with pytest.raises(PotentialError):
        Potential("down", 1, radial=[0.0, -1.0])
    with pytest.raises(PotentialError):
        Potential("odd", 1, monomial=[0.0, 1.0, 0.0, 1.0])
    with pytest.raises(PotentialError):
        Potential("tilted", 1, monomial=[0.0, 0.3, -2.0, 0.0, 1.0], symmetry="Z2")
    tilted = Potential("tilted", 1, monomial=[0.0, 0.3, -2.0, 0.0, 1.0])
    assert tilted.symmetry == "none"
    vmin, desc = tilted.minimum()
    assert len(desc["points"]) == 1 and desc["points"][0][0] < 0


def test_potential_gradient_matches_finite_differences():
    V = builtin_potential("mexicanhat")
    q = np.array([0.4, -0.7])
    h = 1e-6
    fd = [(V(q + h * e) - V(q - h * e)) / (2 * h) for e in np.eye(2)]
    assert np.allclose(V.grad(q), fd, atol=1e-8)


def test_critical_set_of_double_well():
    h = hamiltonian_symbol(builtin_potential("doublewell"))
    pts = sorted(s.q[0] for s in critical_set(h))
    assert np.allclose(pts, [-1.0, 0.0, 1.0], atol=1e-9)


def test_flow_conserves_energy():
    h = hamiltonian_symbol(builtin_potential("doublewell"))
    tr = flow(h, PhasePoint((0.5,), (0.0,)), 10.0)
    assert tr.drift < 1e-7
    plain = flow(h, PhasePoint((0.5,), (0.0,)), 10.0, order=2)
    assert plain.drift < 1e-5


@pytest.mark.parametrize("name, point", [("doublewell", ((1.0,), (0.0,))),
                                         ("doublewell", ((0.0,), (0.0,))),
                                         ("mexicanhat", ((0.6, 0.8), (0.0, 0.0)))])
def test_flow_fixes_critical_points(name, point):
    h = hamiltonian_symbol(builtin_potential(name))
    tr = flow(h, PhasePoint(*point), 5.0)
    assert np.abs(np.concatenate([tr.q[-1], tr.p[-1]]) - np.concatenate(point)).max() < 1e-12


def test_flow_needs_a_hamiltonian():
    with pytest.raises(SymbolError):
        flow(constant(1.0, 1), PhasePoint((0.0,), (0.0,)), 1.0)


def test_gibbs_symbol_is_product_of_factors():
    V = builtin_potential("doublewell")
    gs = gibbs_symbol(V, 0.7)
    s = PhasePoint((0.4,), (0.3,))
    assert np.isclose(gs.at(s), np.exp(-0.7 * (0.09 + V(np.array([0.4])))))
    with pytest.raises(SymbolError):
        gibbs_symbol(V, 0.0)
