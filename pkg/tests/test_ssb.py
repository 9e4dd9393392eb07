import copy
import json

import numpy as np
import pytest

from semiclassica.errors import GoldenMismatch
from semiclassica.grid import GridSpec
from semiclassica.phase_space import PhasePoint, builtin_potential, coordinate, hamiltonian_symbol
from semiclassica.ssb import (ClassicalState, canonical, check_report, classical_ground_states,
                              classify_state, compare_reports, render_text, ssb_report)
from semiclassica.symmetry import make_group

DW = builtin_potential("doublewell")
H_DW = hamiltonian_symbol(DW)
Z2 = make_group("z2", 1)
PLUS = PhasePoint((1.0,), (0.0,))
MINUS = PhasePoint((-1.0,), (0.0,))


@pytest.mark.parametrize("mu, expected", [
    (ClassicalState.dirac(PLUS), (True, False, True)),
    (ClassicalState([(PLUS, 0.5), (MINUS, 0.5)]), (True, True, False)),
    (ClassicalState([(PLUS, 0.7), (MINUS, 0.3)]), (True, False, False)),
    (ClassicalState.dirac(PhasePoint((0.0,), (0.0,))), (True, True, True)),
    (ClassicalState.dirac(PhasePoint((0.5,), (0.0,))), (False, False, True)),
    (ClassicalState.orbit(Z2, PLUS), (True, True, False)),
])
def test_classification_truth_table(mu, expected):
    c = classify_state(mu, H_DW, Z2)
    assert (c["is_ground"], c["is_G_invariant"], c["is_extremal"]) == expected


def test_weights_must_be_a_probability():
    with pytest.raises(ValueError):
        ClassicalState([(PLUS, 0.6), (MINUS, 0.6)])


def test_orbit_measure_integrates_to_average():
    x = coordinate(0, "q", 1)
    assert abs(ClassicalState.orbit(Z2, PLUS).integrate(x)) < 1e-12
    assert np.isclose(ClassicalState.dirac(PLUS).integrate(x), 1.0)


def test_doublewell_ground_structure():
    cs = classical_ground_states(H_DW, Z2)
    qs = sorted(round(s.q[0], 8) for s in cs.critical)
    assert qs == [-1.0, 0.0, 1.0]
    assert sorted(round(s.q[0], 8) for s in cs.minimizers) == [-1.0, 1.0]
    assert cs.min_value == pytest.approx(DW.min_value, abs=1e-12)
    assert sorted(len(o) for o in cs.orbits) == [1, 2]


def test_mexican_hat_minimizers_form_a_circle():
    V = builtin_potential("mexicanhat")
    cs = classical_ground_states(hamiltonian_symbol(V), make_group("so2", 2))
    assert cs.circle_radius == pytest.approx(1.0, abs=1e-9)
    r = [np.hypot(*s.q) for s in cs.minimizers]
    assert np.allclose(r, 1.0, atol=1e-9)
    # the whole circle is one orbit, the origin another
    assert len(cs.orbits) == 2


def test_compare_reports():
    rep = {"a": 1.0, "b": [0.5, True], "c": {"d": "x"}}
    gold = copy.deepcopy(rep)
    assert compare_reports(rep, gold) == []
    gold["a"] = 1.0 + 1e-10
    assert compare_reports(rep, gold) == []
    gold["a"] = 1.0 + 1e-6
    assert compare_reports(rep, gold)
    gold = copy.deepcopy(rep)
    gold["b"][1] = False
    assert compare_reports(rep, gold)
    with pytest.raises(GoldenMismatch):
        check_report(rep, {"a": 1.0})
    assert canonical({"v": 1 / 3}) == {"v": "0.333333333333"}


@pytest.fixture(scope="module")
def harmonic_report():
    return ssb_report(builtin_potential("harmonic"), make_group("trivial", 1),
                      hbars=(0.5, 0.2), grid=GridSpec(1, 6.0, 256))


def test_harmonic_has_no_weak_breaking(harmonic_report):
    r = harmonic_report
    assert not r["classical"]["weak_ssb"]
    assert not r["emergence"]["emergent"]
    assert r["quantum"]["no_ssb"]
    assert r["quantum"]["per_hbar"][0]["E0"] == pytest.approx(0.5, abs=1e-8)


def test_report_is_json_and_renders(harmonic_report):
    text = render_text(harmonic_report)
    assert text.startswith("potential harmonic, group trivial")
    assert "emergent no" in text
    back = json.loads(json.dumps(harmonic_report))
    assert compare_reports(back, back) == []
