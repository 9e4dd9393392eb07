import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from semiclassica.errors import GoldenMismatch, HypothesisError
from semiclassica.grid import GridSpec
from semiclassica.limits import (Neighborhood, SweepResult, berezin_checks, check_transitive,
                                 classical_limit_sweep, localization_sweep, standard_bumps,
                                 trend_ok)
from semiclassica.phase_space import PhasePoint, Potential, builtin_potential, hamiltonian_symbol
from semiclassica.symmetry import make_group

small = GridSpec(1, 6.0, 256)


def _sweep():
    return SweepResult("demo", [0.5, 0.1], ["hbar", "x_defect", "y"],
                       [[0.5, 1 / 3, 2.0], [0.1, 1e-17, np.pi]], {"seed": 4, "grid": {"n": 1}},
                       {"hbar": "Planck constant", "x_defect": "made up", "y": "other"})


def test_csv_round_trip_is_lossless(tmp_path):
    s = _sweep()
    s.write_csv(tmp_path / "s.csv")
    back = SweepResult.read_csv(tmp_path / "s.csv")
    assert back.rows == s.rows and back.columns == s.columns
    assert back.meta == s.meta and back.descriptions == s.descriptions
    assert back.csv_text() == s.csv_text()


def test_json_round_trip():
    s = _sweep()
    back = SweepResult.from_dict(json.loads(s.to_json()))
    assert back.to_json() == s.to_json()


def test_compare_exact_then_tolerance():
    s = _sweep()
    gold = json.loads(s.to_json())
    assert s.compare(gold) == []
    gold["rows"][0][1] += 1e-9
    gold.pop("canonical")
    assert s.compare(gold, {}) != []
    assert s.compare(gold, {"x_defect": 1e-8}) == []
    assert s.compare(gold, {"*": 1e-8}) == []
    with pytest.raises(GoldenMismatch):
        s.check_golden(gold, {"x_defect": 1e-12})


def test_rows_must_match_columns():
    with pytest.raises(ValueError):
        SweepResult("bad", [0.1], ["hbar", "a"], [[0.1]])


@given(st.lists(st.floats(1e-6, 10.0), min_size=2, max_size=8))
def test_trend_accepts_sorted_sequences(vals):
    assert trend_ok(sorted(vals, reverse=True))


def test_trend_rejects_a_rise():
    assert not trend_ok([1.0, 0.5, 0.7, 0.2])
    assert trend_ok([1.0, 0.5, 0.52, 0.2])
    assert not trend_ok([1.0, np.nan])


def test_product_neighborhood_contains_minimizers():
    V = builtin_potential("doublewell")
    nb = Neighborhood.product(V, 0.2)
    assert nb.contains(PhasePoint((1.0,), (0.0,)))
    assert nb.contains(PhasePoint((-1.0,), (0.0,)))
    assert not nb.contains(PhasePoint((0.0,), (0.0,)))
    assert not nb.contains(PhasePoint((1.0,), (1.0,)))


def test_sublevel_neighborhood():
    h = hamiltonian_symbol(builtin_potential("harmonic"))
    nb = Neighborhood.sublevel(h, 0.0, 0.1)
    assert nb.contains(PhasePoint((0.1,), (0.1,)))
    assert not nb.contains(PhasePoint((0.5,), (0.0,)))


def test_transitivity_is_checked():
    V = builtin_potential("doublewell")
    assert len(check_transitive(V, make_group("z2", 1))) == 2
    with pytest.raises(HypothesisError):
        check_transitive(V, make_group("trivial", 1))
    with pytest.raises(HypothesisError):
        check_transitive(builtin_potential("mexicanhat"), make_group("z2", 2))


def test_standard_bumps_count_and_peak():
    bumps = standard_bumps()
    assert len(bumps) == 10 and len(standard_bumps(2, 3)) == 3
    assert np.isclose(bumps[0].at(PhasePoint((1.0,), (0.0,))), 1.0)


def test_localization_sweep_shape():
    V = builtin_potential("doublewell")
    s = localization_sweep(V, (0.5, 0.1), grid=small)
    assert s.hbars == [0.5, 0.1]
    assert np.allclose(s.column("total_mass"), 1.0, atol=1e-9)
    m = s.column("mass_outside_defect")
    assert m[1] < m[0]


def test_workers_do_not_change_results():
    V = builtin_potential("doublewell")
    a = classical_limit_sweep(V, hbars=(0.5, 0.2), grid=small, workers=1)
    b = classical_limit_sweep(V, hbars=(0.5, 0.2), grid=small, workers=2)
    assert a.csv_text() == b.csv_text()


def test_comparison_mode_columns():
    V = builtin_potential("doublewell")
    s = classical_limit_sweep(V, observables=standard_bumps(1, 2), hbars=(0.2,), grid=small,
                              mode="comparison")
    assert s.columns[:4] == ["hbar", "max_defect", "gap_schrodinger", "gap_berezin"]
    with pytest.raises(ValueError):
        classical_limit_sweep(V, hbars=(0.2,), grid=small, mode="wigner")


def test_berezin_structure_at_one_hbar():
    r = berezin_checks(0.2, small)
    assert r["identity_defect"] < 1e-10
    assert r["ritz_floor"] > -1e-12
    assert r["norm_excess"] <= 1e-12
    assert r["trace_rel_error"] < 1e-8


def test_tilted_well_has_one_minimizer():
    V = Potential("tilted", 1, monomial=[0.0, 0.1, -2.0, 0.0, 1.0], symmetry="none")
    pts = check_transitive(V, make_group("trivial", 1))
    assert len(pts) == 1 and pts[0].q[0] < 0
