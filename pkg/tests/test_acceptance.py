"""Acceptance criteria, one test each. Every test records a PASS/FAIL line
(listed again in the terminal summary) and then asserts the same verdict."""
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from semiclassica import cli, limits
from semiclassica.coherent import PhaseGrid, berezin_dense, probe_states
from semiclassica.grid import GridSpec, WaveFunction, default_grid
from semiclassica.limits import (DEFAULT_HBARS, berezin_check_sweep, cached_ground_state,
                                 classical_limit_sweep, eigenvalue_convergence_sweep,
                                 free_semigroup_defect, gaussian_probes, localization_sweep,
                                 semigroup_sweep, trend_ok)
from semiclassica.operators import probe_norm
from semiclassica.phase_space import (PhasePoint, builtin_potential, gaussian_bump, gibbs_symbol,
                                      polynomial_cutoff)
from semiclassica.schrodinger import build_hamiltonian, lowest_levels
from semiclassica.ssb import compare_reports, golden_thresholds
from semiclassica.symmetry import commutator_defect, equivariance_defect, make_group
from semiclassica.weyl import heat_smooth, weyl_of_symbol

DW = builtin_potential("doublewell")
HARM = builtin_potential("harmonic")
HAT = builtin_potential("mexicanhat")
TESTS = Path(__file__).parent


def _fresh_cache():
    # timed criteria pay for their own ground states
    limits._GROUND_CACHE.clear()


def _rows(sweep, *cols):
    return "; ".join(f"{c}=" + ",".join(f"{v:.3g}" for v in sweep.column(c)) for c in cols)


def test_criterion_01_harmonic_levels(verdict):
    grid = GridSpec(1, 6.0, 1024)
    t0 = time.perf_counter()
    worst = 0.0
    for h in (0.5, 0.1, 0.05):
        E = lowest_levels(build_hamiltonian(HARM, h, grid), 3, tol=1e-10).values
        exact = (2 * np.arange(3) + 1) * h
        worst = max(worst, float(np.max(np.abs(E - exact) / exact)))
    dt = time.perf_counter() - t0
    # second route: dense diagonalization on a coarser grid
    dense_worst = 0.0
    for h in (0.5, 0.1, 0.05):
        ev = np.linalg.eigvalsh(build_hamiltonian(HARM, h, GridSpec(1, 6.0, 256)).to_dense())[:3]
        dense_worst = max(dense_worst, float(np.max(np.abs(ev - (2 * np.arange(3) + 1) * h) / h)))
    ok = worst < 1e-6 and dense_worst < 1e-6 and dt < 5.0
    verdict(1, ok, f"max rel error {worst:.2e} (Lanczos, N=1024), {dense_worst:.2e} (dense, N=256), "
                   f"{dt:.2f} s")
    assert ok


def test_criterion_02_ground_energy_convergence(verdict):
    _fresh_cache()
    grid = default_grid(1)
    t0 = time.perf_counter()
    E = []
    for h in DEFAULT_HBARS:
        E.append(cached_ground_state(DW, h, grid)[1].energy)
    dt = time.perf_counter() - t0
    E = np.array(E)  # descending hbar
    ok = bool(np.all(E > 0) and np.all(np.diff(E) <= 0) and E[-1] < 0.12 and dt < 30)
    verdict(2, ok, "E0 = " + ", ".join(f"{e:.6f}" for e in E) + f" at hbar {list(DEFAULT_HBARS)}, "
                   f"{dt:.1f} s")
    assert ok


def test_criterion_03_jensen_chain(verdict):
    grid = default_grid(1)
    worst = np.inf
    for h in DEFAULT_HBARS:
        _, gs = cached_ground_state(DW, h, grid)
        rho = np.abs(gs.psi.values) ** 2 * grid.cell
        for t in (0.5, 1.0, 2.0):
            mid = float(np.sum(np.exp(-t * DW(grid.points())) * rho))
            worst = min(worst, mid - np.exp(-t * gs.energy), 1.0 - mid)
    ok = worst >= -1e-9
    verdict(3, ok, f"smallest slack {worst:.3e} over t in (0.5, 1, 2) and the sweep")
    assert ok


def test_criterion_04_berezin_structure(verdict):
    s = berezin_check_sweep()
    ident = s.column("identity_defect").max()
    floor = s.column("ritz_floor").min()
    excess = s.column("norm_excess").max()
    trace = s.column("trace_rel_error").max()
    ok = ident < 1e-3 and floor >= -1e-9 and excess <= 1e-3 and trace < 0.01
    verdict(4, ok, f"Q(1)-I {ident:.1e}, Ritz floor {floor:.1e}, norm excess {excess:.3f}, "
                   f"trace error {trace:.1e}")
    assert ok


def test_criterion_05_axiom_trends(verdict):
    th = golden_thresholds("axioms")
    t0 = time.perf_counter()
    s = limits.axiom_suite()
    dt = time.perf_counter() - t0
    bad = [c for c in th if not (trend_ok(s.column(c)) and s.column(c)[-1] < th[c])]
    ok = not bad and dt < 180
    verdict(5, ok, _rows(s, *th) + f"; {dt:.0f} s" + (f"; failing: {', '.join(bad)}" if bad else ""))
    assert ok


def test_criterion_06_heat_smoothing_bridge(verdict):
    grid, h = default_grid(1), 0.1
    g = gibbs_symbol(DW, 1.0)
    # Berezin from coherent-state projectors on the phase lattice, not the
    # separable fast path (which is itself built from mollified Weyl factors)
    QB = berezin_dense(g, h, grid, PhaseGrid(grid, h))
    d = probe_norm(QB - weyl_of_symbol(heat_smooth(g, h), h, grid), probe_states(grid, h, 5))
    ok = d < 1e-5
    verdict(6, ok, f"probe norm of lattice Berezin minus Weyl of the smoothed Gibbs symbol {d:.2e}")
    assert ok


def test_criterion_07_semigroup_and_eigenvalues(verdict):
    s = semigroup_sweep(DW)
    fams = ("berezin_vs_heat_defect", "berezin_vs_potential_defect", "heat_vs_potential_defect")
    rising = [c for c in s.columns[5:] if not trend_ok(s.column(c))]
    e = eigenvalue_convergence_sweep(DW, 1.0, norms=False)
    routes = float(np.max(np.abs(e.column("lambda0") - e.column("lambda0_lanczos"))))
    lam, en = e.column("lambda_defect")[-1], e.column("energy_defect")[-1]
    ok = not rising and lam < 0.05 and en < 0.05 and routes < 1e-8
    verdict(7, ok, _rows(s, *fams) + f"; non-decreasing per-probe columns {len(rising)}/"
                   f"{len(s.columns) - 5}; at hbar 0.02 lambda defect {lam:.4f}, energy defect "
                   f"{en:.4f}; power vs Lanczos {routes:.1e}")
    assert ok


def test_criterion_08_localization(verdict):
    s = localization_sweep(DW)
    m = s.column("mass_outside_defect")
    ok = trend_ok(m) and m[-1] < 0.05
    verdict(8, ok, _rows(s, "mass_outside_defect"))
    assert ok


def test_criterion_09_harmonic_classical_limit(verdict):
    f = polynomial_cutoff([1], [0], 2.0)
    s = classical_limit_sweep(HARM, make_group("trivial", 1), [f])
    # sup |grad f| on a fine phase-space mesh (the maximum sits at the origin)
    q, p = np.meshgrid(np.linspace(-6, 6, 601), np.linspace(-6, 6, 601), indexing="ij")
    dq, dp = f.gradient(q[..., None], p[..., None])
    lip = float(np.sqrt(dq[..., 0] ** 2 + dp[..., 0] ** 2).max())
    meas = np.abs(s.column("measured_0"))
    bound = 3 * np.sqrt(s.column("hbar")) * lip
    ok = bool(np.all(meas < bound)) and s.column("target_0").max() == 0.0
    verdict(9, ok, f"max |measured|/bound {np.max(meas / bound):.2e} (|grad f| = {lip:.3f})")
    assert ok


def test_criterion_10_z2_classical_limit(verdict):
    _fresh_cache()
    t0 = time.perf_counter()
    s = classical_limit_sweep(DW)
    dt = time.perf_counter() - t0
    d = s.column("max_defect")
    ok = trend_ok(d) and d[-1] < 0.05 and dt < 120
    verdict(10, ok, _rows(s, "max_defect") + f"; {dt:.1f} s")
    assert ok


def test_criterion_11_so2_classical_limit(verdict):
    t0 = time.perf_counter()
    f = polynomial_cutoff([2, 0], [0, 0], 1.5)
    s = classical_limit_sweep(HAT, make_group("so2", 2), [f], hbars=(0.2, 0.1, 0.05))
    dt = time.perf_counter() - t0
    d = s.column("max_defect")
    target = 0.5 * np.exp(-1 / 4.5)
    ok = d[-1] < 0.08 and abs(s.column("target_0")[0] - target) < 1e-10 and dt < 900
    verdict(11, ok, _rows(s, "max_defect") + f"; circle average {s.column('target_0')[0]:.7f}; "
                    f"{dt:.0f} s")
    assert ok


def test_criterion_12_berezin_vs_schrodinger_vectors(verdict):
    s = classical_limit_sweep(DW, mode="comparison")
    d = s.column("max_defect")
    ok = trend_ok(d) and d[-1] < 0.03
    verdict(12, ok, _rows(s, "max_defect"))
    assert ok


def test_criterion_13_equivariance(verdict):
    f1 = gaussian_bump(PhasePoint((0.5,), (0.3,)), 0.6)
    z2 = equivariance_defect(make_group("z2", 1), -1, f1, 0.1, default_grid(1))
    g2 = GridSpec(2, 4.0, 128)
    f2 = gaussian_bump(PhasePoint((0.5, 0.1), (0.3, 0.0)), 0.6)
    so2 = equivariance_defect(make_group("so2", 2), np.pi / 2, f2, 0.2, g2,
                              PhaseGrid(g2, 0.2, q_extent=2.5, p_extent=2.5),
                              probe_states(g2, 0.2, 2, q_range=0.7, p_range=0.5))
    comm = 0.0
    for V, G, g in ((DW, make_group("z2", 1), -1), (HAT, make_group("so2", 2), np.pi / 2)):
        grid = default_grid(V.n) if V.n == 1 else g2
        X = grid.points()
        probes = [WaveFunction(grid, np.exp(-np.sum((X - 0.2 * k) ** 2, axis=-1) / 0.3)
                               * (1 + 0.3 * X[..., 0])) for k in range(3)]
        comm = max(comm, commutator_defect(G, g, build_hamiltonian(V, 0.1, grid), probes))
    ok = z2 < 1e-6 and so2 < 1e-6 and comm < 1e-10
    verdict(13, ok, f"Z2 {z2:.1e}, quarter turn {so2:.1e}, Hamiltonian commutator {comm:.1e}")
    assert ok


def test_criterion_14_ssb_report_goldens(verdict):
    gdir = Path(str(cli.golden_dir()))
    manifest = json.loads((gdir / "manifest.json").read_text())
    reports, mism = {}, []
    for e in manifest["entries"]:
        if e["config"]["command"] != "ssb-report":
            continue
        rep = cli.run_experiment(cli.complete(dict(e["config"])))
        rep = json.loads(json.dumps(rep, default=limits._jsonable))
        # exact: canonical 12-digit strings must agree, no relative slack
        mism += compare_reports(rep, json.loads((gdir / e["golden"]).read_text()), rel_tol=0.0)
        reports[e["config"]["potential"]] = rep
    dw, ha = reports["doublewell"], reports["harmonic"]
    per = dw["quantum"]["per_hbar"]
    overlaps = all(abs(o - 1) < 1e-6 for r in per for o in r["overlaps"])
    ok = (not mism and dw["classical"]["weak_ssb"] and dw["quantum"]["no_ssb"]
          and dw["emergence"]["emergent"] and all(r["gap"] > 0 for r in per) and overlaps
          and not ha["classical"]["weak_ssb"])
    verdict(14, ok, f"double well: weak SSB {dw['classical']['weak_ssb']}, no quantum SSB "
                    f"{dw['quantum']['no_ssb']}, emergent {dw['emergence']['emergent']}; harmonic "
                    f"weak SSB {ha['classical']['weak_ssb']}; golden mismatches {len(mism)}")
    assert ok, mism[:3]


def test_criterion_15_property_suites(verdict):
    files = ["test_grid.py", "test_phase_space.py", "test_symmetry.py", "test_ssb.py"]
    t0 = time.perf_counter()
    r = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                        *[str(TESTS / f) for f in files]], capture_output=True, text=True,
                       cwd=TESTS.parent)
    dt = time.perf_counter() - t0
    tail = r.stdout.strip().splitlines()[-1] if r.stdout.strip() else r.stderr[-200:]
    ok = r.returncode == 0
    verdict(15, ok, f"{tail} ({dt:.0f} s); full-suite wall time is in the pytest footer")
    assert ok


@pytest.mark.xfail(strict=True, reason="Berezin smearing of exp(-t p^2) is O(hbar), not < 1e-4")
def test_free_semigroup_example():
    grid = default_grid(1)
    d = free_semigroup_defect(1.0, 0.05, grid, gaussian_probes(grid))
    assert d < 1e-4
