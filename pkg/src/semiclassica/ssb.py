"""Classical ground states, their symmetry classification, and the report on
symmetry breaking in the classical and quantum theories.

A classical state is a probability measure on phase space, given either by a
finite list of weighted atoms or as the uniform measure on a group orbit.
"""
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .coherent import husimi_expectation
from .errors import GoldenMismatch
from .grid import default_grid, inner_product
from .limits import (DEFAULT_HBARS, cached_ground_state, classical_limit_sweep,
                     expectation_grid, standard_bumps)
from .phase_space import (PhasePoint, critical_set, flow, hamiltonian_symbol,
                          polynomial_cutoff)
from .symmetry import group_for_potential, unitary_rep

SCHEMA = "ssb-report/1"
ATOM_TOL = 1e-8
WEIGHT_TOL = 1e-10
GROUND_TOL = 1e-6
MIN_TOL = 1e-9
OVERLAP_TOL = 1e-6
CANONICAL_DIGITS = 12


@dataclass
class ClassicalState:
    """Probability measure on phase space.

    Either ``atoms`` (list of ``(PhasePoint, weight)``) or an orbit measure:
    ``group`` together with ``base``, spread uniformly over the group's
    quadrature elements.
    """

    atoms: list = field(default_factory=list)
    group: object = None
    base: PhasePoint = None

    def __post_init__(self):
        if self.group is None:
            w = np.array([a[1] for a in self.atoms], dtype=float)
            if w.size == 0 or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
                raise ValueError("atom weights must be non-negative and sum to one")

    @staticmethod
    def dirac(point):
        return ClassicalState([(point, 1.0)])

    @staticmethod
    def orbit(G, base):
        return ClassicalState(group=G, base=base)

    def points(self):
        """Atoms with coincident points merged."""
        if self.group is None:
            raw = [(np.array(s.array()), w) for s, w in self.atoms]
        else:
            els = self.group.elements()
            q0, p0 = np.array(self.base.q), np.array(self.base.p)
            raw = []
            for g in els:
                q, p = self.group.act_array(g, q0, p0)
                raw.append((np.concatenate([q, p]), 1.0 / len(els)))
        merged = []
        for x, w in raw:
            for m in merged:
                if np.linalg.norm(m[0] - x) < ATOM_TOL:
                    m[1] += w
                    break
            else:
                merged.append([x, w])
        return [(x, w) for x, w in merged]

    @property
    def mass(self):
        return float(sum(w for _, w in self.points()))

    def integrate(self, f):
        n = f.n
        return float(sum(w * np.real(f(x[:n], x[n:])) for x, w in self.points()))

    def pushforward(self, G, g):
        pts = []
        for x, w in self.points():
            n = G.n
            q, p = G.act_array(g, x[:n], x[n:])
            pts.append((PhasePoint(tuple(q), tuple(p)), w))
        return ClassicalState(pts)

    def describe(self):
        if self.group is not None:
            return {"orbit": {"group": self.group.name, "base": _pt(self.base),
                              "nodes": len(self.group.elements())}}
        return {"atoms": [[_pt(s), w] for s, w in self.atoms]}


def _pt(s):
    # Newton leaves residues near 1e-24 on exact zeros; report them as zero
    snap = lambda v: 0.0 if abs(v) < 1e-12 else float(v)
    return [[snap(v) for v in s.q], [snap(v) for v in s.p]]


def _same_measure(a, b):
    pa, pb = a.points(), b.points()
    if len(pa) != len(pb):
        return False
    for x, w in pa:
        hits = [v for y, v in pb if np.linalg.norm(x - y) < ATOM_TOL]
        if len(hits) != 1 or abs(hits[0] - w) > WEIGHT_TOL:
            return False
    return True


def _in_critical_set(h, x):
    n = h.n
    dq, dp = h.gradient(x[:n], x[n:])
    return float(np.linalg.norm(np.concatenate([np.ravel(dq), np.ravel(dp)]))) < GROUND_TOL


def classify_state(mu, h, G):
    """``{'is_ground', 'is_G_invariant', 'is_extremal'}`` for a classical state.

    Ground means supported in the critical set of ``h``; extremal means a
    single Dirac atom.
    """
    pts = mu.points()
    ground = all(_in_critical_set(h, x) for x, _ in pts)
    invariant = all(_same_measure(mu.pushforward(G, g), mu) for g in G.generators())
    return {"is_ground": bool(ground), "is_G_invariant": bool(invariant),
            "is_extremal": len(pts) == 1}


def _same_orbit(G, a, b):
    qa, pa = np.array(a.q), np.array(a.p)
    qb, pb = np.array(b.q), np.array(b.p)
    if G.kind == "SO2":
        ref_a, ref_b = (qa, qb) if np.linalg.norm(qa) > 1e-9 else (pa, pb)
        th = np.arctan2(ref_b[1], ref_b[0]) - np.arctan2(ref_a[1], ref_a[0])
        cands = [th]
    else:
        cands = G.elements()
    for g in cands:
        q, p = G.act_array(g, qa, pa)
        if np.linalg.norm(np.concatenate([q - qb, p - pb])) < 1e-6:
            return True
    return False


@dataclass
class ClassicalGroundStructure:
    critical: list
    minimizers: list
    orbits: list
    min_value: float
    circle_radius: float = None


def classical_ground_states(h, G, box=2.5):
    """Critical set, minimizers and their ``G``-orbit partition.

    Minimizers on a rotation-invariant circle are represented by eight evenly
    spaced points of the circle, which is exact for the Hamiltonians built by
    :func:`hamiltonian_symbol`.
    """
    crit = critical_set(h, box=box, tol=1e-13)
    vals = np.array([float(h.at(s)) for s in crit])
    hmin = vals.min()
    mins = [s for s, v in zip(crit, vals) if v - hmin <= MIN_TOL * (1 + abs(hmin))]
    radius = None
    V = getattr(h, "potential", None)
    if V is not None and V.minimum()[1]["kind"] == "circle":
        radius = V.minimum()[1]["radius"]
        pts = V.minimizer_points(8)
        mins = [PhasePoint(tuple(map(float, q)), (0.0,) * V.n) for q in pts]
        crit = [s for s, v in zip(crit, vals) if v - hmin > MIN_TOL * (1 + abs(hmin))] + mins
    orbits = []
    for s in crit:
        for o in orbits:
            if _same_orbit(G, o[0], s):
                o.append(s)
                break
        else:
            orbits.append([s])
    return ClassicalGroundStructure(crit, mins, orbits, float(hmin), radius)


def limit_measure_compare(psi, mu, symbols, pg=None):
    """``max_f |<psi, Q(f) psi> - int f dmu|`` over the test symbols."""
    worst = 0.0
    for f in symbols:
        grid = pg or expectation_grid(psi, f, psi.hbar)
        worst = max(worst, abs(husimi_expectation(psi, f, grid) - mu.integrate(f)))
    return worst


def default_symbols(V):
    if V.n == 1:
        return standard_bumps(1)
    return [polynomial_cutoff([2, 0], [0, 0], 1.5)]


def default_hbars(V):
    return DEFAULT_HBARS if V.n == 1 else (0.2, 0.1, 0.05)


def golden_thresholds(section):
    """Pass/fail thresholds shipped with the package (``goldens/thresholds.json``)."""
    data = resources.files("semiclassica").joinpath("goldens/thresholds.json").read_text()
    return json.loads(data)[section]


def emergence_thresholds():
    return golden_thresholds("emergence")


def ssb_report(V, G=None, hbars=None, grid=None, symbols=None, threshold=None, workers=1):
    """Classical, quantum and emergence sections as a JSON-ready dict."""
    G = G or group_for_potential(V)
    grid = grid or default_grid(V.n)
    hbars = sorted(hbars or default_hbars(V), reverse=True)
    symbols = symbols or default_symbols(V)
    if threshold is None:
        threshold = emergence_thresholds().get(V.name, 0.05)
    h = hamiltonian_symbol(V)

    # classical section
    cs = classical_ground_states(h, G)
    extremal = []
    for s in cs.minimizers:
        c = classify_state(ClassicalState.dirac(s), h, G)
        extremal.append({"point": _pt(s), **c})
    orbit_state = ClassicalState.orbit(G, cs.minimizers[0])
    orbit_cls = classify_state(orbit_state, h, G)
    drift = 0.0
    for s in cs.minimizers:
        tr = flow(h, s, 1.0)
        end = np.concatenate([tr.q[-1], tr.p[-1]])
        drift = max(drift, float(np.linalg.norm(end - np.array(s.array()))))
    many = cs.circle_radius is not None or len(cs.minimizers) > 1
    weak = many and any(e["is_ground"] and e["is_extremal"] and not e["is_G_invariant"]
                        for e in extremal)
    classical = {
        "critical_set": [_pt(s) for s in cs.critical] if cs.circle_radius is None else
        [_pt(o[0]) for o in cs.orbits],
        "minimum": cs.min_value,
        "minimizer_orbit": ({"kind": "circle", "radius": cs.circle_radius}
                            if cs.circle_radius is not None else
                            {"kind": "points", "points": [_pt(s) for s in cs.minimizers]}),
        "orbits": [{"representative": _pt(o[0]), "size": len(o)} for o in cs.orbits],
        "extremal_ground_states": extremal,
        "invariant_ground_states": [{"state": orbit_state.describe(), **orbit_cls}],
        "flow_displacement": drift,
        "weak_ssb": bool(weak),
    }

    # quantum section
    rows = []
    for hb in hbars:
        _, gs = cached_ground_state(V, hb, grid)
        psi = gs.psi
        overlaps = []
        for g in G.generators():
            u = unitary_rep(G, g, psi)
            overlaps.append(float(abs(inner_product(psi, u))))
        if gs.gap_resolved:
            gap, route = gs.gap, "direct"
        elif gs.barrier_splitting is not None:
            gap, route = gs.barrier_splitting, "barrier-estimate"
        else:
            gap, route = gs.gap, "unresolved"
        ok = gap > 0 and all(abs(o - 1) < OVERLAP_TOL for o in overlaps)
        rows.append({"hbar": hb, "E0": gs.energy, "gap": gap, "gap_route": route,
                     "sector": gs.sector, "overlaps": overlaps, "no_ssb": bool(ok)})
    no_ssb = all(r["no_ssb"] for r in rows)
    quantum = {"per_hbar": rows, "no_ssb": bool(no_ssb)}

    # emergence section
    sweep = classical_limit_sweep(V, G, symbols, hbars, grid=grid, workers=workers)
    d = sweep.column("max_defect")
    _, gs = cached_ground_state(V, hbars[-1], grid)
    defect = limit_measure_compare(gs.psi, orbit_state, symbols)
    emergence = {"sweep_hbars": list(hbars), "sweep_max_defect": d.tolist(),
                 "limit_measure_defect": defect, "threshold": threshold,
                 "emergent": bool(weak and no_ssb and defect < threshold)}
    return {"schema": SCHEMA, "potential": V.to_dict(), "group": G.name,
            "grid": {"n": grid.n, "L": grid.L, "N": grid.N},
            "classical": classical, "quantum": quantum, "emergence": emergence}


def canonical(obj):
    """Floats formatted to 12 significant digits, recursively."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, float, np.floating, np.integer)):
        return f"{float(obj):.{CANONICAL_DIGITS}g}"
    if isinstance(obj, dict):
        return {k: canonical(v) for k, v in obj.items()}
    return [canonical(v) for v in obj]


def compare_reports(report, golden, rel_tol=1e-8, path="report"):
    """Mismatches between two reports: exact on canonical values, else a
    relative tolerance on numbers."""
    bad = []
    if isinstance(golden, dict):
        if not isinstance(report, dict) or set(golden) != set(report):
            return [f"{path}: keys differ"]
        for k in golden:
            bad += compare_reports(report[k], golden[k], rel_tol, f"{path}.{k}")
        return bad
    if isinstance(golden, list):
        if not isinstance(report, list) or len(report) != len(golden):
            return [f"{path}: lengths differ"]
        for i, (a, b) in enumerate(zip(report, golden)):
            bad += compare_reports(a, b, rel_tol, f"{path}[{i}]")
        return bad
    if canonical(report) == canonical(golden):
        return []
    if isinstance(golden, (int, float)) and not isinstance(golden, bool) \
            and isinstance(report, (int, float)) and not isinstance(report, bool):
        if abs(report - golden) <= rel_tol * max(abs(golden), 1e-300):
            return []
    return [f"{path}: {report!r} vs golden {golden!r}"]


def check_report(report, golden, rel_tol=1e-8):
    bad = compare_reports(json.loads(json.dumps(report)), golden, rel_tol)
    if bad:
        raise GoldenMismatch("; ".join(bad[:5]))


def render_text(report):
    c, q, e = report["classical"], report["quantum"], report["emergence"]
    lines = [f"potential {report['potential']['name']}, group {report['group']}",
             f"classical: minimum {c['minimum']:.6g}, minimizers {c['minimizer_orbit']['kind']}, "
             f"weak SSB {'yes' if c['weak_ssb'] else 'no'}"]
    for r in q["per_hbar"]:
        ov = ", ".join(f"{o:.12f}" for o in r["overlaps"]) or "-"
        lines.append(f"  hbar {r['hbar']:<5g} E0 {r['E0']:.10f}  gap {r['gap']:.4e} ({r['gap_route']})"
                     f"  overlaps {ov}")
    lines.append(f"quantum: no SSB at every hbar: {'yes' if q['no_ssb'] else 'no'}")
    lines.append(f"emergence: limit-measure defect {e['limit_measure_defect']:.4g} "
                 f"(threshold {e['threshold']:g}), emergent {'yes' if e['emergent'] else 'no'}")
    return "\n".join(lines) + "\n"
