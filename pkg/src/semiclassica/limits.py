"""hbar sweeps: localization, classical limits, eigenvalue and semigroup
convergence, and the quantization axioms.

Every sweep returns a :class:`SweepResult` with one row per ``hbar`` in
descending order. Per-``hbar`` jobs are independent and may run on a thread
pool; results are always gathered in ``hbar`` order.
"""
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import linalg
from .coherent import (PhaseGrid, berezin_dense, berezin_product, berezin_separable,
                       fitted_phase_grid, husimi_expectation, probe_states)
from .errors import ConvergenceError, GoldenMismatch, GridError, HypothesisError, SymbolError
from .grid import WaveFunction, default_grid, normalize
from .operators import FourierMultiplier, Multiplication, operator_norm, probe_norm
from .phase_space import (PhasePoint, bracket_symbol, constant, gaussian_bump,
                          gibbs_symbol)
from .schrodinger import build_hamiltonian, ground_state, sector_projector, semigroup_apply
from .symmetry import group_for_potential, haar_average
from .weyl import weyl_of_symbol

DEFAULT_HBARS = (0.5, 0.2, 0.1, 0.05, 0.02)
TREND_SLACK = 0.1
CANONICAL_DIGITS = 12


# -- results -------------------------------------------------------------------

def grid_dict(grid):
    return {"n": grid.n, "L": grid.L, "N": grid.N}


@dataclass
class SweepResult:
    """Rows of scalars indexed by ``hbar``.

    ``columns[0]`` is always ``"hbar"``. ``descriptions`` documents the columns
    and is written into the CSV header comment.
    """

    experiment: str
    hbars: list
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)
    descriptions: dict = field(default_factory=dict)

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError("row length does not match the columns")

    def column(self, name):
        j = self.columns.index(name)
        return np.array([r[j] for r in self.rows], dtype=float)

    def defect_columns(self):
        return [c for c in self.columns if "defect" in c]

    def csv_text(self):
        out = io.StringIO()
        out.write(f"# experiment: {self.experiment}\n")
        out.write(f"# meta: {json.dumps(self.meta, sort_keys=True, default=_jsonable)}\n")
        for c in self.columns:
            out.write(f"# {c}: {self.descriptions.get(c, '')}\n")
        out.write(",".join(self.columns) + "\n")
        for r in self.rows:
            out.write(",".join(f"{float(v):.17g}" for v in r) + "\n")
        return out.getvalue()

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write(self.csv_text())

    @staticmethod
    def read_csv(path):
        with open(path) as fh:
            lines = fh.read().splitlines()
        experiment = lines[0].split(":", 1)[1].strip()
        desc, meta = {}, {}
        body = []
        for ln in lines[1:]:
            if ln.startswith("# meta: "):
                meta = json.loads(ln[len("# meta: "):])
            elif ln.startswith("# "):
                k, v = ln[2:].split(":", 1)
                desc[k] = v.strip()
            else:
                body.append(ln)
        cols = body[0].split(",")
        rows = [[float(v) for v in ln.split(",")] for ln in body[1:]]
        return SweepResult(experiment, [r[0] for r in rows], cols, rows, meta, desc)

    def to_dict(self):
        return {"experiment": self.experiment, "hbars": list(self.hbars),
                "columns": list(self.columns), "rows": [list(map(float, r)) for r in self.rows],
                "canonical": self.canonical(), "meta": self.meta,
                "descriptions": self.descriptions}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True, default=_jsonable)

    @staticmethod
    def from_dict(d):
        return SweepResult(d["experiment"], d["hbars"], d["columns"], d["rows"],
                           d.get("meta", {}), d.get("descriptions", {}))

    def canonical(self):
        return [[f"{float(v):.{CANONICAL_DIGITS}g}" for v in r] for r in self.rows]

    def compare(self, golden, tolerances=None):
        """Differences against a golden result: canonical strings first, then
        absolute per-column tolerances. Returns a list of messages (empty when
        the results agree)."""
        tolerances = tolerances or golden.get("tolerances", {})
        if list(golden["columns"]) != list(self.columns):
            return [f"columns differ: {golden['columns']} vs {self.columns}"]
        if len(golden["rows"]) != len(self.rows):
            return ["row counts differ"]
        mine = self.canonical()
        theirs = golden.get("canonical") or SweepResult.from_dict(golden).canonical()
        bad = []
        for i, (a, b) in enumerate(zip(mine, theirs)):
            for j, c in enumerate(self.columns):
                if a[j] == b[j]:
                    continue
                tol = tolerances.get(c, tolerances.get("*", 0.0))
                diff = abs(float(a[j]) - float(b[j]))
                if not diff <= tol:
                    bad.append(f"{self.experiment} row {i} {c}: {a[j]} vs golden {b[j]} (tol {tol:g})")
        return bad

    def check_golden(self, golden, tolerances=None):
        bad = self.compare(golden, tolerances)
        if bad:
            raise GoldenMismatch("; ".join(bad))


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def trend_ok(values, slack=TREND_SLACK):
    """Monotone-ish decrease: every step grows by at most ``slack`` (relative),
    and the last value is the minimum or within ``slack`` of it."""
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        return False
    steps = np.all(v[1:] <= v[:-1] * (1 + slack) + 1e-15)
    return bool(steps and v[-1] <= v.min() * (1 + slack) + 1e-15)


def _run(job, hbars, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(job, hbars))
    return [job(h) for h in hbars]


def _descending(hbars):
    hs = sorted({float(h) for h in hbars}, reverse=True)
    if not hs or hs[-1] <= 0:
        raise ValueError("hbar list must be non-empty and positive")
    return hs


# -- shared state ------------------------------------------------------------------

_GROUND_CACHE = {}


def cached_ground_state(V, hbar, grid, tol=1e-9):
    """:func:`ground_state` memoized on ``(potential, hbar, grid)``."""
    key = (json.dumps(V.to_dict(), sort_keys=True), float(hbar), grid.n, grid.L, grid.N, tol)
    if key not in _GROUND_CACHE:
        H = build_hamiltonian(V, hbar, grid)
        _GROUND_CACHE[key] = (H, ground_state(H, tol=tol))
    return _GROUND_CACHE[key]


def _grid_state(x, grid, hbar):
    x = x.reshape(grid.shape)
    s = np.sum(x)
    if abs(s) > 0:
        x = x * (np.conj(s) / abs(s))
    x = np.real_if_close(x / np.sqrt(grid.cell), tol=1e6)
    return normalize(WaveFunction(grid, x, hbar))


def berezin_gibbs_ground(V, t, hbar, grid, tol=1e-9):
    """Top eigenpair of ``Q(exp(-t h))`` by Lanczos on its negative.

    For reflection symmetric potentials the even and odd sectors are solved
    separately, as for the Hamiltonian, so the reported gap is reliable.

    Returns
    -------
    psi, lam, gap
    """
    Q = berezin_product(gibbs_symbol(V, t), hbar, grid)
    neg = lambda v: -Q.flat()(v)
    v0 = np.random.default_rng(0).standard_normal(int(np.prod(grid.shape)))
    tag = V.symmetry
    if tag == "Z2":
        P = sector_projector(grid, "Z2")
        ev, X, *_ = linalg.lanczos_lowest(neg, v0, 2, tol=tol, project=P)
        od, *_ = linalg.lanczos_lowest(neg, v0, 1, tol=tol, project=sector_projector(grid, "Z2-odd"))
        lam = -ev[0]
        gap = lam - max(-ev[1], -od[0])
    else:
        P = sector_projector(grid, tag) if tag == "SO2" else None
        ev, X, *_ = linalg.lanczos_lowest(neg, v0, 2, tol=tol)
        lam, gap = -ev[0], ev[1] - ev[0]
        if P is not None and gap < 1e-12:
            ev1, X, *_ = linalg.lanczos_lowest(neg, v0, 1, tol=tol, project=P)
            lam = -ev1[0]
    return _grid_state(X[0], grid, hbar), float(lam), float(gap)


def expectation_grid(psi, f, hbar):
    """Phase lattice for ``<psi, Q(f) psi>``: the full lattice in 1-D, the lattice
    fitted to ``f`` and ``psi`` in 2-D."""
    if psi.grid.n == 1:
        return PhaseGrid(psi.grid, hbar)
    return fitted_phase_grid(psi.grid, hbar, symbol=f, states=[psi])


# -- neighbourhoods and localization ------------------------------------------------

@dataclass
class Neighborhood:
    """Open set in phase space, tested pointwise.

    ``kind='sublevel'``: ``{sigma : |e(sigma) - level| < eps}`` for a symbol ``e``.
    ``kind='product'``: ``{|exp(-t p^2) - 1| < eps} x {|exp(-t V(q)) - exp(-t min V)| < eps}``.
    """

    kind: str
    eps: float
    symbol: object = None
    level: float = 0.0
    potential: object = None
    t: float = 1.0

    @staticmethod
    def sublevel(e, level, eps):
        return Neighborhood("sublevel", eps, symbol=e, level=level)

    @staticmethod
    def product(V, eps, t=1.0):
        return Neighborhood("product", eps, potential=V, t=t)

    def mask(self, q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        if self.kind == "sublevel":
            return np.abs(self.symbol(q, p) - self.level) < self.eps
        V, t = self.potential, self.t
        mp = np.abs(np.exp(-t * np.sum(p * p, axis=-1)) - 1.0) < self.eps
        mq = np.abs(np.exp(-t * V(q)) - np.exp(-t * V.min_value)) < self.eps
        return mq & mp

    def contains(self, point):
        return bool(self.mask(np.array(point.q), np.array(point.p)))

    def describe(self):
        if self.kind == "sublevel":
            return {"kind": "sublevel", "symbol": self.symbol.name, "level": self.level, "eps": self.eps}
        return {"kind": "product", "potential": self.potential.name, "eps": self.eps, "t": self.t}


def localization_mass(psi, nbhd, pg):
    """Husimi mass of ``psi`` on the lattice nodes outside ``nbhd``."""
    tot = 0.0
    p = pg.p_nodes
    for sl in pg.chunks():
        q = pg.q_nodes[sl]
        W = np.abs(pg.analysis(psi.values, sl)) ** 2
        inside = nbhd.mask(q[:, None, :], p[None, :, :])
        tot += float(np.sum(W[~inside]))
    return pg.weight * tot


def localization_sweep(V, hbars=DEFAULT_HBARS, eps=0.2, t=1.0, grid=None, workers=1):
    grid = grid or default_grid(V.n)
    nb = Neighborhood.product(V, eps, t)
    hs = _descending(hbars)

    def job(h):
        _, gs = cached_ground_state(V, h, grid)
        pg = PhaseGrid(grid, h) if grid.n == 1 else fitted_phase_grid(grid, h, states=[gs.psi])
        return [h, localization_mass(gs.psi, nb, pg), pg.mass(gs.psi)]

    rows = _run(job, hs, workers)
    return SweepResult("localization", hs, ["hbar", "mass_outside_defect", "total_mass"], rows,
                       {"grid": grid_dict(grid), "potential": V.to_dict(), "neighborhood": nb.describe()},
                       {"hbar": "Planck constant",
                        "mass_outside_defect": "Husimi mass of the ground state outside the neighbourhood",
                        "total_mass": "total Husimi mass on the lattice"})


# -- classical limits -------------------------------------------------------------

def _minimizer_points(V, count=8):
    return [PhasePoint(tuple(float(c) for c in q), (0.0,) * V.n) for q in V.minimizer_points(count)]


def check_transitive(V, G, tol=1e-8):
    """Raise :class:`HypothesisError` unless ``G`` acts transitively on the
    minimizers of ``h = p^2 + V`` (all of them lie on the orbit of the first)."""
    _, desc = V.minimum()
    if desc["kind"] == "circle" and G.kind != "SO2":
        raise HypothesisError(f"minimizers of {V.name} form a circle; {G.name} is not transitive on it")
    pts = _minimizer_points(V)
    q0 = np.array(pts[0].q)
    if G.kind == "SO2":
        orbit = [G.act_array(g, q0, np.zeros(V.n))[0] for g in G.elements()]
        ok = all(abs(np.linalg.norm(np.array(s.q)) - np.linalg.norm(q0)) < tol for s in pts)
    else:
        orbit = [G.act_array(g, q0, np.zeros(V.n))[0] for g in G.elements()]
        ok = all(min(np.linalg.norm(np.array(s.q) - o) for o in orbit) < tol for s in pts)
    if not ok:
        raise HypothesisError(f"{G.name} does not act transitively on the minimizers of {V.name}")
    return pts


def standard_bumps(n=1, count=10):
    """Fixed test set of Gaussian bumps with widths between 0.5 and 0.8."""
    centres = [(1.0, 0.0), (-1.0, 0.0), (0.8, 0.2), (-0.6, -0.3), (1.2, 0.1),
               (0.0, 0.0), (0.5, -0.4), (-1.1, 0.3), (0.9, -0.2), (-0.9, 0.0)]
    widths = np.linspace(0.5, 0.8, 10)
    out = []
    for (q, p), w in list(zip(centres, widths))[:count]:
        if n == 1:
            pt = PhasePoint((q,), (p,))
        else:
            pt = PhasePoint((q, 0.3 * p), (p, 0.0))
        out.append(gaussian_bump(pt, float(w)))
    return out


def classical_limit_sweep(V, G=None, observables=None, hbars=DEFAULT_HBARS, mode="schrodinger",
                          t=1.0, grid=None, workers=1):
    """Expectations of observables in the quantum ground state against the
    Haar-averaged classical value at a minimizer.

    Parameters
    ----------
    mode : {'schrodinger', 'berezin-gibbs', 'comparison'}
        Ground vector of ``H``, top vector of ``Q(exp(-t h))``, or both, in
        which case the rows hold their expectation differences.
    """
    if mode not in ("schrodinger", "berezin-gibbs", "comparison"):
        raise ValueError(f"unknown mode {mode!r}")
    grid = grid or default_grid(V.n)
    G = G or group_for_potential(V)
    observables = observables or standard_bumps(V.n)
    pts = check_transitive(V, G)
    targets = [haar_average(G, f, pts[0]) for f in observables]
    spread = max(abs(haar_average(G, f, s) - tv) for f, tv in zip(observables, targets) for s in pts)
    hs = _descending(hbars)
    k = len(observables)

    def measure(psi, h):
        return [husimi_expectation(psi, f, expectation_grid(psi, f, h)) for f in observables]

    def job(h):
        if mode in ("schrodinger", "comparison"):
            _, gs = cached_ground_state(V, h, grid)
            ms = measure(gs.psi, h)
            gap = gs.gap if gs.gap_resolved or gs.barrier_splitting is None else gs.barrier_splitting
        if mode in ("berezin-gibbs", "comparison"):
            phi, _, bgap = berezin_gibbs_ground(V, t, h, grid)
            mb = measure(phi, h)
        if mode == "comparison":
            d = [abs(a - b) for a, b in zip(ms, mb)]
            return [h, max(d), gap, bgap] + [v for trip in zip(ms, mb, d) for v in trip]
        meas, gap = (ms, gap) if mode == "schrodinger" else (mb, bgap)
        d = [abs(a - b) for a, b in zip(meas, targets)]
        return [h, max(d), gap] + [v for trip in zip(meas, targets, d) for v in trip]

    rows = _run(job, hs, workers)
    desc = {"hbar": "Planck constant"}
    if mode == "comparison":
        cols = ["hbar", "max_defect", "gap_schrodinger", "gap_berezin"]
        for i in range(k):
            cols += [f"schrodinger_{i}", f"berezin_{i}", f"defect_{i}"]
        desc["max_defect"] = "max over observables of the difference between the two ground vectors"
    else:
        cols = ["hbar", "max_defect", "gap"]
        for i in range(k):
            cols += [f"measured_{i}", f"target_{i}", f"defect_{i}"]
        desc["max_defect"] = "max over observables of |measured - Haar target|"
        desc["gap"] = "spectral gap of the ground vector (barrier estimate where unresolved)"
    meta = {"grid": grid_dict(grid), "potential": V.to_dict(), "group": G.name, "mode": mode,
            "t": t, "symbols": [f.name for f in observables], "sigma0": [list(pts[0].q), list(pts[0].p)],
            "sigma0_spread": float(spread)}
    return SweepResult("classical-limit", hs, cols, rows, meta, desc)


# -- eigenvalue and semigroup convergence ----------------------------------------

def berezin_top_eigenvalue(V, t, hbar, grid, tol=1e-10, max_iter=20000):
    """Largest eigenvalue of ``Q(exp(-t h))`` by power iteration.

    The operator is positive and its top eigenvector is positive, hence
    invariant under the potential's symmetry, so the iteration runs in that
    sector starting from a positive Gaussian.
    """
    Q = berezin_product(gibbs_symbol(V, t), hbar, grid)
    P = sector_projector(grid, V.symmetry)
    x0 = np.exp(-0.5 * np.sum(grid.points() ** 2, axis=-1)).ravel()
    lam, x, res, it, ok = linalg.power_iteration(Q.flat(), x0, tol=tol, max_iter=max_iter, project=P)
    if not ok:
        raise ConvergenceError(f"power iteration stalled at residual {res:.3g} (hbar={hbar:g})")
    return lam, Q, it


def eigenvalue_convergence_sweep(V, t=1.0, hbars=DEFAULT_HBARS, grid=None, workers=1,
                                 norms=True):
    """Top Berezin-Gibbs eigenvalue and ``exp(-t E0)`` against ``exp(-t min V)``.

    ``lambda0`` comes from power iteration; ``lambda0_lanczos`` is an
    independent Lanczos solve of the same operator, and ``norm_Q`` the
    operator norm from power iteration on ``Q* Q`` without any symmetry
    restriction.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    grid = grid or default_grid(V.n)
    target = float(np.exp(-t * V.min_value))
    hs = _descending(hbars)

    def job(h):
        lam, Q, _ = berezin_top_eigenvalue(V, t, h, grid)
        P = sector_projector(grid, V.symmetry)
        v0 = np.random.default_rng(1).standard_normal(int(np.prod(grid.shape)))
        ev, *_ = linalg.lanczos_lowest(lambda v: -Q.flat()(v), v0, 1, tol=1e-9, project=P)
        nq = operator_norm(Q, tol=1e-13, max_iter=5000)[0] if norms else float("nan")
        _, gs = cached_ground_state(V, h, grid)
        eE = float(np.exp(-t * gs.energy))
        return [h, lam, float(-ev[0]), nq, eE, target, abs(lam - target), abs(eE - target)]

    rows = _run(job, hs, workers)
    cols = ["hbar", "lambda0", "lambda0_lanczos", "norm_Q", "exp_tE0", "target",
            "lambda_defect", "energy_defect"]
    desc = {"hbar": "Planck constant",
            "lambda0": "largest eigenvalue of the Berezin-Gibbs operator (power iteration)",
            "lambda0_lanczos": "same eigenvalue from Lanczos",
            "norm_Q": "operator norm of the Berezin-Gibbs operator",
            "exp_tE0": "exp(-t E0) with E0 the Schrodinger ground energy",
            "target": "exp(-t min V)",
            "lambda_defect": "|lambda0 - target|", "energy_defect": "|exp(-t E0) - target|"}
    return SweepResult("eig-convergence", hs, cols, rows,
                       {"grid": grid_dict(grid), "potential": V.to_dict(), "t": t}, desc)


def gaussian_probes(grid, count=5, width=0.35, spread=1.0):
    """Real Gaussians (no hbar dependence) centred along ``[-spread, spread]``."""
    X = grid.points()
    out = []
    for c in np.linspace(-spread, spread, count):
        centre = np.zeros(grid.n)
        centre[0] = c
        if grid.n == 2:
            centre[1] = 0.5 * c * c - 0.25
        v = np.exp(-np.sum((X - centre) ** 2, axis=-1) / (2 * width ** 2))
        out.append(normalize(WaveFunction(grid, v)))
    return out


def semigroup_comparison(V, t, hbar, probes, grid=None, tol=1e-12):
    """Per-probe defects ``||(Q(e^{-th}) - e^{-tH}) psi||``,
    ``||Q(e^{-th}) psi - e^{-tV} psi||`` and ``||e^{-tH} psi - e^{-tV} psi||``.

    Returns an array of shape ``(len(probes), 3)`` plus the largest spectral
    truncation bound of the semigroup.
    """
    grid = grid or probes[0].grid
    H = build_hamiltonian(V, hbar, grid)
    Q = berezin_product(gibbs_symbol(V, t), hbar, grid)
    eV = np.exp(-t * V(grid.points()))
    out = np.empty((len(probes), 3))
    worst = 0.0
    for i, psi in enumerate(probes):
        s, bound = semigroup_apply(H, t, psi, tol=tol)
        worst = max(worst, bound)
        a = Q.apply(psi.values)
        b = s.values
        c = eV * psi.values
        nrm = lambda v: float(np.sqrt(np.sum(np.abs(v) ** 2) * grid.cell))
        out[i] = nrm(a - b), nrm(a - c), nrm(b - c)
    return out, worst


def semigroup_sweep(V, t=1.0, hbars=DEFAULT_HBARS, grid=None, probes=None, workers=1):
    grid = grid or default_grid(V.n)
    probes = probes or gaussian_probes(grid)
    hs = _descending(hbars)
    P = len(probes)

    def job(h):
        d, bound = semigroup_comparison(V, t, h, probes, grid)
        return [h] + list(d.max(axis=0)) + [bound] + list(d.ravel())

    rows = _run(job, hs, workers)
    cols = ["hbar", "berezin_vs_heat_defect", "berezin_vs_potential_defect",
            "heat_vs_potential_defect", "truncation_bound"]
    for i in range(P):
        cols += [f"berezin_vs_heat_defect_{i}", f"berezin_vs_potential_defect_{i}",
                 f"heat_vs_potential_defect_{i}"]
    desc = {"hbar": "Planck constant",
            "berezin_vs_heat_defect": "max over probes of ||(Q(exp(-th)) - exp(-tH)) psi||",
            "berezin_vs_potential_defect": "max over probes of ||Q(exp(-th)) psi - exp(-tV) psi||",
            "heat_vs_potential_defect": "max over probes of ||exp(-tH) psi - exp(-tV) psi||",
            "truncation_bound": "largest spectral truncation bound of exp(-tH) psi"}
    return SweepResult("semigroup", hs, cols, rows,
                       {"grid": grid_dict(grid), "potential": V.to_dict(), "t": t, "probes": P}, desc)


def free_semigroup_defect(t, hbar, grid, probes):
    """``max ||(Q(exp(-t p^2)) - exp(t hbar^2 Laplacian)) psi||`` over probes
    (zero potential)."""
    Q = berezin_separable(None, lambda p: np.exp(-t * np.sum(p * p, axis=-1)), hbar, grid)
    k2 = np.zeros(grid.shape)
    for ax in range(grid.n):
        shape = [1] * grid.n
        shape[ax] = grid.N
        k2 = k2 + (grid.wavenumbers ** 2).reshape(shape)
    heat = FourierMultiplier(grid, np.exp(-t * hbar ** 2 * k2))
    return probe_norm(Q - heat, probes)


# -- axioms -----------------------------------------------------------------------

def quantize(f, hbar, grid):
    """Berezin operator: the separable fast path for product symbols whose
    kernel fits in the box, the phase lattice otherwise."""
    if f.factors is not None:
        try:
            return berezin_product(f, hbar, grid)
        except GridError:
            pass  # kernel wider than the box: fall back to the lattice
    pg = PhaseGrid(grid, hbar) if grid.n == 1 else fitted_phase_grid(grid, hbar, symbol=f)
    return berezin_dense(f, hbar, grid, pg, check_coverage=False)


def sup_norm(f, hbar, grid):
    """``sup |f|``: the best phase-lattice node, refined by Nelder-Mead."""
    pg = PhaseGrid(grid, hbar)
    best, start = -1.0, None
    for sl in pg.chunks():
        v = np.abs(pg.symbol_values(f, sl))
        a, b = np.unravel_index(np.argmax(v), v.shape)
        if v[a, b] > best:
            best, start = float(v[a, b]), np.concatenate([pg.q_nodes[sl][a], pg.p_nodes[b]])
    n = f.n
    res = minimize(lambda s: -abs(f(s[:n], s[n:])), start, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000})
    return max(best, float(-res.fun))


def standard_pair(n=1):
    """Two overlapping Gaussian bumps used by the axiom suite."""
    if n == 1:
        return (gaussian_bump(PhasePoint((0.4,), (0.0,)), 0.5),
                gaussian_bump(PhasePoint((0.0,), (0.4,)), 0.5))
    return (gaussian_bump(PhasePoint((0.4, 0.0), (0.0, 0.0)), 0.5),
            gaussian_bump(PhasePoint((0.0, 0.0), (0.4, 0.0)), 0.5))


def axiom_defects(f, g, hbar, grid, tol=1e-7, max_iter=2000, seed=0):
    """Rieffel, von Neumann, Dirac-Groenewold-Rieffel and Berezin-Weyl defects
    at one ``hbar``, each an operator norm from power iteration."""
    if f.factors is None:
        raise SymbolError("the Berezin-Weyl defect needs a product symbol f")
    Qf, Qg = quantize(f, hbar, grid), quantize(g, hbar, grid)
    Qfg = quantize(f * g, hbar, grid)
    Qbr = quantize(bracket_symbol(f, g), hbar, grid)
    norm = lambda op: operator_norm(op, tol=tol, max_iter=max_iter, seed=seed)[0]
    rieffel = abs(norm(Qf) - sup_norm(f, hbar, grid))
    vn = norm(Qf @ Qg - Qfg)
    comm = Qf @ Qg - Qg @ Qf
    dgr = norm((1j / hbar) * comm - Qbr)
    bw = norm(Qf - weyl_of_symbol(f, hbar, grid))
    return rieffel, vn, dgr, bw


def axiom_suite(f=None, g=None, hbars=DEFAULT_HBARS, grid=None, workers=1, seed=0):
    if f is None or g is None:
        f, g = standard_pair()
    grid = grid or default_grid(f.n)
    hs = _descending(hbars)
    rows = _run(lambda h: [h, *axiom_defects(f, g, h, grid, seed=seed)], hs, workers)
    cols = ["hbar", "rieffel_defect", "von_neumann_defect", "dgr_defect", "berezin_weyl_defect"]
    desc = {"hbar": "Planck constant",
            "rieffel_defect": "| ||Q(f)|| - sup|f| |",
            "von_neumann_defect": "||Q(f)Q(g) - Q(fg)||",
            "dgr_defect": "||(i/hbar)[Q(f),Q(g)] - Q({f,g})||",
            "berezin_weyl_defect": "||Q_Berezin(f) - Q_Weyl(f)||"}
    return SweepResult("axioms", hs, cols, rows,
                       {"grid": grid_dict(grid), "symbols": [f.name, g.name], "seed": seed}, desc)


def gaussian_test_symbol(n=1):
    """``exp(-(|q|^2 + |p|^2))``, whose phase-space integral is ``pi^n``."""
    return gaussian_bump(PhasePoint((0.0,) * n, (0.0,) * n), np.sqrt(0.5))


def berezin_checks(hbar, grid=None, probes=None):
    """Structural checks of the Berezin map at one ``hbar`` (n = 1).

    Returns a dict with the ``Q(1) - I`` probe defect, the smallest Ritz value
    of ``Q(f)`` for the Gaussian test symbol, the excess of ``||Q(f)||`` over
    ``sup f``, and the relative trace error against ``int f / (2 pi hbar)``.
    """
    grid = grid or default_grid(1)
    pg = PhaseGrid(grid, hbar)
    probes = probes or probe_states(grid, hbar, 5)
    one = berezin_dense(constant(1.0, grid.n), hbar, grid, pg)
    ident = Multiplication(grid, np.ones(grid.shape))
    f = gaussian_test_symbol(grid.n)
    Qf = berezin_dense(f, hbar, grid, pg)
    v0 = np.random.default_rng(3).standard_normal(grid.N)
    ritz = linalg.krylov_ritz_values(Qf.flat(), v0, 30)
    nrm = operator_norm(Qf, tol=1e-10, max_iter=3000)[0]
    trace = float(np.real(np.trace(Qf.to_dense())))
    exact = np.pi ** grid.n / (2 * np.pi * hbar) ** grid.n
    return {"hbar": hbar, "identity_defect": probe_norm(one - ident, probes),
            "ritz_floor": float(ritz.min()), "norm_excess": nrm - 1.0,
            "trace": trace, "trace_exact": exact, "trace_rel_error": abs(trace - exact) / exact}


def berezin_check_sweep(hbars=DEFAULT_HBARS, grid=None, workers=1):
    grid = grid or default_grid(1)
    hs = _descending(hbars)
    keys = ["identity_defect", "ritz_floor", "norm_excess", "trace_rel_error"]
    rows = _run(lambda h: [h] + [berezin_checks(h, grid)[k] for k in keys], hs, workers)
    return SweepResult("berezin-checks", hs, ["hbar"] + keys, rows, {"grid": grid_dict(grid)},
                       {"hbar": "Planck constant"})
