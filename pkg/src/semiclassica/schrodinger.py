"""Schrodinger operators ``-hbar^2 Laplacian + V`` on the periodic grid.

Eigenpairs come from thick-restart Lanczos; one-dimensional problems can also
be diagonalized densely, which the heat semigroup uses when many modes are
needed.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import linalg
from .errors import ConvergenceError, GridError, PotentialError
from .grid import WaveFunction, fourier_multiplier, k_squared
from .operators import Operator

DEGENERACY_FLOOR = 1e-12
MAX_LANCZOS_K = 32


class Hamiltonian(Operator):
    hermitian = True

    def __init__(self, potential, hbar, grid):
        super().__init__(grid)
        self.potential = potential
        self.hbar = hbar
        self.V = potential(grid.points())
        self.kinetic = hbar ** 2 * k_squared(grid)
        self._dense = None

    def apply(self, values):
        return fourier_multiplier(self.grid, values, self.kinetic, even=True) + self.V * values

    def dense(self):
        """Dense real symmetric matrix (one dimension only)."""
        if self.grid.n != 1:
            raise GridError("dense Hamiltonian is only built for n = 1")
        if self._dense is None:
            N = self.grid.N
            K = np.real(np.fft.ifft(self.kinetic[:, None] * np.fft.fft(np.eye(N), axis=0), axis=0))
            H = K + np.diag(self.V)
            self._dense = 0.5 * (H + H.T)
        return self._dense


def build_hamiltonian(potential, hbar, grid):
    if hbar <= 0:
        raise GridError("hbar must be positive")
    if potential.n != grid.n:
        raise PotentialError(f"{potential.name} lives in {potential.n} dimensions, grid in {grid.n}")
    grid.check_resolution(hbar)
    return Hamiltonian(potential, hbar, grid)


@dataclass
class EigenResult:
    values: np.ndarray
    vectors: list
    residuals: np.ndarray
    gram_defect: float
    matvecs: int = 0
    method: str = "lanczos"

    def dump_csv(self, path):
        with open(path, "w") as fh:
            fh.write("j,E_j,residual\n")
            for j, (e, r) in enumerate(zip(self.values, self.residuals)):
                fh.write(f"{j},{e:.17g},{r:.17g}\n")


def sector_projector(grid, tag):
    """Orthogonal projector onto states invariant under the symmetry ``tag``.

    ``"Z2"`` averages with ``x -> -x`` and ``"Z2-odd"`` projects onto the odd
    states; ``"SO2"`` averages over quarter turns,
    which is the largest rotation subgroup acting exactly on the grid.
    """
    shape = grid.shape
    if tag in ("Z2", "Z2-odd"):
        rev = (-np.arange(grid.N)) % grid.N
        sign = 1.0 if tag == "Z2" else -1.0

        def P(v):
            a = v.reshape(shape)
            b = a[np.ix_(*([rev] * grid.n))] if grid.n == 2 else a[rev]
            return (0.5 * (a + sign * b)).ravel()
        return P
    if tag == "SO2":
        from .symmetry import quarter_turn

        def P(v):
            a = v.reshape(shape)
            acc = a.copy()
            b = a
            for _ in range(3):
                b = quarter_turn(b)
                acc = acc + b
            return (acc / 4).ravel()
        return P
    return None


def _start_vector(grid, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(int(np.prod(grid.shape)))


def lowest_eigenpairs(H, k, tol=1e-8, method="lanczos", project=None):
    """Lowest ``k`` eigenpairs of ``H``.

    Residuals satisfy ``||H psi - E psi|| <= tol * max(1, |E|)`` (grid norm)
    and the returned states are orthonormal.
    """
    if k < 1:
        raise ValueError("k must be positive")
    grid = H.grid
    if method == "dense":
        vals, vecs = np.linalg.eigh(H.dense())
        vals, X = vals[:k], vecs[:, :k].T
        matvecs = 0
        resid = np.array([np.linalg.norm(H.apply(x) - e * x) for x, e in zip(X, vals)])
    else:
        if k > MAX_LANCZOS_K:
            raise ValueError(f"at most {MAX_LANCZOS_K} Lanczos pairs; use method='dense'")
        vals, X, resid, matvecs = linalg.lanczos_lowest(
            H.flat(), _start_vector(grid), k, tol=tol, project=project)
    # grid normalisation: sum |psi|^2 dx^n = 1 (residual norms scale the same way)
    scale = 1.0 / np.sqrt(grid.cell)
    states = []
    for x in X:
        x = x.reshape(grid.shape)
        s = np.sum(x)
        if abs(s) > 1e-12 * np.abs(x).max() * x.size:
            x = x * (np.conj(s) / abs(s))
        states.append(WaveFunction(grid, np.real_if_close(x * scale), H.hbar))
    G = X.conj() @ X.T
    gram = float(np.abs(G - np.eye(len(X))).max())
    bad = resid > tol * np.maximum(1.0, np.abs(vals)) * (1 + 1e-6)
    if method == "lanczos" and bad.any():
        raise ConvergenceError(f"residuals {resid[bad]} above tolerance")
    return EigenResult(np.asarray(vals), states, resid, gram, matvecs, method)


def lowest_levels(H, k, tol=1e-8):
    """Lowest ``k`` levels, solving the even and odd sectors separately for a
    reflection symmetric potential so tunnelling doublets are not skipped."""
    if H.potential.symmetry != "Z2":
        return lowest_eigenpairs(H, k, tol=tol)
    P = sector_projector(H.grid, "Z2")
    even = lowest_eigenpairs(H, min(k, MAX_LANCZOS_K), tol=tol, project=P)
    odd = lowest_eigenpairs(H, min(k, MAX_LANCZOS_K), tol=tol,
                            project=sector_projector(H.grid, "Z2-odd"))
    items = sorted(
        list(zip(even.values, even.residuals, even.vectors))
        + list(zip(odd.values, odd.residuals, odd.vectors)), key=lambda it: it[0])[:k]
    vals, resid, states = (list(c) for c in zip(*items))
    return EigenResult(np.array(vals), states, np.array(resid),
                       max(even.gram_defect, odd.gram_defect), even.matvecs + odd.matvecs, "lanczos")


@dataclass
class GroundState:
    psi: WaveFunction
    energy: float
    next_energy: float
    gap: float
    residual: float
    sector: str = "full"
    gap_resolved: bool = True
    barrier_splitting: float = None
    meta: dict = field(default_factory=dict)


def ground_state(H, tol=1e-8):
    """Ground state with the phase fixed by ``sum psi > 0``.

    A single Krylov sequence cannot separate a nearly degenerate pair, so for a
    reflection symmetric potential the even and odd sectors are solved
    separately and the two lowest levels are merged. When the two lowest levels
    are closer than ``1e-12 |E0 + 1|`` the returned state is the lowest state of
    the invariant sector. Rotation symmetric potentials fall back to the
    quarter-turn invariant sector in the same situation.
    """
    tag = H.potential.symmetry
    if tag == "Z2":
        P = sector_projector(H.grid, "Z2")
        even = lowest_eigenpairs(H, 2, tol=tol, project=P)
        odd = lowest_eigenpairs(H, 1, tol=tol, project=sector_projector(H.grid, "Z2-odd"))
        levels = sorted(
            [(e, r, s, "even") for e, r, s in zip(even.values, even.residuals, even.vectors)]
            + [(odd.values[0], odd.residuals[0], odd.vectors[0], "odd")],
            key=lambda item: item[0])
        (E0, resid, psi, parity), (E1, *_rest) = levels[0], levels[1]
        gap = E1 - E0
        resolved = gap > DEGENERACY_FLOOR * abs(E0 + 1)
        sector = "full"
        if not resolved:
            E0, resid, psi = even.values[0], even.residuals[0], even.vectors[0]
            gap = odd.values[0] - E0
            sector = "Z2"
    else:
        res = lowest_eigenpairs(H, 2, tol=tol)
        E0, E1 = res.values
        gap = E1 - E0
        psi, resid, sector = res.vectors[0], res.residuals[0], "full"
        resolved = gap > DEGENERACY_FLOOR * abs(E0 + 1)
        if not resolved and tag == "SO2":
            sres = lowest_eigenpairs(H, 1, tol=tol, project=sector_projector(H.grid, "SO2"))
            psi, resid, sector = sres.vectors[0], sres.residuals[0], "SO2"
            E0 = sres.values[0]
            gap = E1 - E0
    gs = GroundState(psi, float(E0), float(E1), float(gap), float(resid), sector, bool(resolved))
    if H.grid.n == 1 and tag == "Z2":
        gs.barrier_splitting = barrier_splitting(H, gs)
    return gs


def barrier_splitting(H, gs):
    """Tunnelling splitting of a symmetric double well from the barrier region.

    Uses ``E1 - E0 = 4 hbar^2 phi(0) phi'(0)`` for the one-well state ``phi``,
    with ``phi'/phi`` obtained by integrating the Riccati equation across the
    barrier (the stable direction) and ``phi`` anchored to the grid ground state
    at the well. Returns ``None`` when the origin is not classically forbidden.
    """
    V, hbar, E = H.potential, H.hbar, gs.energy
    Vf = lambda s: float(V(np.array([s])))
    if Vf(0.0) <= E:
        return None
    mins = [float(m[0]) for m in V.minimizer_points() if m[0] > 0]
    if not mins:
        return None
    xm = min(mins)
    # inner turning point between 0 and the well
    lo, hi = 0.0, xm
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if Vf(mid) > E else (lo, mid)
    xt = lo

    def rhs(s, u):
        return [(Vf(s) - E) / hbar ** 2 - u[0] ** 2, u[0]]

    y_start = np.sqrt(max(Vf(-xt) - E, 0.0)) / hbar
    left = solve_ivp(rhs, [-xt, 0.0], [y_start, 0.0], method="LSODA", rtol=1e-12, atol=1e-14)
    y0 = left.y[0, -1]
    x = H.grid.x
    ic = int(np.argmin(np.abs(x - xm)))
    right = solve_ivp(rhs, [0.0, x[ic]], [y0, 0.0], method="LSODA", rtol=1e-12, atol=1e-14)
    phi_c = np.sqrt(2.0) * abs(np.real(gs.psi.values[ic]))
    phi0 = phi_c * np.exp(-right.y[1, -1])
    return float(4.0 * hbar ** 2 * phi0 ** 2 * y0)


def semigroup_apply(H, t, psi, k=None, tol=1e-8, k_max=None):
    """``exp(-t H) psi`` by spectral truncation.

    Returns ``(state, bound)`` where ``bound = exp(-t E_k) ||(1 - P_k) psi||``
    bounds the truncation error. Without an explicit ``k`` the number of modes
    doubles until the bound is below ``tol``.
    """
    if t < 0:
        raise ValueError("semigroup time must be non-negative")
    grid = H.grid
    size = int(np.prod(grid.shape))
    k_max = k_max or (size if grid.n == 1 else MAX_LANCZOS_K - 1)
    kk = k or 8
    v = psi.values.ravel()
    norm2 = np.vdot(v, v).real * grid.cell
    while True:
        method = "lanczos" if kk + 1 <= MAX_LANCZOS_K else "dense"
        res = _cached_pairs(H, kk + 1, method)
        Es, vecs = res.values[:kk + 1], res.vectors[:kk + 1]
        coef = np.array([np.vdot(w.values.ravel(), v) * grid.cell for w in vecs[:kk]])
        rest = np.sqrt(max(norm2 - np.sum(np.abs(coef) ** 2), 0.0))
        bound = float(np.exp(-t * Es[kk]) * rest) if kk < size else 0.0
        if k is not None or bound <= tol or kk >= k_max:
            break
        kk = min(2 * kk, k_max)
    if k is None and bound > tol:
        raise ConvergenceError(f"semigroup truncation bound {bound:.3g} above {tol:g}")
    out = np.zeros(grid.shape, dtype=complex)
    for c, e, w in zip(coef, Es[:kk], vecs[:kk]):
        out += c * np.exp(-t * e) * w.values
    return WaveFunction(grid, np.real_if_close(out), H.hbar), bound


def _cached_pairs(H, k, method):
    cache = H.__dict__.setdefault("_pairs", {})
    for (m, kk), res in cache.items():
        if kk >= k and (m == method or m == "dense"):
            return res
    if method == "dense":
        k = int(np.prod(H.grid.shape))
    if method == "lanczos":
        res = lowest_levels(H, min(k, MAX_LANCZOS_K))
    else:
        res = lowest_eigenpairs(H, k, method=method)
    cache[(method, k)] = res
    return res
