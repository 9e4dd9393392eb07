"""Coherent states, Husimi transforms and Berezin quantization.

The phase-space quadrature is a product lattice: position nodes are every
``stride``-th grid point, momentum nodes are the ``K``-point DFT lattice
``p_b = 2 pi hbar b / (K dx)``. For one node ``q_a`` the Husimi transform over
all momenta is then a single length-``K`` FFT of the Gaussian-windowed state,
and the Berezin operator ``A* D A`` never needs the coherent states themselves.

Because the momentum lattice spans the whole grid band, the momentum sum in
``A* A`` is exact and only the position sum is a quadrature (a trapezoid rule
on a Gaussian, accurate to roughly ``exp(-2 pi^2 hbar / (2 dq^2))``).
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CoverageError, GridError, SymbolError
from .grid import WaveFunction
from .operators import Multiplication, FourierMultiplier, Operator
from .operators import operator_norm as _operator_norm

WINDOW_RADIUS = 8.0
SPACING_FACTOR = 0.5
CHUNK_ENTRIES = 1 << 22


def _pow2_at_least(x):
    k = 1
    while k < x:
        k *= 2
    return k


class AxisTransform:
    """Husimi analysis along one grid axis.

    Position nodes are every ``stride``-th grid point (optionally only those
    with ``|q| <= q_extent``); momenta are the ``K``-point DFT lattice,
    optionally cut to the band ``|p| <= p_extent``.
    """

    def __init__(self, grid, hbar, q_extent=None, p_extent=None, spacing=SPACING_FACTOR):
        dx, N = grid.dx, grid.N
        rh = np.sqrt(hbar)
        s = 1
        while 2 * s * dx <= spacing * rh * (1 + 1e-12) and N % (2 * s) == 0:
            s *= 2
        if s * dx > spacing * rh * (1 + 1e-12):
            raise GridError("grid too coarse for the phase-space lattice")
        self.hbar = hbar
        self.N = N
        self.dx = dx
        self.stride = s
        self.J = int(np.ceil(WINDOW_RADIUS * rh / dx))
        if 2 * self.J + 1 > N:
            raise GridError(f"coherent-state window exceeds the box at hbar={hbar:g}")
        self.K = _pow2_at_least(max(2 * self.J + 1, 2 * np.pi * rh / (spacing * dx)))
        offs = np.arange(-self.J, self.J + 1)
        self.taper = np.exp(-(offs * dx) ** 2 / (2 * hbar))
        idx = np.arange(0, N, s)
        if q_extent is not None:
            idx = idx[np.abs(grid.x[idx]) <= q_extent + 1e-12]
        self.centers = np.ascontiguousarray(idx, dtype=np.int64)
        self.q = grid.x[idx]
        p_all = 2 * np.pi * hbar * np.fft.fftfreq(self.K, dx)
        self.band = np.arange(self.K) if p_extent is None else np.flatnonzero(np.abs(p_all) <= p_extent + 1e-12)
        self.full_band = self.band.size == self.K
        self.p = p_all[self.band]
        self.dq = s * dx
        self.dp = 2 * np.pi * hbar / (self.K * dx)
        self.weight = s / self.K
        self.full = q_extent is None and self.full_band

    def _phase(self, sel):
        return np.exp(-0.5j / self.hbar * np.multiply.outer(self.q[sel], self.p))

    def analyse(self, rows, sel=slice(None)):
        """``(R, N)`` rows to ``(R, m, Kp)`` Husimi coefficients."""
        seg = kernels.window_gather(rows, self.centers[sel], self.taper, self.K)
        F = np.fft.fft(seg, axis=-1)
        if not self.full_band:
            F = F[..., self.band]
        return ((np.pi * self.hbar) ** -0.25 * self.dx) * self._phase(sel) * F

    def synthesise(self, coeffs, sel=slice(None)):
        """Adjoint of :meth:`analyse` for the grid inner product."""
        C = np.conj(self._phase(sel)) * coeffs
        if not self.full_band:
            G = np.zeros(C.shape[:-1] + (self.K,), dtype=complex)
            G[..., self.band] = C
            C = G
        seg = np.ascontiguousarray(np.fft.ifft(C, axis=-1) * self.K)
        return (np.pi * self.hbar) ** -0.25 * kernels.window_scatter(seg, self.centers[sel], self.taper, self.N)


class PhaseGrid:
    """Product quadrature lattice on phase space.

    Parameters
    ----------
    grid : GridSpec
    hbar : float
    q_extent, p_extent : float, optional
        Restrict nodes to ``|q_i| <= q_extent`` and ``|p_i| <= p_extent``.
        By default the lattice covers the periodic box and the whole momentum
        band of the grid, and ``A* A`` is the identity to quadrature accuracy.
    spacing : float
        Upper bound for the node spacing in units of ``sqrt(hbar)``.

    Notes
    -----
    In two dimensions coherent states are products of one-dimensional ones, so
    the analysis map is applied one axis at a time. Node arrays are flattened
    with the first axis slowest.
    """

    def __init__(self, grid, hbar, q_extent=None, p_extent=None, spacing=SPACING_FACTOR):
        if hbar <= 0:
            raise GridError("hbar must be positive")
        self.grid = grid
        self.hbar = hbar
        self.q_extent = q_extent
        self.p_extent = p_extent
        self.axis = AxisTransform(grid, hbar, q_extent, p_extent, spacing)
        ax = self.axis
        n = grid.n
        self.stride, self.J, self.K, self.taper = ax.stride, ax.J, ax.K, ax.taper
        self.dq, self.dp = ax.dq, ax.dp
        self.q_axis, self.p_axis = ax.q, ax.p
        self.weight = ax.weight ** n
        self.n_q = ax.q.size ** n
        self.n_p = ax.p.size ** n
        self._q_nodes = self._product(ax.q)
        self._p_nodes = self._product(ax.p)

    def _product(self, v):
        if self.grid.n == 1:
            return v[:, None]
        a, b = np.meshgrid(v, v, indexing="ij")
        return np.stack([a.ravel(), b.ravel()], axis=-1)

    @property
    def full_box(self):
        return self.axis.full

    @property
    def size(self):
        return self.n_q * self.n_p

    @property
    def q_nodes(self):
        return self._q_nodes

    @property
    def p_nodes(self):
        return self._p_nodes

    def chunks(self, chunk=None):
        """Slices of the flattened position nodes; in 2-D each chunk is a run of
        whole rows of the first axis."""
        ax = self.axis
        mq, kp = ax.q.size, ax.p.size
        per_row = 1 if self.grid.n == 1 else mq
        cost = kp * (ax.K if self.grid.n == 1 else mq * ax.K)
        step = chunk or max(1, CHUNK_ENTRIES // cost)
        for a0 in range(0, mq if self.grid.n == 2 else self.n_q, step):
            a1 = min(a0 + step, mq if self.grid.n == 2 else self.n_q)
            yield slice(a0 * per_row, a1 * per_row)

    def _rows(self, sl):
        if self.grid.n == 1:
            return sl
        m = self.axis.q.size
        return slice(sl.start // m, sl.stop // m)

    def symbol_values(self, f, sl):
        """``f`` on the nodes of a chunk, shape ``(m, n_p)``."""
        q = self._q_nodes[sl]
        if f.factors is not None:
            fq, fp = f.factors
            return np.multiply.outer(np.asarray(fq(q)), np.asarray(fp(self._p_nodes)))
        return np.asarray(f(q[:, None, :], self._p_nodes[None, :, :]))

    def analysis(self, values, sl):
        """``<Psi_sigma, psi>`` for the position nodes in ``sl`` and all momenta."""
        ax = self.axis
        values = np.asarray(values, dtype=np.complex128)
        if self.grid.n == 1:
            return ax.analyse(values[None, :], sl)[0]
        rs = self._rows(sl)
        S1 = ax.analyse(np.ascontiguousarray(values.T), rs)  # (N2, m, Kp)
        m, kp, mq = S1.shape[1], S1.shape[2], ax.q.size
        T = np.ascontiguousarray(S1.transpose(1, 2, 0)).reshape(m * kp, -1)
        S2 = ax.analyse(T)  # (m Kp, mq, Kp)
        return S2.reshape(m, kp, mq, kp).transpose(0, 2, 1, 3).reshape(m * mq, kp * kp)

    def synthesis(self, coeffs, sl):
        """``sum_sigma c_sigma Psi_sigma`` for the position nodes in ``sl``."""
        ax = self.axis
        if self.grid.n == 1:
            return ax.synthesise(coeffs[None], sl)[0]
        rs = self._rows(sl)
        mq, kp = ax.q.size, ax.p.size
        m = rs.stop - rs.start
        C = coeffs.reshape(m, mq, kp, kp).transpose(0, 2, 1, 3).reshape(m * kp, mq, kp)
        R2 = ax.synthesise(C)  # (m Kp, N2)
        R1 = np.ascontiguousarray(R2.reshape(m, kp, -1).transpose(2, 0, 1))
        return ax.synthesise(R1, rs).T

    def mass(self, psi):
        """Quadrature of the Husimi density, ``sum w |<Psi_sigma, psi>|^2``."""
        tot = 0.0
        for sl in self.chunks():
            tot += np.sum(np.abs(self.analysis(psi.values, sl)) ** 2)
        return float(self.weight * tot)


def make_phase_grid(grid, hbar, q_extent=None, p_extent=None):
    return PhaseGrid(grid, hbar, q_extent, p_extent)


def coherent_state(point, hbar, grid, margin=WINDOW_RADIUS):
    """``Psi(x) = (pi hbar)^{-n/4} exp(-i p.q/(2 hbar)) exp(i p.x/hbar) exp(-|x-q|^2/(2 hbar))``."""
    if point.n != grid.n:
        raise GridError("phase point and grid dimensions differ")
    q = np.array(point.q)
    p = np.array(point.p)
    if np.any(np.abs(q) > grid.L - margin * np.sqrt(hbar)):
        raise GridError(f"coherent state at q={tuple(float(v) for v in q)} is within {margin}*sqrt(hbar) of the boundary")
    X = grid.points()
    phase = -0.5 * (p @ q) / hbar + (X @ p) / hbar
    vals = (np.pi * hbar) ** (-grid.n / 4) * np.exp(1j * phase - np.sum((X - q) ** 2, axis=-1) / (2 * hbar))
    return WaveFunction(grid, vals, hbar)


@dataclass
class HusimiField:
    """``<Psi_sigma, psi>`` on a :class:`PhaseGrid` (fft-ordered momenta)."""

    phase_grid: PhaseGrid
    values: np.ndarray

    @property
    def density(self):
        return np.abs(self.values) ** 2

    def mass(self):
        return float(self.phase_grid.weight * np.sum(self.density))

    def ordered(self):
        """``(q_nodes, p_nodes, values)`` with momenta sorted ascending."""
        pg = self.phase_grid
        order = np.lexsort(pg.p_nodes.T[::-1])
        return pg.q_nodes, pg.p_nodes[order], self.values[:, order]

    def dump_csv(self, path):
        q, p, v = self.ordered()
        n = q.shape[1]
        names = [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
        with open(path, "w") as fh:
            fh.write(",".join(names + ["re", "im", "density"]) + "\n")
            for a in range(q.shape[0]):
                for b in range(p.shape[0]):
                    z = v[a, b]
                    row = list(q[a]) + list(p[b]) + [z.real, z.imag, abs(z) ** 2]
                    fh.write(",".join(f"{c:.17g}" for c in row) + "\n")

    def heatmap(self):
        """2-D array for plotting: the ``(q, p)`` plane for n = 1, the ``q`` plane
        marginal (summed over momenta) for n = 2. Returns ``(x_axis, y_axis, Z)``."""
        q, p, v = self.ordered()
        pg = self.phase_grid
        d = np.abs(v) ** 2
        if pg.grid.n == 1:
            return q[:, 0], p[:, 0], d.T
        m = len(pg.q_axis)
        Z = pg.weight * d.sum(axis=1).reshape(m, m)
        return pg.q_axis, pg.q_axis, Z.T


def husimi(psi, hbar=None, phase_grid=None, max_entries=5e7):
    hbar = psi.hbar if hbar is None else hbar
    pg = phase_grid or PhaseGrid(psi.grid, hbar)
    if pg.size > max_entries:
        raise GridError(f"Husimi field with {pg.size} nodes is too large; use husimi_expectation")
    vals = np.empty((pg.n_q, pg.n_p), dtype=complex)
    for sl in pg.chunks():
        vals[sl] = pg.analysis(psi.values, sl)
    return HusimiField(pg, vals)


def husimi_expectation(psi, f, phase_grid):
    """``<psi, Q(f) psi> = sum_sigma w f(sigma) |<Psi_sigma, psi>|^2`` for unit ``psi``."""
    pg = phase_grid
    tot = 0.0
    for sl in pg.chunks():
        W = pg.analysis(psi.values, sl)
        tot = tot + np.sum(pg.symbol_values(f, sl) * np.abs(W) ** 2)
    return complex(pg.weight * tot) if not f.real else float(np.real(pg.weight * tot))


def _check_quantizable(f, pg=None):
    if f.decay == "unbounded":
        raise SymbolError(f"symbol {f.name} is unbounded; Berezin quantization needs decay")
    if pg is not None and f.n != pg.grid.n:
        raise SymbolError("symbol and grid dimensions differ")


class BerezinOperator(Operator):
    """``Q(f) = A* D A`` with ``D = w f`` on the phase lattice."""

    def __init__(self, f, phase_grid, cache_limit=3e7):
        super().__init__(phase_grid.grid)
        self.symbol = f
        self.pg = phase_grid
        self.hbar = phase_grid.hbar
        self.hermitian = f.real
        self._cache = None
        if phase_grid.size <= cache_limit:
            self._cache = {}

    def _diag(self, sl):
        if self._cache is not None and sl.start in self._cache:
            return self._cache[sl.start]
        d = self.pg.weight * self.pg.symbol_values(self.symbol, sl)
        if self._cache is not None:
            self._cache[sl.start] = d
        return d

    def apply(self, values):
        out = 0
        for sl in self.pg.chunks():
            W = self.pg.analysis(values, sl)
            out = out + self.pg.synthesis(self._diag(sl) * W, sl)
        if np.isrealobj(values) and self.hermitian and _even_in_p(self.symbol):
            return out.real
        return out

    def adjoint(self):
        if self.hermitian:
            return self
        return BerezinOperator(self.symbol.conj(), self.pg)

    def to_dense(self):
        """Dense matrix for n = 1, assembled block by block from the windows."""
        pg = self.pg
        if pg.grid.n != 1:
            return super().to_dense()
        N, K, J = pg.grid.N, pg.K, pg.J
        ax = pg.axis
        off = np.arange(-J, J + 1)
        d = (off[:, None] - off[None, :]) % K
        tt = np.outer(pg.taper, pg.taper) * pg.grid.dx / np.sqrt(np.pi * self.hbar)
        Q = np.zeros((N, N), dtype=complex)
        for sl in pg.chunks():
            D = np.zeros((sl.stop - sl.start, K), dtype=complex)
            D[:, ax.band] = self._diag(sl)
            F = np.fft.ifft(D, axis=1) * K
            for a, c in enumerate(ax.centers[sl]):
                idx = (c + off) % N
                Q[np.ix_(idx, idx)] += tt * F[a][d]
        return Q


def _even_in_p(f):
    # real symbols even in p have real kernels; checked on a few sample points
    rng = np.random.default_rng(7)
    q = rng.normal(size=(6, f.n))
    p = rng.normal(size=(6, f.n))
    return np.allclose(f(q, p), f(q, -p), rtol=1e-13, atol=0)


def coverage_deficit(pg, f, probes=5):
    """Husimi mass deficit of coherent probes placed where ``|f|`` is largest."""
    if pg.full_box:
        return 0.0
    best = []
    for sl in pg.chunks():
        vals = np.abs(pg.symbol_values(f, sl))
        a, b = np.unravel_index(np.argsort(vals, axis=None)[-probes:], vals.shape)
        best += [(vals[i, j], pg.q_nodes[sl][i], pg.p_nodes[j]) for i, j in zip(a, b)]
    best.sort(key=lambda t: -t[0])
    worst = 0.0
    from .phase_space import PhasePoint
    for _, q, p in best[:probes]:
        try:
            psi = coherent_state(PhasePoint(tuple(q), tuple(p)), pg.hbar, pg.grid)
        except GridError:
            return 1.0
        worst = max(worst, abs(1.0 - pg.mass(psi)))
    return worst


def berezin_dense(f, hbar, grid=None, phase_grid=None, check_coverage=True):
    """Berezin quantization of ``f`` on the product phase lattice."""
    pg = phase_grid or PhaseGrid(grid, hbar)
    _check_quantizable(f, pg)
    if check_coverage:
        deficit = coverage_deficit(pg, f)
        if deficit > 1e-2:
            raise CoverageError(f"phase lattice misses {deficit:.3g} of a probe's Husimi mass")
    return BerezinOperator(f, pg)


def berezin_separable(f1, f2, hbar, grid):
    """Fast path for a product symbol ``f1(q) f2(p)``; either factor may be None.

    A position-only symbol becomes multiplication by its Gaussian mollification,
    a momentum-only symbol a Fourier multiplier, and a genuine product the Weyl
    operator of the mollified factors. Factors are callables on coordinate
    arrays of shape ``(..., n)``.
    """
    from . import weyl

    if f1 is None and f2 is None:
        raise SymbolError("berezin_separable needs at least one factor")
    grid.check_resolution(hbar)
    if f2 is None:
        return Multiplication(grid, weyl.mollify_on_grid(f1, hbar, grid))
    if f1 is None:
        return FourierMultiplier(grid, weyl.mollify_on_momenta(f2, hbar, grid))
    return weyl.weyl_separable(weyl.Mollified(f1, hbar, grid.n),
                               weyl.Mollified(f2, hbar, grid.n), hbar, grid)


def berezin_product(f, hbar, grid):
    """:func:`berezin_separable` for a :class:`Symbol` carrying factors."""
    _check_quantizable(f)
    if f.factors is None:
        raise SymbolError(f"{f.name} has no separable factorization")
    return berezin_separable(f.factors[0], f.factors[1], hbar, grid)


def operator_norm(op, tol=1e-8, max_iter=500):
    """``(norm, converged)`` by power iteration on ``op* op``."""
    return _operator_norm(op, tol, max_iter)


def probe_states(grid, hbar, count=5, seed=0, q_range=1.5, p_range=1.0, terms=3):
    """Fixed-seed unit probes: random superpositions of coherent states.

    Centres are drawn from ``|q_i| <= q_range`` (shrunk to keep the coherent
    windows inside the box) and ``|p_i| <= p_range``.
    """
    from .grid import normalize
    from .phase_space import PhasePoint

    rng = np.random.default_rng(seed)
    qr = min(q_range, grid.L - WINDOW_RADIUS * np.sqrt(hbar))
    if qr < 0:
        raise GridError(f"box too small for coherent probes at hbar={hbar:g}")
    out = []
    for _ in range(count):
        acc = 0
        for _ in range(terms):
            q = rng.uniform(-qr, qr, grid.n)
            p = rng.uniform(-p_range, p_range, grid.n)
            c = rng.normal() + 1j * rng.normal()
            acc = acc + c * coherent_state(PhasePoint(tuple(q), tuple(p)), hbar, grid).values
        out.append(normalize(WaveFunction(grid, acc, hbar)))
    return out


def state_extent(states, hbar, tol=1e-10, pad=6.0):
    """``(q_extent, p_extent)`` enclosing where any state's position or
    momentum density exceeds ``tol`` times its peak, padded by ``pad sqrt(hbar)``."""
    from .grid import fourier_hbar

    qe = pe = 0.0
    for psi in states:
        g = psi.grid
        d = np.abs(psi.values) ** 2
        X = g.points()
        qe = max(qe, float(np.abs(X[d > tol * d.max()]).max()))
        phi = fourier_hbar(psi, hbar)
        dm = np.abs(phi.values) ** 2
        P = g.momentum_lattice(hbar)
        P = np.stack(np.meshgrid(*([P] * g.n), indexing="ij"), axis=-1)
        pe = max(pe, float(np.abs(P[dm > tol * dm.max()]).max()))
    pad = pad * np.sqrt(hbar)
    return qe + pad, pe + pad


def symbol_extent(f, grid, hbar, tol=1e-10):
    """``(q_extent, p_extent)`` outside which ``|f| < tol sup|f|``.

    Nodes outside carry weights below ``tol`` in ``Q(f)``, so a lattice cut
    to these extents changes ``Q(f)`` by at most ``tol sup|f|`` in norm.
    Product symbols are scanned factor by factor; others on the full lattice.
    """
    pg = PhaseGrid(grid, hbar)
    ax = pg.axis
    if f.factors is not None:
        fq, fp = f.factors
        vq = np.abs(np.asarray(fq(pg.q_nodes)))
        vp = np.abs(np.asarray(fp(pg.p_nodes)))
        qe = np.abs(pg.q_nodes[vq > tol * vq.max()]).max()
        pe = np.abs(pg.p_nodes[vp > tol * vp.max()]).max()
        return float(qe + ax.dq), float(pe + ax.dp)
    qe = pe = 0.0
    peak = 0.0
    vals = []
    for sl in pg.chunks():
        v = np.abs(pg.symbol_values(f, sl))
        peak = max(peak, v.max())
        vals.append((sl, v))
    for sl, v in vals:
        a, b = np.nonzero(v > tol * peak)
        if a.size:
            qe = max(qe, np.abs(pg.q_nodes[sl][a]).max())
            pe = max(pe, np.abs(pg.p_nodes[b]).max())
    return float(qe + ax.dq), float(pe + ax.dp)


def fitted_phase_grid(grid, hbar, symbol=None, states=None, tol=1e-10):
    """Phase lattice cut to the support of ``symbol`` and/or ``states``.

    With a symbol, ``Q(f)`` is reproduced to ``tol sup|f|`` for every input.
    With states, Husimi quantities of those states are reproduced to ``tol``.
    With both, the intersection is used, which is enough for expectations
    ``<psi, Q(f) psi>`` of the given states.
    """
    qe, pe = [], []
    if symbol is not None:
        a, b = symbol_extent(symbol, grid, hbar, tol)
        qe.append(a)
        pe.append(b)
    if states:
        a, b = state_extent(states, hbar, tol)
        qe.append(a)
        pe.append(b)
    q = min(qe) if qe else None
    p = min(pe) if pe else None
    if q is not None and q >= grid.L:
        q = None
    return PhaseGrid(grid, hbar, q, p)
