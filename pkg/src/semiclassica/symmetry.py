"""Symmetry groups acting on phase space and on wave functions.

Elements are parameterized per kind: the trivial group has the single element
``0``, Z2 uses the sign ``+1`` / ``-1`` (acting as ``(q, p) -> (s q, s p)``),
SO2 uses an angle, and a custom finite group uses indices into its list of
isometries ``x -> R x + a``. Every element acts on phase space through
``(q, p) -> (R q + a, R p)``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GridError
from .grid import WaveFunction
from .phase_space import PhasePoint, Symbol

HAAR_POINTS = 256
KINDS = ("trivial", "Z2", "SO2", "custom")


def _rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def quarter_turn(a):
    """``psi(R^{-1} x)`` for the rotation ``R`` by +90 degrees on an n = 2 grid."""
    N = a.shape[0]
    rev = (-np.arange(N)) % N
    return a[:, rev].T


def _shear(v, axis, amount, dx):
    # f(x_axis - amount * x_other), as a Fourier phase per line: unitary on the grid
    N = v.shape[0]
    k = 2 * np.pi * np.fft.fftfreq(N, dx)
    x = (np.arange(N) - N // 2) * dx
    if axis == 0:
        ph = np.exp(-1j * np.outer(k, amount * x))
    else:
        ph = np.exp(-1j * np.outer(amount * x, k))
    return np.fft.ifft(np.fft.fft(v, axis=axis) * ph, axis=axis)


def fourier_rotate(v, theta, dx):
    """``psi(R_theta^{-1} x)`` by three Fourier shears after reducing ``theta``
    to ``[-pi/4, pi/4]`` with exact quarter turns."""
    k = int(np.round(theta / (np.pi / 2)))
    rest = theta - k * np.pi / 2
    out = v
    for _ in range(k % 4):
        out = quarter_turn(out)
    if rest == 0:
        return out
    a, b = -np.tan(rest / 2), np.sin(rest)
    out = _shear(out, 0, a, dx)
    out = _shear(out, 1, b, dx)
    return _shear(out, 0, a, dx)


def _reflect(a):
    rev = (-np.arange(a.shape[0])) % a.shape[0]
    return a[np.ix_(*([rev] * a.ndim))]


@dataclass(frozen=True)
class GroupAction:
    """A compact group acting by isometries of configuration space.

    Parameters
    ----------
    kind : {'trivial', 'Z2', 'SO2', 'custom'}
    n : int
        Configuration-space dimension (SO2 needs ``n = 2``).
    haar_points : int
        Size of the uniform angular rule used for SO2 averages.
    isometries : tuple of (R, a)
        Elements of a custom finite group; ``R`` is an ``n x n`` orthogonal
        matrix and ``a`` a translation. The list must be closed under
        composition.
    """

    kind: str
    n: int
    haar_points: int = HAAR_POINTS
    isometries: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown group kind {self.kind!r}")
        if self.kind == "SO2" and self.n != 2:
            raise ConfigError("SO2 acts on n = 2 only")
        if self.kind == "custom":
            if not self.isometries:
                raise ConfigError("custom group needs at least one isometry")
            for R, a in self.isometries:
                R = np.atleast_2d(np.asarray(R, dtype=float))
                if R.shape != (self.n, self.n) or not np.allclose(R @ R.T, np.eye(self.n), atol=1e-12):
                    raise ConfigError("custom group elements need orthogonal n x n matrices")

    @property
    def name(self):
        return self.kind.lower()

    @property
    def identity(self):
        return {"trivial": 0, "Z2": 1, "SO2": 0.0}.get(self.kind, self._identity_index())

    def _identity_index(self):
        for i, (R, a) in enumerate(self.isometries):
            if np.allclose(R, np.eye(self.n)) and np.allclose(a, 0):
                return i
        raise ConfigError("custom group has no identity element")

    @property
    def finite(self):
        return self.kind != "SO2"

    def elements(self):
        """Haar quadrature nodes (all elements for finite groups)."""
        if self.kind == "trivial":
            return [0]
        if self.kind == "Z2":
            return [1, -1]
        if self.kind == "SO2":
            return list(2 * np.pi * np.arange(self.haar_points) / self.haar_points)
        return list(range(len(self.isometries)))

    def generators(self):
        """Elements whose invariance implies invariance under the quadrature group."""
        if self.kind == "trivial":
            return []
        if self.kind == "Z2":
            return [-1]
        if self.kind == "SO2":
            return [2 * np.pi / self.haar_points, np.pi / 2]
        return [i for i in range(len(self.isometries)) if i != self._identity_index()]

    def matrix(self, g):
        """``(R, a)`` of the configuration-space isometry."""
        n = self.n
        if self.kind == "trivial":
            return np.eye(n), np.zeros(n)
        if self.kind == "Z2":
            if g not in (1, -1):
                raise ValueError(f"Z2 element must be +1 or -1, got {g!r}")
            return g * np.eye(n), np.zeros(n)
        if self.kind == "SO2":
            return _rotation(g), np.zeros(2)
        R, a = self.isometries[g]
        return np.atleast_2d(np.asarray(R, dtype=float)), np.asarray(a, dtype=float).reshape(n)

    def compose(self, g, h):
        """Element ``g h`` (apply ``h`` first)."""
        if self.kind == "trivial":
            return 0
        if self.kind == "Z2":
            return g * h
        if self.kind == "SO2":
            return float((g + h) % (2 * np.pi))
        Rg, ag = self.matrix(g)
        Rh, ah = self.matrix(h)
        return self._lookup(Rg @ Rh, Rg @ ah + ag)

    def inverse(self, g):
        if self.kind in ("trivial", "Z2"):
            return g
        if self.kind == "SO2":
            return float((-g) % (2 * np.pi))
        R, a = self.matrix(g)
        return self._lookup(R.T, -R.T @ a)

    def _lookup(self, R, a):
        for i in range(len(self.isometries)):
            Ri, ai = self.matrix(i)
            if np.allclose(Ri, R, atol=1e-12) and np.allclose(ai, a, atol=1e-12):
                return i
        raise ConfigError("custom group is not closed under composition")

    def act_array(self, g, q, p):
        """Vectorized ``g (q, p)`` on coordinate arrays of shape ``(..., n)``."""
        R, a = self.matrix(g)
        return np.asarray(q) @ R.T + a, np.asarray(p) @ R.T

    def phase_jacobian(self, g):
        R, _ = self.matrix(g)
        n = self.n
        J = np.zeros((2 * n, 2 * n))
        J[:n, :n] = R
        J[n:, n:] = R
        return float(np.linalg.det(J))


def make_group(name, n):
    """Group by config name: ``trivial``/``none``, ``z2``, ``so2``."""
    key = str(name).lower()
    if key in ("trivial", "none"):
        return GroupAction("trivial", n)
    if key == "z2":
        return GroupAction("Z2", n)
    if key == "so2":
        return GroupAction("SO2", n)
    raise ConfigError(f"unknown group {name!r}")


def group_for_potential(V):
    return make_group(V.symmetry or "trivial", V.n)


def act_phase(G, g, sigma):
    q, p = G.act_array(g, np.array(sigma.q), np.array(sigma.p))
    return PhasePoint(tuple(q), tuple(p))


def pullback_symbol(G, g, f):
    """``(zeta_g f)(sigma) = f(g^{-1} sigma)``."""
    ginv = G.inverse(g)

    def func(q, p):
        return f(*G.act_array(ginv, q, p))

    return Symbol(func, f.n, None, f.decay, f"pullback({f.name})", None, f.real)


def _lattice_map(G, g, grid):
    """Index map ``j -> index of g^{-1} x_j`` when ``g`` maps the grid to itself."""
    R, a = G.matrix(G.inverse(g))
    Ri = np.rint(R)
    shift = a / grid.dx
    if not (np.allclose(R, Ri, atol=1e-12) and np.allclose(shift, np.rint(shift), atol=1e-9)):
        return None
    N = grid.N
    idx = np.stack(np.meshgrid(*([np.arange(N) - N // 2] * grid.n), indexing="ij"), axis=-1)
    src = idx @ Ri.T.astype(int) + np.rint(shift).astype(int)
    return tuple(np.moveaxis((src + N // 2) % N, -1, 0))


def unitary_rep(G, g, psi):
    """``(U_g psi)(x) = psi(g^{-1} x)``.

    Exact when ``g`` maps grid points to grid points (reflections, quarter
    turns, lattice translations). Other rotations are applied as three
    Fourier shears, which is unitary on the grid and spectrally accurate for
    states that vanish near the box edge. ``meta['exact']`` records which case
    applied.
    """
    grid = psi.grid
    v = psi.values
    if G.kind == "trivial":
        out, exact = v.copy(), True
    elif G.kind == "Z2":
        out, exact = (v.copy() if g == 1 else _reflect(v)), True
    else:
        if G.kind == "SO2":
            k = g / (np.pi / 2)
            if abs(k - round(k)) < 1e-12:
                out = v
                for _ in range(int(round(k)) % 4):
                    out = quarter_turn(out)
                res = psi.with_values(np.array(out))
                res.meta["exact"] = True
                return res
        idx = _lattice_map(G, g, grid)
        if idx is not None:
            out, exact = v[idx], True
        else:
            if G.kind == "custom" and not np.allclose(G.matrix(g)[1] / grid.dx,
                                                     np.rint(G.matrix(g)[1] / grid.dx), atol=1e-9):
                raise GridError("translation is not commensurate with the grid")
            R, a = G.matrix(g)
            if not np.allclose(a, 0) or G.n != 2 or np.linalg.det(R) < 0:
                raise GridError("only rotations have an off-lattice representation")
            out = fourier_rotate(v, float(np.arctan2(R[1, 0], R[0, 0])), grid.dx)
            if np.isrealobj(v):
                out = out.real
            exact = False
    res = psi.with_values(out)
    res.meta["exact"] = exact
    return res


def haar_average(G, f, sigma0):
    """``int_G f(g sigma0) dmu_G(g)`` by the group's quadrature rule."""
    q = np.array(sigma0.q)
    p = np.array(sigma0.p)
    vals = [f(*G.act_array(g, q, p)) for g in G.elements()]
    return complex(np.mean(vals)) if not f.real else float(np.mean(np.real(vals)))


def haar_symbol(G, f):
    """The G-averaged symbol ``F(sigma) = int_G f(g sigma) dmu_G(g)``."""
    elems = G.elements()

    def func(q, p):
        acc = 0.0
        for g in elems:
            acc = acc + f(*G.act_array(g, q, p))
        return acc / len(elems)

    return Symbol(func, f.n, None, f.decay, f"haar({f.name})", None, f.real)


def conjugated(G, g, op):
    """The operator ``U_g op U_g^{-1}`` acting on grid values."""
    from .operators import FunctionOperator

    ginv = G.inverse(g)

    def fn(values):
        w = WaveFunction(op.grid, values)
        inner = op.apply(unitary_rep(G, ginv, w).values)
        return unitary_rep(G, g, w.with_values(inner)).values

    return FunctionOperator(op.grid, fn, hermitian=op.hermitian)


def equivariance_defect(G, g, f, hbar, grid, phase_grid=None, probes=None):
    """``max ||(U_g Q(f) U_g^{-1} - Q(zeta_g f)) psi|| / ||psi||`` over probes.

    The phase lattice must be invariant under ``g`` (it is for the centred
    lattices built by :class:`PhaseGrid` with symmetric extents).
    """
    from .coherent import berezin_dense, probe_states

    if G.kind == "trivial":
        return 0.0
    probes = probes if probes is not None else probe_states(grid, hbar, 3)
    Qf = berezin_dense(f, hbar, grid, phase_grid, check_coverage=False)
    Qg = berezin_dense(pullback_symbol(G, g, f), hbar, grid, Qf.pg, check_coverage=False)
    lhs = conjugated(G, g, Qf)
    worst = 0.0
    for psi in probes:
        d = lhs.apply(psi.values) - Qg.apply(psi.values)
        worst = max(worst, float(np.linalg.norm(d) / np.linalg.norm(psi.values)))
    return worst


def commutator_defect(G, g, op, probes):
    """``max ||U_g op psi - op U_g psi|| / ||psi||`` over probes."""
    worst = 0.0
    for psi in probes:
        a = unitary_rep(G, g, psi.with_values(op.apply(psi.values))).values
        b = op.apply(unitary_rep(G, g, psi).values)
        worst = max(worst, float(np.linalg.norm(a - b) / np.linalg.norm(psi.values)))
    return worst
