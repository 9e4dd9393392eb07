"""Classical phase space: points, symbols, potentials and Hamiltonian flow.

Symbols are vectorised callables ``f(q, p)`` where ``q`` and ``p`` carry the
configuration index on their last axis (length ``n``), so a single point has
shape ``(n,)`` and a batch has shape ``(..., n)``.

The Poisson bracket follows the sign convention

    {f, g} = sum_i  df/dp_i dg/dq_i - dg/dp_i df/dq_i

so that ``{q, p} = -1``. With this sign the commutator correspondence reads
``(i/hbar) [Q(f), Q(g)] ~ Q({f, g})``.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import PotentialError, SymbolError

DECAY_CLASSES = ("schwartz", "bounded", "unbounded")


@dataclass(frozen=True)
class PhasePoint:
    q: tuple
    p: tuple

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(float(v) for v in np.atleast_1d(self.q)))
        object.__setattr__(self, "p", tuple(float(v) for v in np.atleast_1d(self.p)))
        if len(self.q) != len(self.p) or len(self.q) not in (1, 2):
            raise SymbolError("phase point needs matching q and p of length 1 or 2")

    @property
    def n(self):
        return len(self.q)

    def array(self):
        return np.array(self.q + self.p)

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float)
        n = arr.size // 2
        return cls(tuple(arr[:n]), tuple(arr[n:]))


def _split(sigma, n):
    sigma = np.asarray(sigma, dtype=float)
    return sigma[..., :n], sigma[..., n:]


class Symbol:
    """A function on phase space ``R^{2n}``.

    Parameters
    ----------
    func : callable
        ``func(q, p)`` evaluated with broadcasting over leading axes.
    n : int
        Configuration dimension.
    grad : callable, optional
        ``grad(q, p) -> (dq, dp)``, each shaped like ``q``.
    decay : str
        ``"schwartz"``, ``"bounded"`` or ``"unbounded"``. Only the first two
        may be quantized.
    factors : tuple of callables, optional
        ``(fq, fp)`` with ``f(q, p) = fq(q) * fp(p)``; enables the separable
        fast paths.
    real : bool
        Whether the symbol is real valued.
    """

    def __init__(self, func, n, grad=None, decay="schwartz", name="symbol",
                 factors=None, real=True):
        if decay not in DECAY_CLASSES:
            raise SymbolError(f"unknown decay class {decay!r}")
        self.func = func
        self.n = n
        self.grad = grad
        self.decay = decay
        self.name = name
        self.factors = factors
        self.real = real
        self.potential = None

    def __call__(self, q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        return self.func(q, p)

    def at(self, point):
        if point.n != self.n:
            raise SymbolError(f"point of dimension {point.n} for a symbol on R^{2 * self.n}")
        return self.func(np.array(point.q), np.array(point.p))[()]

    def gradient(self, q, p):
        """Gradient ``(df/dq, df/dp)``; central differences when no formula is known."""
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        if self.grad is not None:
            return self.grad(q, p)
        return _fd_gradient(self.func, q, p)

    @property
    def separable(self):
        return self.factors is not None

    def __mul__(self, other):
        if np.isscalar(other):
            c = other
            fac = None if self.factors is None else (
                lambda q, fq=self.factors[0]: c * fq(q), self.factors[1])
            g = None if self.grad is None else _scaled_grad(self.grad, c)
            return Symbol(lambda q, p: c * self.func(q, p), self.n, g, self.decay,
                          f"{c}*{self.name}", fac, self.real and np.isrealobj(c))
        return symbol_product(self, other)

    __rmul__ = __mul__

    def __add__(self, other):
        if self.n != other.n:
            raise SymbolError("adding symbols of different dimension")
        g = None
        if self.grad is not None and other.grad is not None:
            def g(q, p, a=self.grad, b=other.grad):
                (aq, ap), (bq, bp) = a(q, p), b(q, p)
                return aq + bq, ap + bp
        return Symbol(lambda q, p: self.func(q, p) + other.func(q, p), self.n, g,
                      _worse(self.decay, other.decay), f"({self.name}+{other.name})",
                      None, self.real and other.real)

    def __sub__(self, other):
        return self + (-1.0) * other

    def conj(self):
        if self.real:
            return self
        fac = None if self.factors is None else tuple(
            (lambda x, f=f: np.conj(f(x))) for f in self.factors)
        return Symbol(lambda q, p: np.conj(self.func(q, p)), self.n, None, self.decay,
                      f"conj({self.name})", fac, False)


def _worse(a, b):
    return DECAY_CLASSES[max(DECAY_CLASSES.index(a), DECAY_CLASSES.index(b))]


def _better(a, b):
    return DECAY_CLASSES[min(DECAY_CLASSES.index(a), DECAY_CLASSES.index(b))]


def _scaled_grad(grad, c):
    def g(q, p):
        dq, dp = grad(q, p)
        return c * dq, c * dp
    return g


def symbol_product(f, g):
    if f.n != g.n:
        raise SymbolError("multiplying symbols of different dimension")
    fac = None
    if f.factors is not None and g.factors is not None:
        (fq, fp), (gq, gp) = f.factors, g.factors
        fac = (lambda q: fq(q) * gq(q), lambda p: fp(p) * gp(p))
    grad = None
    if f.grad is not None and g.grad is not None:
        def grad(q, p):
            a, b = f.func(q, p), g.func(q, p)
            (aq, ap), (bq, bp) = f.grad(q, p), g.grad(q, p)
            return (aq * b[..., None] + a[..., None] * bq,
                    ap * b[..., None] + a[..., None] * bp)
    # a product decays as fast as its better factor when the other is bounded
    if "unbounded" in (f.decay, g.decay):
        decay = "schwartz" if "schwartz" in (f.decay, g.decay) else "unbounded"
    else:
        decay = _better(f.decay, g.decay)
    return Symbol(lambda q, p: f.func(q, p) * g.func(q, p), f.n, grad, decay,
                  f"{f.name}*{g.name}", fac, f.real and g.real)


def _fd_gradient(func, q, p, rel=1e-5):
    sig = np.concatenate([q, p], axis=-1)
    n = q.shape[-1]
    h = rel * (1.0 + np.linalg.norm(sig, axis=-1, keepdims=True))
    out = np.empty(np.broadcast_shapes(sig.shape, h.shape), dtype=np.result_type(func(q, p), float))
    for i in range(2 * n):
        e = np.zeros(2 * n)
        e[i] = 1.0
        plus = sig + h * e
        minus = sig - h * e
        out[..., i] = (func(plus[..., :n], plus[..., n:])
                       - func(minus[..., :n], minus[..., n:])) / (2 * h[..., 0])
    return out[..., :n], out[..., n:]


def eval_symbol(f, point):
    return f.at(point)


def poisson_bracket(f, g, point):
    """``{f, g}`` at one phase point (see module docstring for the sign)."""
    if point.n != f.n or point.n != g.n:
        raise SymbolError("dimension mismatch in Poisson bracket")
    q, p = np.array(point.q), np.array(point.p)
    fq, fp = f.gradient(q, p)
    gq, gp = g.gradient(q, p)
    return float(np.real_if_close(np.sum(fp * gq - gp * fq)))


def bracket_symbol(f, g):
    """The symbol ``{f, g}`` as a vectorised :class:`Symbol`."""
    def func(q, p):
        fq, fp = f.gradient(q, p)
        gq, gp = g.gradient(q, p)
        return np.sum(fp * gq - gp * fq, axis=-1)
    decay = "schwartz" if "schwartz" in (f.decay, g.decay) else _worse(f.decay, g.decay)
    return Symbol(func, f.n, None, decay, f"{{{f.name},{g.name}}}", None, f.real and g.real)


# -- symbol constructors ---------------------------------------------------

def constant(c, n):
    fac = (lambda q: np.full(q.shape[:-1], float(c)), lambda p: np.ones(p.shape[:-1]))
    grad = lambda q, p: (np.zeros_like(q), np.zeros_like(p))
    return Symbol(lambda q, p: np.full(np.broadcast_shapes(q.shape, p.shape)[:-1], float(c)),
                  n, grad, "bounded", f"const({c})", fac)


def gaussian_bump(center, width):
    """``exp(-|sigma - center|^2 / (2 width^2))``."""
    if width <= 0:
        raise SymbolError("bump width must be positive")
    q0, p0 = np.array(center.q), np.array(center.p)
    s2 = 2.0 * width ** 2

    def fq(q):
        return np.exp(-np.sum((q - q0) ** 2, axis=-1) / s2)

    def fp(p):
        return np.exp(-np.sum((p - p0) ** 2, axis=-1) / s2)

    def grad(q, p):
        v = (fq(q) * fp(p))[..., None]
        return -2 * (q - q0) / s2 * v, -2 * (p - p0) / s2 * v

    return Symbol(lambda q, p: fq(q) * fp(p), center.n, grad, "schwartz",
                  f"bump({center.q},{center.p};{width})", (fq, fp))


def polynomial_cutoff(q_powers, p_powers, radius):
    """Monomial ``prod q_i^a_i p_i^b_i`` damped by ``exp(-|sigma|^2 / (2 radius^2))``."""
    a = np.asarray(q_powers, dtype=int)
    b = np.asarray(p_powers, dtype=int)
    if a.shape != b.shape or a.ndim != 1 or a.size not in (1, 2):
        raise SymbolError("power lists must have equal length n in {1, 2}")
    if radius <= 0:
        raise SymbolError("cutoff radius must be positive")
    r2 = 2.0 * radius ** 2

    def fq(q):
        return np.prod(q ** a, axis=-1) * np.exp(-np.sum(q * q, axis=-1) / r2)

    def fp(p):
        return np.prod(p ** b, axis=-1) * np.exp(-np.sum(p * p, axis=-1) / r2)

    def _dfac(x, powers, base):
        # d/dx_i of monomial * gaussian; base is the full factor value
        env = np.exp(-np.sum(x * x, axis=-1) / r2)
        d = np.empty(x.shape)
        for i, k in enumerate(powers):
            lower = powers.copy()
            lower[i] = max(k - 1, 0)
            d[..., i] = k * np.prod(x ** lower, axis=-1) * env
        return d - 2 * x / r2 * base[..., None]

    def grad(q, p):
        Fq, Fp = fq(q), fp(p)
        return _dfac(q, a, Fq) * Fp[..., None], _dfac(p, b, Fp) * Fq[..., None]

    return Symbol(lambda q, p: fq(q) * fp(p), a.size, grad, "schwartz",
                  f"poly({list(a)},{list(b)};{radius})", (fq, fp))


def coordinate(axis, kind="q", n=1, cutoff=None):
    """Coordinate function ``q_axis`` or ``p_axis``, optionally with a Gaussian cutoff."""
    if cutoff is not None:
        a = [0] * n
        b = [0] * n
        (a if kind == "q" else b)[axis] = 1
        return polynomial_cutoff(a, b, cutoff)

    def func(q, p):
        return (q if kind == "q" else p)[..., axis] + 0.0 * (q[..., 0] + p[..., 0])

    def grad(q, p):
        dq = np.zeros(np.broadcast_shapes(q.shape, p.shape))
        dp = np.zeros_like(dq)
        (dq if kind == "q" else dp)[..., axis] = 1.0
        return dq, dp

    return Symbol(func, n, grad, "unbounded", f"{kind}{axis + 1}")


# -- potentials -------------------------------------------------------------

class Potential:
    """Polynomial potential bounded below.

    Either ``radial`` coefficients ``c_k`` of ``V = sum c_k |q|^{2k}`` or, in one
    dimension, ``monomial`` coefficients ``a_k`` of ``V = sum a_k q^k``.
    ``symmetry`` is ``"none"``, ``"Z2"`` or ``"SO2"``; it is inferred when omitted.
    """

    def __init__(self, name, n, radial=None, monomial=None, symmetry=None):
        if (radial is None) == (monomial is None):
            raise PotentialError("give exactly one of radial or monomial coefficients")
        self.name = name
        self.n = n
        if n not in (1, 2):
            raise PotentialError("dimension must be 1 or 2")
        if radial is not None:
            c = np.trim_zeros(np.asarray(radial, dtype=float), "b")
            if c.size < 2 or c[-1] <= 0:
                raise PotentialError(f"{name}: radial polynomial must grow (positive leading term)")
            self.radial = c
            self.monomial = None
            natural = "Z2" if n == 1 else "SO2"
        else:
            if n != 1:
                raise PotentialError("monomial coefficients are only supported for n = 1")
            a = np.trim_zeros(np.asarray(monomial, dtype=float), "b")
            if a.size < 3 or (a.size - 1) % 2 or a[-1] <= 0:
                raise PotentialError(f"{name}: polynomial must have even degree and positive leading term")
            self.monomial = a
            self.radial = None
            natural = "Z2" if np.all(a[1::2] == 0) else "none"
        if symmetry is None:
            symmetry = natural
        if symmetry not in ("none", "Z2", "SO2"):
            raise PotentialError(f"unknown symmetry tag {symmetry!r}")
        if symmetry == "SO2" and natural != "SO2":
            raise PotentialError(f"{name} is not rotation invariant")
        if symmetry == "Z2" and natural == "none":
            raise PotentialError(f"{name} is not reflection invariant")
        self.symmetry = symmetry
        self._min = None

    def __repr__(self):
        return f"Potential({self.name!r}, n={self.n}, symmetry={self.symmetry!r})"

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        if self.radial is not None:
            return np.polynomial.polynomial.polyval(np.sum(q * q, axis=-1), self.radial)
        return np.polynomial.polynomial.polyval(q[..., 0], self.monomial)

    def grad(self, q):
        q = np.asarray(q, dtype=float)
        if self.radial is not None:
            d = np.polynomial.polynomial.polyder(self.radial)
            return 2.0 * np.polynomial.polynomial.polyval(np.sum(q * q, axis=-1), d)[..., None] * q
        d = np.polynomial.polynomial.polyder(self.monomial)
        return np.polynomial.polynomial.polyval(q, d)

    def _critical_radii(self):
        c = self.radial if self.radial is not None else self.monomial
        d = np.polynomial.polynomial.polyder(c)
        roots = np.polynomial.polynomial.polyroots(d) if d.size > 1 else np.array([])
        real = roots[np.abs(roots.imag) < 1e-9].real
        return real

    def minimum(self):
        """``(min V, minimizer description)``.

        The description is ``{"kind": "points", "points": [...]}`` or, for a
        rotation invariant potential minimised away from the origin,
        ``{"kind": "circle", "radius": r}``.
        """
        if self._min is not None:
            return self._min
        crit = self._critical_radii()
        if self.radial is not None:
            cand = np.concatenate([[0.0], crit[crit > 0]])
            vals = np.polynomial.polynomial.polyval(cand, self.radial)
            vmin = vals.min()
            s = cand[np.abs(vals - vmin) <= 1e-12 * (1 + abs(vmin))]
            radii = np.sqrt(s)
            if self.n == 1:
                pts = sorted({float(v) for r in radii for v in (r, -r)})
                desc = {"kind": "points", "points": [(v,) for v in pts]}
            elif np.all(radii == 0):
                desc = {"kind": "points", "points": [(0.0, 0.0)]}
            else:
                desc = {"kind": "circle", "radius": float(radii.max())}
        else:
            vals = np.polynomial.polynomial.polyval(crit, self.monomial)
            vmin = vals.min()
            pts = crit[np.abs(vals - vmin) <= 1e-12 * (1 + abs(vmin))]
            desc = {"kind": "points", "points": [(float(v),) for v in sorted(pts)]}
        self._min = (float(vmin), desc)
        return self._min

    @property
    def min_value(self):
        return self.minimum()[0]

    def minimizer_points(self, count=8):
        """Finite list of minimizers (``count`` samples on a circle)."""
        _, desc = self.minimum()
        if desc["kind"] == "points":
            return [np.array(pt) for pt in desc["points"]]
        r = desc["radius"]
        th = 2 * np.pi * np.arange(count) / count
        return [np.array([r * np.cos(t), r * np.sin(t)]) for t in th]

    def to_dict(self):
        d = {"name": self.name, "n": self.n, "symmetry": self.symmetry}
        if self.radial is not None:
            d["radial"] = self.radial.tolist()
        else:
            d["monomial"] = self.monomial.tolist()
        return d


def builtin_potential(name, n=None):
    if name == "doublewell":
        return Potential("doublewell", 1, radial=[1.0, -2.0, 1.0])
    if name == "mexicanhat":
        return Potential("mexicanhat", 2, radial=[1.0, -2.0, 1.0])
    if name == "harmonic":
        return Potential("harmonic", n or 1, radial=[0.0, 1.0])
    raise PotentialError(f"unknown built-in potential {name!r}")


BUILTIN_POTENTIALS = ("doublewell", "mexicanhat", "harmonic")


def hamiltonian_symbol(V):
    """``h(q, p) = |p|^2 + V(q)``."""
    def func(q, p):
        return np.sum(p * p, axis=-1) + V(q)

    def grad(q, p):
        dq = V.grad(q)
        return np.broadcast_to(dq, np.broadcast_shapes(dq.shape, p.shape)), 2.0 * p + 0.0 * dq

    s = Symbol(func, V.n, grad, "unbounded", f"h[{V.name}]")
    s.potential = V
    return s


def gibbs_symbol(V, t):
    """``exp(-t h)`` with ``h = |p|^2 + V``; separable as ``exp(-tV) exp(-t|p|^2)``."""
    if not t > 0:
        raise SymbolError(f"Gibbs parameter t must be positive, got {t}")

    def fq(q):
        return np.exp(-t * V(q))

    def fp(p):
        return np.exp(-t * np.sum(p * p, axis=-1))

    def grad(q, p):
        v = (fq(q) * fp(p))[..., None]
        return -t * V.grad(q) * v, -2 * t * p * v

    s = Symbol(lambda q, p: fq(q) * fp(p), V.n, grad, "schwartz", f"gibbs[{V.name};{t}]",
               (fq, fp))
    s.potential = V
    return s


# -- critical points ----------------------------------------------------------

def critical_set(h, box=2.5, seeds_per_axis=None, tol=1e-10, dedup=1e-6, max_iter=100):
    """Critical points of ``h`` by damped Newton from a regular seed grid.

    Returns a list of :class:`PhasePoint` with ``|grad h| < tol``; points closer
    than ``dedup`` are merged.
    """
    n = h.n
    if seeds_per_axis is None:
        seeds_per_axis = 21 if n == 1 else 7
    axis = np.linspace(-box, box, seeds_per_axis)
    X = np.stack(np.meshgrid(*([axis] * (2 * n)), indexing="ij"), -1).reshape(-1, 2 * n)

    def G(S):
        dq, dp = h.gradient(S[:, :n], S[:, n:])
        return np.concatenate([dq, dp], axis=-1)

    def hess(S):
        eps = 1e-6 * (1 + np.abs(S))
        Hm = np.empty((S.shape[0], 2 * n, 2 * n))
        for i in range(2 * n):
            e = np.zeros(2 * n)
            e[i] = 1.0
            Hm[:, :, i] = (G(S + eps[:, i:i + 1] * e) - G(S - eps[:, i:i + 1] * e)) / (2 * eps[:, i:i + 1])
        return 0.5 * (Hm + np.swapaxes(Hm, 1, 2))

    g = G(X)
    gn = np.linalg.norm(g, axis=1)
    for _ in range(max_iter):
        active = gn >= tol
        if not active.any():
            break
        S = X[active]
        step = -np.einsum("sij,sj->si", np.linalg.pinv(hess(S), rcond=1e-10), g[active])
        lam = np.ones(S.shape[0])
        new = S + step
        gnew = G(new)
        nn = np.linalg.norm(gnew, axis=1)
        for _ in range(30):
            bad = nn > gn[active]
            if not bad.any():
                break
            lam[bad] *= 0.5
            new[bad] = S[bad] + lam[bad, None] * step[bad]
            gnew[bad] = G(new[bad])
            nn[bad] = np.linalg.norm(gnew[bad], axis=1)
        X[active], g[active], gn[active] = new, gnew, nn
    found = X[gn < tol]
    out = []
    for s in found[np.lexsort(found.T[::-1])] if len(found) else []:
        if all(np.linalg.norm(s - o) > dedup for o in out):
            out.append(s)
    return [PhasePoint.from_array(s) for s in out]


# -- Hamiltonian flow -----------------------------------------------------------

@dataclass
class Trajectory:
    times: np.ndarray
    q: np.ndarray
    p: np.ndarray
    energy: np.ndarray

    @property
    def drift(self):
        return float(np.max(np.abs(self.energy - self.energy[0])))


_CBRT2 = 2.0 ** (1.0 / 3.0)
SUBSTEPS = {2: np.array([1.0]),
            4: np.array([1.0, -_CBRT2, 1.0]) / (2.0 - _CBRT2)}


def flow(h, start, T, dt=1e-3, record_every=1, order=4):
    """Integrate Hamilton's equations for ``h = |p|^2 + V``.

    Each step is a Stormer-Verlet step (``order=2``) or the symmetric
    three-stage composition of Verlet substeps (``order=4``, the default).
    """
    sub = SUBSTEPS[order]
    V = getattr(h, "potential", None)
    if V is None or not h.name.startswith("h["):
        raise SymbolError("flow needs a Hamiltonian built by hamiltonian_symbol")
    if start.n != V.n:
        raise SymbolError("start point dimension does not match the Hamiltonian")
    nsteps = int(round(T / dt))
    if V.radial is not None and V.n == 2:
        out = kernels.verlet_radial(np.array(start.q), np.array(start.p),
                                    np.ascontiguousarray(V.radial), dt, nsteps, record_every, sub)
    else:
        mono = V.monomial if V.monomial is not None else _radial_to_monomial(V.radial)
        out = kernels.verlet_monomial(start.q[0], start.p[0], np.ascontiguousarray(mono),
                                      dt, nsteps, record_every, sub)
    n = V.n
    q, p = out[:, :n], out[:, n:]
    times = dt * record_every * np.arange(out.shape[0])
    return Trajectory(times, q, p, h(q, p))


def _radial_to_monomial(c):
    a = np.zeros(2 * len(c) - 1)
    a[0::2] = c
    return a
