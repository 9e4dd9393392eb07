"""Implicit linear operators on grid functions and their norms."""
import numpy as np

from . import linalg
from .grid import WaveFunction, fourier_multiplier


class Operator:
    """Linear map acting on arrays of grid values (shape ``grid.shape``).

    Subclasses implement :meth:`apply`; :meth:`adjoint` defaults to the
    Hermitian case.
    """

    hermitian = False

    def __init__(self, grid):
        self.grid = grid

    def apply(self, values):
        raise NotImplementedError

    def adjoint(self):
        if self.hermitian:
            return self
        raise NotImplementedError(f"{type(self).__name__} has no adjoint")

    def __call__(self, psi):
        if isinstance(psi, WaveFunction):
            return psi.with_values(self.apply(psi.values))
        return self.apply(np.asarray(psi))

    def flat(self):
        """Matvec on flat vectors, for the solvers in :mod:`linalg`."""
        shape = self.grid.shape
        return lambda v: self.apply(v.reshape(shape)).ravel()

    def __matmul__(self, other):
        return Composition(self, other)

    def __add__(self, other):
        return Combination([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return Combination([(1.0, self), (-1.0, other)])

    def __mul__(self, c):
        return Combination([(c, self)])

    __rmul__ = __mul__

    def __neg__(self):
        return Combination([(-1.0, self)])

    def to_dense(self):
        """Materialize column by column (small grids only)."""
        size = int(np.prod(self.grid.shape))
        out = np.empty((size, size), dtype=complex)
        e = np.zeros(size, dtype=complex)
        for j in range(size):
            e[j] = 1.0
            out[:, j] = self.apply(e.reshape(self.grid.shape)).ravel()
            e[j] = 0.0
        return out


class FunctionOperator(Operator):
    def __init__(self, grid, fn, adjoint_fn=None, hermitian=False):
        super().__init__(grid)
        self._fn = fn
        self._adj = adjoint_fn
        self.hermitian = hermitian

    def apply(self, values):
        return self._fn(values)

    def adjoint(self):
        if self.hermitian:
            return self
        if self._adj is None:
            raise NotImplementedError("adjoint not supplied")
        return FunctionOperator(self.grid, self._adj, self._fn)


class Multiplication(Operator):
    """Pointwise multiplication by sampled values."""

    def __init__(self, grid, values):
        super().__init__(grid)
        self.values = np.asarray(values)
        self.hermitian = np.isrealobj(self.values)

    def apply(self, values):
        return self.values * values

    def adjoint(self):
        return self if self.hermitian else Multiplication(self.grid, np.conj(self.values))


class FourierMultiplier(Operator):
    """Multiplier on the fft-ordered wavenumber lattice."""

    def __init__(self, grid, symbol, even=False):
        super().__init__(grid)
        self.symbol = np.asarray(symbol)
        self.even = even
        self.hermitian = np.isrealobj(self.symbol)

    def apply(self, values):
        return fourier_multiplier(self.grid, values, self.symbol, self.even)

    def adjoint(self):
        if self.hermitian:
            return self
        return FourierMultiplier(self.grid, np.conj(self.symbol))


class Composition(Operator):
    def __init__(self, *ops):
        super().__init__(ops[0].grid)
        self.ops = ops

    def apply(self, values):
        for op in reversed(self.ops):
            values = op.apply(values)
        return values

    def adjoint(self):
        return Composition(*[op.adjoint() for op in reversed(self.ops)])


class Combination(Operator):
    def __init__(self, terms):
        super().__init__(terms[0][1].grid)
        self.terms = terms
        self.hermitian = all(op.hermitian and np.isrealobj(c) for c, op in terms)

    def apply(self, values):
        out = None
        for c, op in self.terms:
            v = c * op.apply(values)
            out = v if out is None else out + v
        return out

    def adjoint(self):
        if self.hermitian:
            return self
        return Combination([(np.conj(c), op.adjoint()) for c, op in self.terms])


def commutator(a, b):
    return a @ b - b @ a


def operator_norm(op, tol=1e-8, max_iter=500, seed=0):
    """2-norm by power iteration on ``op* op``; returns ``(norm, converged)``."""
    rng = np.random.default_rng(seed)
    shape = op.grid.shape
    v0 = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    adj = op.adjoint()
    nrm, ok, _ = linalg.operator_norm(op.flat(), adj.flat(), v0.ravel(), tol, max_iter)
    return nrm, ok


def probe_norm(op, probes):
    """``max ||op psi|| / ||psi||`` over a list of probe states."""
    best = 0.0
    for psi in probes:
        v = psi.values
        best = max(best, float(np.linalg.norm(op.apply(v)) / np.linalg.norm(v)))
    return best
