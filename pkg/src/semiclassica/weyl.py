"""Weyl quantization of position, momentum and product symbols.

Product symbols ``f1(q) f2(p)`` use the midpoint kernel

    (Q psi)(x_i) = sum_m c_m f1(x_i + m dx / 2) psi(x_{i+m}),

with ``c_m`` the discrete Fourier coefficients of ``f2`` on the momentum
lattice ``hbar k``. Shifts therefore land on grid points and the midpoints
on the half-spacing lattice. The Nyquist shift is dropped so the operator is
exactly Hermitian for real symbols.

The heat-smoothing bridge to Berezin quantization convolves a symbol with a
Gaussian of variance ``hbar / 2`` per phase-space axis. Mollified factors are
available pointwise (Gauss-Hermite quadrature) and on lattices (FFT).
"""
import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.interpolate import RectBivariateSpline

from . import kernels
from .errors import GridError, SymbolError
from .operators import Operator
from .phase_space import Symbol

SHIFT_CUTOFF = 1e-15
TAIL_TOL = 1e-8
KERNEL_TAIL_TOL = 1e-6
GH_NODES = {1: 60, 2: 36}


def _as_factor(f, kind):
    """Callable on coordinate arrays ``(..., n)``; Symbols are restricted to
    ``p = 0`` (``kind='q'``) or ``q = 0`` (``kind='p'``)."""
    if isinstance(f, Symbol):
        if kind == "q":
            return lambda x: f(x, np.zeros_like(x))
        return lambda x: f(np.zeros_like(x), x)
    return f


class Mollified:
    """``E(x) = pi^{-n/2} int exp(-|u|^2) f(x + sqrt(hbar) u) du``.

    This is the convolution with a centred Gaussian of variance ``hbar / 2`` per
    axis. Calling the object uses tensor Gauss-Hermite quadrature; the lattice
    helpers below use the FFT instead and only read :attr:`source`.
    """

    def __init__(self, source, hbar, n, nodes=None):
        self.source = source
        self.hbar = hbar
        self.n = n
        u, w = hermgauss(nodes or GH_NODES[n])
        self._u = u * np.sqrt(hbar)
        self._w = w / np.sqrt(np.pi)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = 0.0
        if self.n == 1:
            for u, w in zip(self._u, self._w):
                out = out + w * self.source(x + u)
            return out
        for u1, w1 in zip(self._u, self._w):
            for u2, w2 in zip(self._u, self._w):
                out = out + (w1 * w2) * self.source(x + np.array([u1, u2]))
        return out


def _tail_check(vals, what):
    v = np.abs(vals)
    peak = v.max()
    if peak == 0:
        return
    edge = max(np.abs(np.take(vals, [0, -1], axis=ax)).max() for ax in range(vals.ndim))
    if edge > TAIL_TOL * peak:
        raise GridError(f"window too small for {what}: edge/peak = {edge / peak:.2g}")


def heat_lattice(vals, spacing, hbar):
    """Periodic Gaussian convolution (variance ``hbar / 2`` per axis) of samples
    on a uniform lattice, done in Fourier space."""
    vals = np.asarray(vals)
    F = np.fft.fftn(vals)
    k2 = 0.0
    for ax, m in enumerate(vals.shape):
        k = 2 * np.pi * np.fft.fftfreq(m, spacing)
        shape = [1] * vals.ndim
        shape[ax] = m
        k2 = k2 + (k ** 2).reshape(shape)
    out = np.fft.ifftn(F * np.exp(-0.25 * hbar * k2))
    return out.real if np.isrealobj(vals) else out


def mollify_on_grid(f1, hbar, grid, check=True):
    """Mollified position factor sampled on the grid (FFT route)."""
    f1 = _as_factor(f1, "q")
    vals = np.asarray(f1(grid.points()))
    if check:
        _tail_check(vals, "the position factor")
    return heat_lattice(vals, grid.dx, hbar)


def momentum_lattice(grid, hbar):
    """``hbar k`` in fft order, as coordinate array of shape ``grid.shape + (n,)``."""
    k = 2 * np.pi * np.fft.fftfreq(grid.N, grid.dx)
    axes = np.meshgrid(*([hbar * k] * grid.n), indexing="ij")
    return np.stack(axes, axis=-1)


def mollify_on_momenta(f2, hbar, grid, check=True):
    """Mollified momentum factor on the fft-ordered lattice ``hbar k``."""
    f2 = _as_factor(f2, "p")
    vals = np.fft.fftshift(np.asarray(f2(momentum_lattice(grid, hbar))))
    if check:
        _tail_check(vals, "the momentum factor")
    dp = np.pi * hbar / grid.L
    return np.fft.ifftshift(heat_lattice(vals, dp, hbar))


def _half_lattice_values(f1, grid):
    # f1 at (j - N) dx / 2, j = 0..2N-1 per axis: the midpoints of all grid pairs
    h = (np.arange(2 * grid.N) - grid.N) * grid.dx / 2
    pts = np.stack(np.meshgrid(*([h] * grid.n), indexing="ij"), axis=-1)
    if isinstance(f1, Mollified):
        vals = np.asarray(f1.source(pts))
        _tail_check(vals, "the position factor")
        return heat_lattice(vals, grid.dx / 2, f1.hbar)
    return np.asarray(f1(pts))


def _momentum_values(f2, hbar, grid):
    if isinstance(f2, Mollified):
        return mollify_on_momenta(f2.source, hbar, grid)
    return np.asarray(f2(momentum_lattice(grid, hbar)))


class WeylOperator(Operator):
    """Weyl-quantized position, momentum or product symbol on a grid."""

    def __init__(self, grid, hbar, kind, **data):
        super().__init__(grid)
        self.hbar = hbar
        self.kind = kind
        self.data = data
        if kind == "position":
            self.hermitian = np.isrealobj(data["values"])
        elif kind == "momentum":
            self.hermitian = np.isrealobj(data["multiplier"])
        else:
            self.hermitian = data["real"]

    def apply(self, values):
        d = self.data
        if self.kind == "position":
            return d["values"] * values
        if self.kind == "momentum":
            axes = tuple(range(self.grid.n))
            return np.fft.ifftn(d["multiplier"] * np.fft.fftn(values, axes=axes), axes=axes)
        psi = np.ascontiguousarray(values, dtype=np.complex128)
        if self.grid.n == 1:
            out = kernels.weyl_shift_sum_1d(psi, d["half"], d["coef"], d["shifts"][0])
        else:
            out = kernels.weyl_shift_sum_2d(psi, d["half"], d["coef"], *d["shifts"])
        # a real symbol even in p has a real kernel
        return out.real if d["real_kernel"] and np.isrealobj(values) else out

    @property
    def n_shifts(self):
        return len(self.data["coef"]) if self.kind == "separable" else 1


def weyl_position(f, grid):
    f = _as_factor(f, "q")
    return WeylOperator(grid, None, "position", values=np.asarray(f(grid.points())))


def weyl_momentum(f, hbar, grid):
    f = _as_factor(f, "p")
    return WeylOperator(grid, hbar, "momentum", multiplier=np.asarray(f(momentum_lattice(grid, hbar))))


def weyl_separable(f1, f2, hbar, grid):
    """Weyl operator of ``f1(q) f2(p)`` by the midpoint shift kernel.

    Parameters
    ----------
    f1, f2 : callable or Symbol or Mollified
        Factors; :class:`Mollified` factors are sampled on lattices by FFT.
    """
    grid.check_resolution(hbar)
    f1, f2 = _as_factor(f1, "q"), _as_factor(f2, "p")
    n, N = grid.n, grid.N
    F2 = _momentum_values(f2, hbar, grid)
    c = np.fft.fftn(F2) / N ** n
    mag = np.abs(c)
    keep = mag > SHIFT_CUTOFF * mag.max()
    m = [np.fft.fftfreq(N, 1.0 / N).astype(np.int64)] * n
    grids = np.meshgrid(*m, indexing="ij")
    wrap = np.zeros_like(keep)
    for g in grids:
        keep &= g != -N // 2
        wrap |= np.abs(g) >= N // 2 - 1
    # the periodic kernel wraps at half the box; its tail there must be negligible
    edge = mag[wrap].max() / mag.max()
    if edge > KERNEL_TAIL_TOL:
        raise GridError(f"momentum factor is under-resolved: kernel tail {edge:.2g} at half the box")
    half = np.ascontiguousarray(_half_lattice_values(f1, grid), dtype=np.complex128)
    shifts = [np.ascontiguousarray(g[keep], dtype=np.int64) for g in grids]
    real = bool(np.all(np.abs(np.imag(F2)) == 0) and np.all(np.imag(half) == 0))
    Fm = F2[np.ix_(*([(-np.arange(N)) % N] * n))] if n > 1 else F2[(-np.arange(N)) % N]
    even = bool(np.allclose(Fm, F2, rtol=1e-12, atol=1e-14 * np.abs(F2).max()))
    return WeylOperator(grid, hbar, "separable", coef=np.ascontiguousarray(c[keep]),
                        shifts=shifts, half=half, real=real, real_kernel=real and even)


def weyl_of_symbol(f, hbar, grid):
    """Weyl operator of a Symbol carrying a product factorization."""
    if f.factors is None:
        raise SymbolError(f"{f.name} is not a product symbol")
    return weyl_separable(f.factors[0], f.factors[1], hbar, grid)


def heat_smooth(f, hbar, grid=None, p_extent=None, points=256):
    """Gaussian smoothing of a symbol, variance ``hbar / 2`` on every phase axis.

    Product symbols are smoothed factor by factor and stay products (the
    factors become :class:`Mollified`). Other one-dimensional symbols are
    sampled on a ``points x points`` lattice over ``[-L, L) x [-p_extent,
    p_extent)``, smoothed by FFT and interpolated by bicubic splines.
    """
    if f.factors is not None:
        E1 = Mollified(f.factors[0], hbar, f.n)
        E2 = Mollified(f.factors[1], hbar, f.n)
        return Symbol(lambda q, p: E1(q) * E2(p), f.n, None, f.decay,
                      f"heat({f.name};{hbar:g})", (E1, E2), f.real)
    if f.n != 1 or grid is None or p_extent is None:
        raise SymbolError("non-product symbols are smoothed only for n = 1 with a grid and p_extent")
    L = grid.L
    qs = -L + 2 * L * np.arange(points) / points
    ps = -p_extent + 2 * p_extent * np.arange(points) / points
    Q, P = np.meshgrid(qs, ps, indexing="ij")
    vals = np.asarray(f(Q[..., None], P[..., None]))
    _tail_check(vals, f.name)
    dq, dp = qs[1] - qs[0], ps[1] - ps[0]
    if abs(dq - dp) > 1e-12 * dq:
        # unequal spacings: smooth each axis with its own lattice
        F = np.fft.fft2(vals)
        kq = 2 * np.pi * np.fft.fftfreq(points, dq)[:, None]
        kp = 2 * np.pi * np.fft.fftfreq(points, dp)[None, :]
        sm = np.fft.ifft2(F * np.exp(-0.25 * hbar * (kq ** 2 + kp ** 2))).real
    else:
        sm = heat_lattice(vals, dq, hbar)
    spl = RectBivariateSpline(qs, ps, sm, kx=3, ky=3)

    def func(q, p):
        q, p = np.broadcast_arrays(np.asarray(q)[..., 0], np.asarray(p)[..., 0])
        return spl.ev(q.ravel(), p.ravel()).reshape(q.shape)

    return Symbol(func, 1, None, f.decay, f"heat({f.name};{hbar:g})", None, True)
