"""Periodic position grids, wave functions and the hbar-scaled Fourier transform.

The grid on ``[-L, L)^n`` uses nodes ``x_j = (j - N/2) dx`` with ``dx = 2L/N`` so
that ``x -> -x`` and quarter turns map nodes onto nodes exactly.
"""
from dataclasses import dataclass, field
import struct

import numpy as np

from .errors import GridError

RESOLUTION_FACTOR = 0.35


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid in ``n`` dimensions.

    Parameters
    ----------
    n : int
        Configuration-space dimension, 1 or 2.
    L : float
        Half-width of the box.
    N : int
        Points per axis; a power of two, at least 64.
    """

    n: int
    L: float
    N: int

    def __post_init__(self):
        if self.n not in (1, 2):
            raise GridError(f"dimension must be 1 or 2, got {self.n}")
        if not self.L > 0:
            raise GridError("half-width L must be positive")
        N = int(self.N)
        if N < 64 or N & (N - 1):
            raise GridError(f"N must be a power of two >= 64, got {self.N}")

    @property
    def dx(self):
        return 2.0 * self.L / self.N

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def cell(self):
        return self.dx ** self.n

    @property
    def x(self):
        """1-D node coordinates (shared by every axis)."""
        return (np.arange(self.N) - self.N // 2) * self.dx

    def coords(self):
        """Coordinate arrays, one per axis, each of shape ``self.shape``."""
        return np.meshgrid(*([self.x] * self.n), indexing="ij")

    def points(self):
        """Nodes as an array of shape ``shape + (n,)``."""
        return np.stack(self.coords(), axis=-1)

    @property
    def wavenumbers(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.N, self.dx)

    def momentum_lattice(self, hbar):
        """Ascending momenta ``hbar * k`` matching :func:`fourier_hbar` output."""
        return hbar * np.fft.fftshift(self.wavenumbers)

    def dp(self, hbar):
        return np.pi * hbar / self.L

    def check_resolution(self, hbar_min):
        """Raise unless ``dx <= 0.35 sqrt(hbar_min)``."""
        limit = RESOLUTION_FACTOR * np.sqrt(hbar_min)
        if self.dx > limit * (1 + 1e-12):
            raise GridError(
                f"grid spacing {self.dx:.4g} exceeds {RESOLUTION_FACTOR}*sqrt(hbar)"
                f" = {limit:.4g} at hbar={hbar_min:g}")


DEFAULT_GRIDS = {1: GridSpec(1, 6.0, 1024), 2: GridSpec(2, 4.0, 256)}


def default_grid(n):
    return DEFAULT_GRIDS[n]


@dataclass
class WaveFunction:
    """Grid samples of a state.

    ``space`` is ``"position"`` or ``"momentum"``; momentum samples live on
    :meth:`GridSpec.momentum_lattice` and need ``hbar`` for their cell size.
    """

    grid: GridSpec
    values: np.ndarray
    hbar: float = None
    space: str = "position"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            raise GridError(f"values shape {self.values.shape} != grid {self.grid.shape}")

    @property
    def cell(self):
        if self.space == "position":
            return self.grid.cell
        return self.grid.dp(self.hbar) ** self.grid.n

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.cell))

    def with_values(self, values):
        return WaveFunction(self.grid, values, self.hbar, self.space, dict(self.meta))


def inner_product(a, b):
    """``<a, b>``, conjugate-linear in ``a``, with the grid cell as weight."""
    if a.grid != b.grid or a.space != b.space:
        raise GridError("inner product of states on different grids")
    return complex(np.vdot(a.values, b.values) * a.cell)


def normalize(psi):
    nrm = psi.norm()
    if nrm < 1e-14:
        raise GridError("cannot normalize a state of norm below 1e-14")
    return psi.with_values(psi.values / nrm)


def _fft_phase(grid, hbar):
    # nodes start at -L, so the DFT picks up exp(i k L) per axis
    k = grid.wavenumbers
    ph = np.exp(1j * k * grid.L)
    out = ph
    for _ in range(grid.n - 1):
        out = np.multiply.outer(out, ph)
    return out


def fourier_hbar(psi, hbar=None):
    """Unitary ``F_hbar``: ``(2 pi hbar)^{-n/2} int exp(-i p.x/hbar) psi(x) dx``.

    Output momenta are ascending (see :meth:`GridSpec.momentum_lattice`).
    """
    hbar = psi.hbar if hbar is None else hbar
    if hbar is None or hbar <= 0:
        raise GridError("fourier_hbar needs a positive hbar")
    g = psi.grid
    scale = (g.dx / np.sqrt(2 * np.pi * hbar)) ** g.n
    vals = np.fft.fftn(psi.values) * _fft_phase(g, hbar) * scale
    return WaveFunction(g, np.fft.fftshift(vals), hbar, "momentum")


def inverse_fourier_hbar(phi):
    g, hbar = phi.grid, phi.hbar
    scale = (g.dx / np.sqrt(2 * np.pi * hbar)) ** g.n
    vals = np.fft.ifftn(np.fft.ifftshift(phi.values) / (_fft_phase(g, hbar) * scale))
    return WaveFunction(g, vals, hbar, "position")


def fourier_multiplier(grid, values, symbol, even=False):
    """Apply the spectral multiplier ``symbol`` (fft-ordered array) to grid values.

    ``even=True`` promises a real multiplier even in ``k``; real data then stays real.
    """
    if even and np.isrealobj(values):
        axes = tuple(range(grid.n))
        return np.fft.irfftn(np.fft.rfftn(values) * _rfft_view(symbol, grid),
                             s=grid.shape, axes=axes)
    return np.fft.ifftn(np.fft.fftn(values) * symbol)


def _rfft_view(symbol, grid):
    return symbol[..., : grid.N // 2 + 1]


def k_squared(grid):
    k2 = grid.wavenumbers ** 2
    if grid.n == 1:
        return k2
    return k2[:, None] + k2[None, :]


def laplacian_apply(psi):
    """Spectral Laplacian (multiplier ``-|k|^2``)."""
    return psi.with_values(fourier_multiplier(psi.grid, psi.values, -k_squared(psi.grid), even=True))


def dump_csv(psi, path):
    """Write ``x_1..x_n, re, im`` rows with 17 significant digits."""
    cols = [c.ravel() for c in psi.grid.coords()]
    names = [f"x{i + 1}" for i in range(psi.grid.n)]
    if psi.space == "momentum":
        p = psi.grid.momentum_lattice(psi.hbar)
        cols = [c.ravel() for c in np.meshgrid(*([p] * psi.grid.n), indexing="ij")]
        names = [f"p{i + 1}" for i in range(psi.grid.n)]
    v = psi.values.ravel()
    with open(path, "w") as fh:
        fh.write(",".join(names + ["re", "im"]) + "\n")
        for row in zip(*cols, v.real, v.imag):
            fh.write(",".join(f"{c:.17g}" for c in row) + "\n")


def dump_binary(psi, path):
    """Little-endian float64: header ``(n, N, L, hbar, 0, 0, 0, 0)`` then re/im pairs."""
    hbar = psi.hbar if psi.hbar is not None else 0.0
    header = [psi.grid.n, psi.grid.N, psi.grid.L, hbar, 0.0, 0.0, 0.0, 0.0]
    data = np.empty(psi.values.size * 2, dtype="<f8")
    data[0::2] = psi.values.real.ravel()
    data[1::2] = psi.values.imag.ravel()
    with open(path, "wb") as fh:
        fh.write(struct.pack("<8d", *header))
        fh.write(data.tobytes())


def load_binary(path):
    with open(path, "rb") as fh:
        header = struct.unpack("<8d", fh.read(64))
        data = np.frombuffer(fh.read(), dtype="<f8")
    n, N, L, hbar = int(header[0]), int(header[1]), header[2], header[3]
    grid = GridSpec(n, L, N)
    vals = (data[0::2] + 1j * data[1::2]).reshape(grid.shape)
    return WaveFunction(grid, vals, hbar or None)
