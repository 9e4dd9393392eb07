"""Pure numpy versions of the compiled kernels.

Windows are centred on grid indices and stored circularly: offset ``o`` in
``[-J, J]`` lands in column ``o mod K``. Indices into the periodic grid wrap.

The Verlet loops take ``sub``, fractions of ``dt`` for composed substeps
(``[1.0]`` is plain Stormer-Verlet).
"""
import numpy as np


def _offsets(taper):
    J = (len(taper) - 1) // 2
    return np.arange(-J, J + 1)


def window_gather(rows, centers, taper, K):
    """Tapered windows of every row around each centre, shape ``(R, M, K)``."""
    off = _offsets(taper)
    R, N = rows.shape
    out = np.zeros((R, len(centers), K), dtype=np.complex128)
    idx = (np.asarray(centers)[:, None] + off[None, :]) % N
    out[:, :, off % K] = rows[:, idx] * taper
    return out


def window_scatter(seg, centers, taper, N):
    """Adjoint of :func:`window_gather`: overlap-add back onto rows of length ``N``."""
    off = _offsets(taper)
    R, M, K = seg.shape
    vals = seg[:, :, off % K] * taper
    idx = (np.asarray(centers)[:, None] + off[None, :]) % N
    flat = (np.arange(R)[:, None, None] * N + idx[None]).ravel()
    re = np.bincount(flat, weights=vals.real.ravel(), minlength=R * N)
    im = np.bincount(flat, weights=vals.imag.ravel(), minlength=R * N)
    return (re + 1j * im).reshape(R, N)


def _dpoly(coeffs, s):
    acc = 0.0
    for k in range(len(coeffs) - 1, 0, -1):
        acc = acc * s + k * coeffs[k]
    return acc


def verlet_monomial(q0, p0, coeffs, dt, nsteps, every, sub):
    coeffs = [float(c) for c in coeffs]
    out = np.empty((nsteps // every + 1, 2))
    q, p = float(q0), float(p0)
    out[0] = q, p
    r = 1
    sub = [float(w) * dt for w in sub]
    for s in range(1, nsteps + 1):
        for h in sub:
            p -= 0.5 * h * _dpoly(coeffs, q)
            q += h * 2.0 * p
            p -= 0.5 * h * _dpoly(coeffs, q)
        if s % every == 0:
            out[r] = q, p
            r += 1
    return out


def verlet_radial(q0, p0, coeffs, dt, nsteps, every, sub):
    coeffs = [float(c) for c in coeffs]
    q = np.array(q0, dtype=float)
    p = np.array(p0, dtype=float)
    n = q.size
    out = np.empty((nsteps // every + 1, 2 * n))
    out[0, :n], out[0, n:] = q, p
    r = 1
    sub = [float(w) * dt for w in sub]
    for s in range(1, nsteps + 1):
        for h in sub:
            p -= 0.5 * h * 2.0 * _dpoly(coeffs, q @ q) * q
            q += h * 2.0 * p
            p -= 0.5 * h * 2.0 * _dpoly(coeffs, q @ q) * q
        if s % every == 0:
            out[r, :n], out[r, n:] = q, p
            r += 1
    return out


def weyl_shift_sum_1d(psi, half, coef, m):
    """``out[i] = sum_s coef[s] half[(2i + m_s) % H] psi[(i + m_s) % N]``.

    ``half`` samples the position factor on the half-spacing lattice, so
    ``half[2i + m]`` is its value at the midpoint of ``x_i`` and ``x_{i+m}``.
    """
    N, H = psi.shape[0], half.shape[0]
    i = np.arange(N)
    out = np.zeros(N, dtype=np.complex128)
    for c, s in zip(coef, m):
        out += c * half[(2 * i + s) % H] * psi[(i + s) % N]
    return out


def weyl_shift_sum_2d(psi, half, coef, m1, m2):
    """Two-dimensional :func:`weyl_shift_sum_1d` over shift pairs ``(m1, m2)``."""
    N1, N2 = psi.shape
    H1, H2 = half.shape
    i1 = np.arange(N1)[:, None]
    i2 = np.arange(N2)[None, :]
    out = np.zeros((N1, N2), dtype=np.complex128)
    for c, s1, s2 in zip(coef, m1, m2):
        out += c * half[(2 * i1 + s1) % H1, (2 * i2 + s2) % H2] * psi[(i1 + s1) % N1, (i2 + s2) % N2]
    return out
