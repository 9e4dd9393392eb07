# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled windowed gather/scatter, Weyl shift sums and polynomial Verlet loops.

Signatures mirror ``_core_py`` exactly; see that module for the contract.
"""
import numpy as np

ctypedef double complex cplx


cdef inline Py_ssize_t _wrap(Py_ssize_t i, Py_ssize_t n) nogil:
    i = i % n
    if i < 0:
        i += n
    return i


def window_gather(const cplx[:, ::1] rows, const long long[::1] centers,
                  const double[::1] taper, Py_ssize_t K):
    cdef Py_ssize_t R = rows.shape[0]
    cdef Py_ssize_t N = rows.shape[1]
    cdef Py_ssize_t M = centers.shape[0]
    cdef Py_ssize_t W = taper.shape[0]
    cdef Py_ssize_t J = (W - 1) // 2
    cdef Py_ssize_t r, a, j, c
    out = np.zeros((R, M, K), dtype=np.complex128)
    cdef cplx[:, :, ::1] o = out
    with nogil:
        for r in range(R):
            for a in range(M):
                c = centers[a]
                for j in range(W):
                    o[r, a, _wrap(j - J, K)] = taper[j] * rows[r, _wrap(c + j - J, N)]
    return out


def window_scatter(const cplx[:, :, ::1] seg, const long long[::1] centers,
                   const double[::1] taper, Py_ssize_t N):
    cdef Py_ssize_t R = seg.shape[0]
    cdef Py_ssize_t M = seg.shape[1]
    cdef Py_ssize_t K = seg.shape[2]
    cdef Py_ssize_t W = taper.shape[0]
    cdef Py_ssize_t J = (W - 1) // 2
    cdef Py_ssize_t r, a, j, c
    out = np.zeros((R, N), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    with nogil:
        for r in range(R):
            for a in range(M):
                c = centers[a]
                for j in range(W):
                    o[r, _wrap(c + j - J, N)] += taper[j] * seg[r, a, _wrap(j - J, K)]
    return out


cdef inline double _dpoly(const double[::1] c, double s) nogil:
    # derivative of sum_k c[k] s**k
    cdef Py_ssize_t k
    cdef double acc = 0.0
    for k in range(c.shape[0] - 1, 0, -1):
        acc = acc * s + k * c[k]
    return acc


def verlet_monomial(double q0, double p0, const double[::1] coeffs, double dt,
                    Py_ssize_t nsteps, Py_ssize_t every, const double[::1] sub):
    cdef Py_ssize_t nrec = nsteps // every + 1
    out = np.empty((nrec, 2), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double q = q0, p = p0
    cdef Py_ssize_t s, m, r = 1
    cdef double h
    o[0, 0] = q
    o[0, 1] = p
    with nogil:
        for s in range(1, nsteps + 1):
            for m in range(sub.shape[0]):
                h = sub[m] * dt
                p -= 0.5 * h * _dpoly(coeffs, q)
                q += h * 2.0 * p
                p -= 0.5 * h * _dpoly(coeffs, q)
            if s % every == 0:
                o[r, 0] = q
                o[r, 1] = p
                r += 1
    return out


def verlet_radial(const double[::1] q0, const double[::1] p0, const double[::1] coeffs,
                  double dt, Py_ssize_t nsteps, Py_ssize_t every, const double[::1] sub):
    cdef Py_ssize_t n = q0.shape[0]
    cdef Py_ssize_t nrec = nsteps // every + 1
    out = np.empty((nrec, 2 * n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double q[2]
    cdef double p[2]
    cdef double g, r2, h
    cdef Py_ssize_t s, i, m, r = 1
    for i in range(n):
        q[i] = q0[i]
        p[i] = p0[i]
        o[0, i] = q[i]
        o[0, n + i] = p[i]
    with nogil:
        for s in range(1, nsteps + 1):
            for m in range(sub.shape[0]):
                h = sub[m] * dt
                r2 = 0.0
                for i in range(n):
                    r2 += q[i] * q[i]
                g = 2.0 * _dpoly(coeffs, r2)
                for i in range(n):
                    p[i] -= 0.5 * h * g * q[i]
                    q[i] += h * 2.0 * p[i]
                r2 = 0.0
                for i in range(n):
                    r2 += q[i] * q[i]
                g = 2.0 * _dpoly(coeffs, r2)
                for i in range(n):
                    p[i] -= 0.5 * h * g * q[i]
            if s % every == 0:
                for i in range(n):
                    o[r, i] = q[i]
                    o[r, n + i] = p[i]
                r += 1
    return out


def weyl_shift_sum_1d(const cplx[::1] psi, const cplx[::1] half,
                      const cplx[::1] coef, const long long[::1] m):
    cdef Py_ssize_t N = psi.shape[0]
    cdef Py_ssize_t H = half.shape[0]
    cdef Py_ssize_t S = coef.shape[0]
    cdef Py_ssize_t s, i, j, h
    cdef cplx c
    out = np.zeros(N, dtype=np.complex128)
    cdef cplx[::1] o = out
    with nogil:
        for s in range(S):
            c = coef[s]
            j = _wrap(m[s], N)
            h = _wrap(m[s], H)
            for i in range(N):
                o[i] += c * half[h] * psi[j]
                j += 1
                if j == N:
                    j = 0
                h += 2
                if h >= H:
                    h -= H
    return out


def weyl_shift_sum_2d(const cplx[:, ::1] psi, const cplx[:, ::1] half,
                      const cplx[::1] coef, const long long[::1] m1,
                      const long long[::1] m2):
    cdef Py_ssize_t N1 = psi.shape[0]
    cdef Py_ssize_t N2 = psi.shape[1]
    cdef Py_ssize_t H1 = half.shape[0]
    cdef Py_ssize_t H2 = half.shape[1]
    cdef Py_ssize_t S = coef.shape[0]
    cdef Py_ssize_t s, i1, i2, r, g, j, h, j0, h0
    cdef cplx c
    out = np.zeros((N1, N2), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    with nogil:
        for s in range(S):
            c = coef[s]
            r = _wrap(m1[s], N1)
            g = _wrap(m1[s], H1)
            j0 = _wrap(m2[s], N2)
            h0 = _wrap(m2[s], H2)
            for i1 in range(N1):
                j = j0
                h = h0
                for i2 in range(N2):
                    o[i1, i2] += c * half[g, h] * psi[r, j]
                    j += 1
                    if j == N2:
                        j = 0
                    h += 2
                    if h >= H2:
                        h -= H2
                r += 1
                if r == N1:
                    r = 0
                g += 2
                if g >= H1:
                    g -= H1
    return out
