"""Matrix-free eigen solvers used by the operator modules.

Vectors are flat numpy arrays; callers reshape. Inner products here are plain
Euclidean, which is the grid inner product up to the constant cell factor.
"""
import logging

import numpy as np

from .errors import ConvergenceError

log = logging.getLogger(__name__)


def _project_out(V, j, w):
    # conj(V) @ w without copying the basis
    h = np.conj(np.conj(w) @ V[:j].T) if np.iscomplexobj(V) else V[:j] @ w
    return h, w - h @ V[:j]


def _orthogonalize(V, j, w):
    # classical Gram-Schmidt; a second pass only when cancellation was severe
    # (Daniel-Gragg-Kaufman-Stewart criterion)
    before = np.linalg.norm(w)
    h, w = _project_out(V, j, w)
    if np.linalg.norm(w) < 0.7071 * before:
        h2, w = _project_out(V, j, w)
        h = h + h2
    return h, w


def lanczos_lowest(apply, v0, k, tol=1e-8, krylov=None, max_restarts=400,
                   project=None, rng=None):
    """Lowest ``k`` eigenpairs of a Hermitian operator.

    Thick-restart Lanczos with full reorthogonalization. The projected matrix is
    assembled from the reorthogonalization coefficients, so it is exactly the
    Rayleigh quotient of the current basis.

    Parameters
    ----------
    apply : callable
        Hermitian matvec on flat arrays.
    v0 : ndarray
        Start vector (dtype decides real vs complex arithmetic).
    k : int
        Number of wanted pairs.
    tol : float
        Residual target ``||A x - theta x|| <= tol * max(1, |theta|)``.
    project : callable, optional
        Orthogonal projector applied to the start vector and after each matvec,
        restricting the iteration to an invariant subspace.

    Returns
    -------
    values, vectors, residuals, matvecs
        ``vectors`` has shape ``(k, n)`` with orthonormal rows.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    n = v0.size
    m = krylov or min(n, max(2 * k + 30, 60))
    if m <= k:
        raise ValueError("Krylov dimension must exceed k")
    dtype = np.result_type(v0, apply(np.asarray(v0).ravel()), np.float64)
    P = project if project is not None else (lambda x: x)
    V = np.zeros((m + 1, n), dtype=dtype)
    T = np.zeros((m, m), dtype=dtype)
    v = P(np.asarray(v0, dtype=dtype).ravel())
    V[0] = v / np.linalg.norm(v)
    start = 0
    matvecs = 0
    beta = 0.0
    for restart in range(max_restarts):
        for j in range(start, m):
            w = P(apply(V[j]))
            matvecs += 1
            h, w = _orthogonalize(V, j + 1, w)
            T[: j + 1, j] = h
            T[j, : j + 1] = h.conj()
            beta = np.linalg.norm(w)
            if beta < 1e-13 * max(1.0, np.abs(h[-1])):
                # invariant subspace; continue with a fresh direction
                r = P(rng.standard_normal(n).astype(dtype))
                _, r = _orthogonalize(V, j + 1, r)
                V[j + 1] = r / np.linalg.norm(r)
                beta = 0.0
            else:
                # re-project: Gram-Schmidt roundoff leaks out of the sector
                # and would surface as spurious zero Ritz values
                w = P(w)
                V[j + 1] = w / np.linalg.norm(w)
        theta, S = np.linalg.eigh(T)
        res = np.abs(beta * S[m - 1, :])
        done = res[:k] <= tol * np.maximum(1.0, np.abs(theta[:k]))
        if done.all():
            break
        # keep the lowest Ritz vectors plus the residual direction; the
        # couplings to V[keep] are recomputed by the next apply
        keep = min(m - 1, k + max((m - k) // 2, 1))
        Vk = S[:, :keep].T @ V[:m]
        V[keep] = V[m]
        V[:keep] = Vk
        V[keep + 1:] = 0
        T[:] = 0
        T[np.arange(keep), np.arange(keep)] = theta[:keep]
        start = keep
    else:
        raise ConvergenceError(
            f"Lanczos did not reach residual {tol:g} in {max_restarts} restarts "
            f"(worst {res[:k].max():.3g})")
    X = S[:, :k].T @ V[:m]
    # orthonormality is what callers rely on; re-orthonormalize against drift
    Q, R = np.linalg.qr(X.T)
    X = (Q * np.sign(np.diag(R)).conj()).T
    resid = np.array([np.linalg.norm(P(apply(x)) - t * x) for x, t in zip(X, theta[:k])])
    matvecs += k
    log.debug("lanczos: %d matvecs, %d restarts", matvecs, restart)
    return theta[:k].real.copy(), X, resid, matvecs


def power_iteration(apply, v0, tol=1e-10, max_iter=2000, project=None):
    """Dominant eigenpair of a Hermitian positive operator.

    Stops when the residual ``||A x - lam x||`` drops below ``tol * lam``.
    Returns ``(lam, x, residual, iterations, converged)``.
    """
    P = project if project is not None else (lambda x: x)
    x = P(np.asarray(v0, dtype=complex).ravel())
    x = x / np.linalg.norm(x)
    lam, res = 0.0, np.inf
    for it in range(1, max_iter + 1):
        y = P(apply(x))
        lam = float(np.vdot(x, y).real)
        res = np.linalg.norm(y - lam * x)
        x = y / np.linalg.norm(y)
        if res <= tol * abs(lam):
            return lam, x, res, it, True
    return lam, x, res, max_iter, False


def operator_norm(apply, adjoint, v0, tol=1e-8, max_iter=500):
    """Operator 2-norm by power iteration on ``A* A``.

    Returns ``(norm, converged, iterations)``. The estimate is a lower bound
    that increases monotonically towards the norm.
    """
    x = np.asarray(v0, dtype=complex).ravel()
    x = x / np.linalg.norm(x)
    prev = 0.0
    for it in range(1, max_iter + 1):
        y = adjoint(apply(x))
        lam = float(np.vdot(x, y).real)
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0, True, it
        x = y / ny
        if it > 1 and abs(lam - prev) <= tol * abs(lam):
            return float(np.sqrt(max(lam, 0.0))), True, it
        prev = lam
    return float(np.sqrt(max(lam, 0.0))), False, max_iter


def krylov_ritz_values(apply, v0, m=30):
    """Ritz values of a Hermitian operator on the ``m``-dimensional Krylov space
    of ``v0`` (fully reorthogonalized, no restarts)."""
    # complex arithmetic when the operator maps real vectors to complex ones
    dtype = np.result_type(v0, apply(v0), np.float64)
    n = v0.size
    m = min(m, n)
    V = np.zeros((m + 1, n), dtype=dtype)
    T = np.zeros((m, m), dtype=dtype)
    V[0] = v0 / np.linalg.norm(v0)
    size = m
    for j in range(m):
        h, w = _orthogonalize(V, j + 1, apply(V[j]))
        T[: j + 1, j] = h
        T[j, : j + 1] = h.conj()
        beta = np.linalg.norm(w)
        if beta < 1e-14 * max(1.0, np.abs(h).max()):
            size = j + 1
            break
        V[j + 1] = w / beta
    return np.linalg.eigvalsh(T[:size, :size])
