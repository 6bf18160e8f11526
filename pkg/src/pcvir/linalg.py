"""Cyclic Jacobi eigensolver for small symmetric matrices."""

from functools import lru_cache

import numpy as np

from .exceptions import DomainError


@lru_cache(maxsize=64)
def _round_robin(p):
    """Rounds of disjoint (k, l) pairs, k < l, covering every pair once per sweep."""
    m = p + (p % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < p and b < p]
        if pairs:
            k, l = zip(*pairs)
            rounds.append((np.array(k), np.array(l)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def jacobi_eigh(a, tol=1e-12, max_sweeps=100):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Each sweep visits every off-diagonal pair once, in round-robin order so
    that the rotations of one round act on disjoint index pairs and can be
    applied together.

    Parameters
    ----------
    a : array_like, shape (p, p)
        Symmetric matrix. Not modified.
    tol : float
        Sweeps stop once the Frobenius norm of the off-diagonal part falls
        below ``tol`` (relative to the matrix norm when that exceeds 1).
    max_sweeps : int
        Hard limit on full sweeps.

    Returns
    -------
    eigenvalues : ndarray, shape (p,)
        Sorted descending.
    eigenvectors : ndarray, shape (p, p)
        Orthonormal columns matching ``eigenvalues``.
    converged : bool
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix contains non-finite entries")
    p = a.shape[0]
    a = 0.5 * (a + a.T)
    v = np.eye(p)
    scale = max(1.0, float(np.linalg.norm(a)))
    mask = ~np.eye(p, dtype=bool)

    def off_norm():
        return float(np.sqrt(np.sum(a[mask] ** 2)))

    converged = off_norm() < tol * scale
    for _ in range(max_sweeps):
        if converged:
            break
        for k, l in _round_robin(p):
            akl = a[k, l]
            active = np.abs(akl) >= 1e-18 * scale
            if not active.any():
                a[k, l] = a[l, k] = 0.0
                continue
            safe = np.where(active, akl, 1.0)
            theta = (a[l, l] - a[k, k]) / (2.0 * safe)
            big = np.abs(theta) > 1e150
            theta_c = np.where(big, 1.0, theta)
            t = np.where(theta_c == 0, 1.0,
                         np.sign(theta_c) / (np.abs(theta_c) + np.sqrt(theta_c * theta_c + 1.0)))
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            j = np.eye(p)
            j[k, k] = c
            j[l, l] = c
            j[k, l] = s
            j[l, k] = -s
            a = j.T @ a @ j
            a[k, l] = a[l, k] = 0.0
            v = v @ j
        converged = off_norm() < tol * scale

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order], converged


def symmetric_inverse(a, rcond=1e-13):
    """Inverse of a symmetric positive definite matrix via :func:`jacobi_eigh`.

    Returns ``None`` when the matrix is not numerically positive definite.
    """
    w, v, ok = jacobi_eigh(a)
    if not ok or w[-1] <= 0.0 or w[-1] <= rcond * w[0]:
        return None
    return (v / w) @ v.T
