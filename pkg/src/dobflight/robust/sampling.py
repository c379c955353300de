"""Determinant sampling: a check on mu verdicts that does not use D-scaling.

For diagonal complex ``Delta`` the determinant ``det(I - M Delta)`` is affine
in each entry separately.  Drawing all entries but the last at random and
solving for the last gives points of the singular set directly, which is how
destabilizing perturbations are found; plain random draws almost never hit
that set exactly.
"""
from __future__ import annotations

import numpy as np


def _disk(rng, size, radius):
    r = radius * np.sqrt(rng.random(size))
    return r * np.exp(2j * np.pi * rng.random(size))


def _dets(M, deltas):
    k = M.shape[0]
    A = np.eye(k) - M[None, :, :] * deltas[:, None, :]
    return np.linalg.det(A)


def min_abs_det(M, draws: int = 10_000, radius: float = 1.0, seed=0) -> float:
    """Smallest ``|det(I - M Delta)|`` over random diagonal ``Delta`` with entries in the disk."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    rng = np.random.default_rng(seed)
    deltas = _disk(rng, (draws, M.shape[0]), radius)
    return float(np.min(np.abs(_dets(M, deltas))))


def find_destabilizer(M, draws: int = 100_000, radius: float = 1.0, seed=0, chunk: int = 20_000):
    """Search for a diagonal ``Delta`` with ``max |delta_i| <= radius`` and ``det(I - M Delta) = 0``.

    Returns the solution with the smallest largest entry, or ``None``.  Any
    solution certifies ``mu(M) >= 1 / max|delta_i|``.
    """
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    k = M.shape[0]
    if k == 1:
        if M[0, 0] == 0 or 1.0 / abs(M[0, 0]) > radius:
            return None
        return np.array([1.0 / M[0, 0]])
    rng = np.random.default_rng(seed)
    best, best_norm = None, np.inf
    done = 0
    while done < draws:
        n = min(chunk, draws - done)
        done += n
        d = np.zeros((n, k), dtype=complex)
        d[:, :-1] = _disk(rng, (n, k - 1), radius)
        a = _dets(M, d)
        d[:, -1] = 1.0
        b = _dets(M, d) - a
        ok = np.abs(b) > 1e-300
        last = np.full(n, np.inf, dtype=complex)
        last[ok] = -a[ok] / b[ok]
        d[:, -1] = last
        norms = np.max(np.abs(d), axis=1)
        i = int(np.argmin(norms))
        if norms[i] <= radius and norms[i] < best_norm:
            best, best_norm = d[i].copy(), norms[i]
    return best


def mu_lower_bound(M, draws: int = 100_000, seed=0) -> float:
    """``1 / max|delta_i|`` of the smallest singular perturbation found (0 if none)."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    ub = np.linalg.svd(M, compute_uv=False)[0]
    if ub == 0:
        return 0.0
    # any singular Delta has norm >= 1/sigma_max, so search a disk that can contain one
    radius = 4.0 / ub
    d = find_destabilizer(M, draws, radius=radius, seed=seed)
    return 0.0 if d is None else float(1.0 / np.max(np.abs(d)))
