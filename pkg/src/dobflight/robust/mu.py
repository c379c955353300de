"""LFT assembly of the uncertain DOB loop and the D-scaled mu upper bound."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_ITER = 200
REL_TOL = 1e-8
_GOLDEN = 0.5 * (np.sqrt(5.0) - 1.0)
_LINE_HALF_WIDTH = 3.0  # search +-3 in log-scale around the current point
_MIN_HALF_WIDTH = 1e-3
_LINE_XTOL = 1e-9


def assemble_m11(q, w_delta, w_k, w_j=None) -> np.ndarray:
    """Interconnection seen by the uncertainty blocks, ordered (delta, K, J).

    Arguments may be scalars or equal-length arrays of values at the same
    frequencies; array input returns a stack of shape ``(n, k, k)``.  With
    ``w_j`` omitted (vertical channel) the matrix is 2x2.
    """
    wj_in = None if w_j is None else np.asarray(w_j, dtype=float)
    args = [np.asarray(q, dtype=complex), np.asarray(w_delta, dtype=float), np.asarray(w_k, dtype=float)]
    if wj_in is not None:
        args.append(wj_in)
    shape = np.broadcast(*args).shape
    scalar = shape == ()
    flat = [np.broadcast_to(a, shape).reshape(-1) for a in args]
    q, wd, wk = flat[:3]
    p = 1.0 - q
    if w_j is None:
        M = np.empty((q.size, 2, 2), dtype=complex)
        M[:, 0, :] = (-q * wd)[:, None]
        M[:, 1, 0] = p * wk
        M[:, 1, 1] = -q * wk
    else:
        wj = flat[3]
        M = np.empty((q.size, 3, 3), dtype=complex)
        M[:, 0, :] = (-q * wd)[:, None]
        M[:, 1, 0] = p * wk
        M[:, 1, 1] = -q * wk
        M[:, 1, 2] = -q * wk
        M[:, 2, 0] = p * wj
        M[:, 2, 1] = p * wj
        M[:, 2, 2] = -q * wj
    return M[0] if scalar else M


@dataclass(frozen=True)
class MuBound:
    value: np.ndarray  # per matrix
    log_scales: np.ndarray
    converged: np.ndarray
    iterations: int


def _scaled_norm(M, x):
    d = np.exp(np.concatenate([x, np.zeros(x.shape[:-1] + (1,))], axis=-1))
    S = d[..., :, None] * M / d[..., None, :]
    H = np.conj(np.swapaxes(S, -1, -2)) @ S
    return np.sqrt(np.maximum(np.linalg.eigvalsh(H)[..., -1], 0.0))


def _line_search(M, x, v, half_width):
    """Golden-section minimization of the scaled norm along ``x + a v``, ``|a| <= half_width``.

    The scaled norm is convex in the log-scales, so the golden section finds
    the minimum on the bracket; a minimum at the edge is continued on the
    next sweep with a wider bracket.
    """
    lo, hi = -half_width, half_width.copy()
    c = hi - _GOLDEN * (hi - lo)
    e = lo + _GOLDEN * (hi - lo)
    fc = _scaled_norm(M, x + c[:, None] * v)
    fe = _scaled_norm(M, x + e[:, None] * v)
    while np.max(hi - lo) > _LINE_XTOL:
        left = fc < fe
        hi = np.where(left, e, hi)
        lo = np.where(left, lo, c)
        probe = np.where(left, hi - _GOLDEN * (hi - lo), lo + _GOLDEN * (hi - lo))
        f_probe = _scaled_norm(M, x + probe[:, None] * v)
        c, e = np.where(left, probe, e), np.where(left, c, probe)
        fc, fe = np.where(left, f_probe, fe), np.where(left, fc, f_probe)
    a = 0.5 * (lo + hi)
    return a, _scaled_norm(M, x + a[:, None] * v)


def mu_upper_bound_batch(M, max_iter: int = MAX_ITER, tol: float = REL_TOL, x0=None) -> MuBound:
    """D-scaling bound ``inf_D sigma_max(D M D^-1)`` for scalar complex blocks.

    ``M`` has shape ``(k, k)`` or ``(n, k, k)``.  The last scale is fixed to 1
    and the others are found by coordinate descent on their logarithms; the
    pairwise directions are included so the descent does not stall on the
    ridges where the two largest singular values coalesce.  ``x0`` warm-starts
    the log-scales (for example from a neighbouring filter setting).
    """
    M = np.asarray(M, dtype=complex)
    single = M.ndim == 2
    if single:
        M = M[None]
    if M.ndim != 3 or M.shape[1] != M.shape[2]:
        raise ValueError("M must be square")
    if not np.all(np.isfinite(M)):
        raise ValueError("M must be finite")
    n, k, _ = M.shape
    if k == 1:
        v = np.abs(M[:, 0, 0])
        res = MuBound(v, np.zeros((n, 0)), np.ones(n, bool), 0)
    else:
        dirs = list(np.eye(k - 1))
        for i in range(k - 1):
            for j in range(i + 1, k - 1):
                dirs.append(dirs[i] + dirs[j])
                dirs.append(dirs[i] - dirs[j])
        x = np.zeros((n, k - 1)) if x0 is None else np.array(x0, dtype=float).reshape(n, k - 1)
        best = _scaled_norm(M, x)
        if x0 is not None:
            # never start worse than the unscaled matrix
            plain = _scaled_norm(M, np.zeros_like(x))
            x = np.where((plain < best)[:, None], 0.0, x)
            best = np.minimum(plain, best)
        width = np.full((len(dirs), n), _LINE_HALF_WIDTH)
        converged = np.zeros(n, dtype=bool)
        it = 0
        while it < max_iter and not converged.all():
            it += 1
            before = best.copy()
            for di, v in enumerate(dirs):
                a, f_new = _line_search(M, x, v, width[di])
                better = f_new < best
                x = np.where(better[:, None], x + a[:, None] * v, x)
                best = np.where(better, f_new, best)
                step = np.where(better, np.abs(a), 0.0)
                width[di] = np.clip(4.0 * step, _MIN_HALF_WIDTH, _LINE_HALF_WIDTH)
            scale = np.maximum(before, np.finfo(float).tiny)
            converged |= (before - best) <= tol * scale
        res = MuBound(best, x, converged, it)
    if single:
        return MuBound(res.value[0], res.log_scales[0], res.converged[0], res.iterations)
    return res


def mu_upper_bound(M, max_iter: int = MAX_ITER) -> tuple[float, bool]:
    """Upper bound on mu of a single square matrix and its convergence flag."""
    r = mu_upper_bound_batch(np.asarray(M, dtype=complex).reshape(np.shape(M)), max_iter)
    return float(r.value), bool(r.converged)


def spectral_radius(M) -> np.ndarray:
    return np.max(np.abs(np.linalg.eigvals(np.asarray(M, dtype=complex))), axis=-1)


def sigma_max(M) -> np.ndarray:
    return np.linalg.svd(np.asarray(M, dtype=complex), compute_uv=False)[..., 0]
