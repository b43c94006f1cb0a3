"""Condition-checked inversion for the small dense Fisher matrices."""
from __future__ import annotations

import numpy as np

from .constants import SINGULAR_COND
from .errors import SingularMatrixError


def _equilibrate(mat: np.ndarray) -> np.ndarray:
    d = np.sqrt(np.abs(np.diag(mat)))
    if np.any(d == 0):
        raise SingularMatrixError("zero on the diagonal")
    return 1.0 / d


def condition_number(mat, equilibrate: bool = False) -> float:
    """2-norm condition number, optionally after symmetric diagonal scaling.

    Scaling matters when rows carry different physical units (amplitude,
    seconds, hertz); without it the raw condition number reflects units only.
    """
    mat = np.asarray(mat, dtype=float)
    if equilibrate:
        try:
            s = _equilibrate(mat)
        except SingularMatrixError:
            return np.inf
        mat = mat * np.outer(s, s)
    if not np.all(np.isfinite(mat)):
        return np.inf
    return float(np.linalg.cond(mat))


def checked_inv(mat, equilibrate: bool = False, max_cond: float = SINGULAR_COND) -> np.ndarray:
    """Inverse via pivoted LU; raises :class:`SingularMatrixError` past ``max_cond``."""
    mat = np.asarray(mat, dtype=float)
    if equilibrate:
        s = _equilibrate(mat)
        scaled = mat * np.outer(s, s)
    else:
        s = None
        scaled = mat
    cond = condition_number(scaled)
    if not cond <= max_cond:
        raise SingularMatrixError(f"condition number {cond:.3g} exceeds {max_cond:.0e}")
    inv = np.linalg.inv(scaled)
    return inv * np.outer(s, s) if s is not None else inv


def inv_sym2(mats):
    """Batched inverse of symmetric 2x2 matrices plus their condition numbers.

    ``mats`` has shape ``(..., 2, 2)``. Returns ``(trace_of_inverse, cond)``;
    the trace is ``inf`` where the condition number exceeds :data:`SINGULAR_COND`.
    """
    mats = np.asarray(mats, dtype=float)
    a = mats[..., 0, 0]
    b = 0.5 * (mats[..., 0, 1] + mats[..., 1, 0])
    d = mats[..., 1, 1]
    half_tr = 0.5 * (a + d)
    disc = np.hypot(0.5 * (a - d), b)
    lam_max = half_tr + disc
    # smaller eigenvalue via det/lam_max avoids cancellation
    det = a * d - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_min = np.where(lam_max > 0, det / lam_max, 0.0)
        cond = np.where(lam_min > 0, lam_max / lam_min, np.inf)
        trace_inv = np.where(cond <= SINGULAR_COND, (a + d) / det, np.inf)
    return trace_inv, cond


def trace_inv_rank_sum(weights, gx, gy):
    """Tr(E^-1) and cond(E) for E = sum_j w_j g_j g_j^T with unit vectors g_j.

    Arrays have shape ``(m, ...)``. By Cauchy-Binet, det E is a sum of
    nonnegative terms w_j w_l (g_j x g_l)^2, so it carries no cancellation
    even when E is badly conditioned. Zero weights drop out.
    """
    w = np.asarray(weights, dtype=float)
    gx = np.asarray(gx, dtype=float)
    gy = np.asarray(gy, dtype=float)
    total = w.sum(axis=0)
    det = np.zeros_like(total)
    for j in range(w.shape[0]):
        for k in range(j + 1, w.shape[0]):
            cross = gx[j] * gy[k] - gy[j] * gx[k]
            det = det + w[j] * w[k] * cross * cross
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_max = 0.5 * total + np.sqrt(np.maximum(0.25 * total * total - det, 0.0))
        lam_min = np.where(lam_max > 0, det / lam_max, 0.0)
        cond = np.where(lam_min > 0, lam_max / lam_min, np.inf)
        trace_inv = np.where(cond <= SINGULAR_COND, total / det, np.inf)
    return trace_inv, cond
