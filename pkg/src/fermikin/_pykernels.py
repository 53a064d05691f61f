"""Pure numpy implementations of the hot kernels.

Same signatures and same floating point operation order as ``_ckernels``;
used whenever the compiled extension is unavailable.
"""

from __future__ import annotations

import math

import numpy as np

TWO_OVER_PI = 2.0 / math.pi
TAYLOR_SWITCH = 1e-4

BACKEND = "python"


def delta_t_array(t, e):
    """Mollified delta ``t * delta_1(t * e)`` evaluated elementwise."""
    z = t * np.asarray(e, dtype=np.float64)
    out = np.empty_like(z)
    small = np.abs(z) < TAYLOR_SWITCH
    zs = z[small]
    out[small] = TWO_OVER_PI * 0.25 * (1.0 - zs * zs / 12.0)
    zb = z[~small]
    s = np.sin(0.5 * zb)
    out[~small] = TWO_OVER_PI * (s * s) / (zb * zb)
    return t * out


def disk_count(r2):
    """Number of ``x`` in ``Z^2`` with ``|x|^2 <= r2`` (``r2`` an integer)."""
    r2 = int(r2)
    if r2 < 0:
        return 0
    x_max = math.isqrt(r2)
    x = np.arange(1, x_max + 1, dtype=np.int64)
    rows = 2 * np.array([math.isqrt(v) for v in (r2 - x * x).tolist()], dtype=np.int64) + 1
    return int(2 * math.isqrt(r2) + 1 + 2 * rows.sum())


def annulus_count(lo2, hi2):
    """Number of ``x`` in ``Z^2`` with ``lo2 < |x|^2 <= hi2``."""
    if hi2 <= lo2:
        return 0
    return disk_count(hi2) - disk_count(lo2)


def _ball_rows(d, p2):
    """All ``y`` in ``Z^(d-1)`` (d >= 2) with ``|y|^2 <= p2``, lexicographic."""
    x_max = math.isqrt(p2)
    axis = np.arange(-x_max, x_max + 1, dtype=np.int64)
    grids = np.meshgrid(*([axis] * (d - 1)), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return pts[(pts * pts).sum(axis=1) <= p2]


def plane_lune_count(k, c, p2):
    """Count ``r`` with ``|r|^2 <= p2``, ``|r + k|^2 > p2`` and ``r . k = c``."""
    k = np.asarray(k, dtype=np.int64)
    d = k.size
    j = int(np.argmax(np.abs(k)))
    kj = int(k[j])
    if kj == 0:
        raise ValueError("k must be nonzero")
    if d == 1:
        if c % kj:
            return 0
        r = c // kj
        return int(r * r <= p2 and (r + kj) ** 2 > p2)
    others = [i for i in range(d) if i != j]
    y = _ball_rows(d, p2)
    rem = c - y @ k[others]
    ok = rem % kj == 0
    y = y[ok]
    rj = rem[ok] // kj
    sq = (y * y).sum(axis=1) + rj * rj
    shifted = ((y + k[others]) ** 2).sum(axis=1) + (rj + kj) ** 2
    return int(np.count_nonzero((sq <= p2) & (shifted > p2)))


def lune_points(k, p2):
    """Lattice points ``r`` with ``|r|^2 <= p2 < |r + k|^2``, lexicographic."""
    k = np.asarray(k, dtype=np.int64)
    d = k.size
    x_max = math.isqrt(p2)
    chunks = []
    axis = np.arange(-x_max, x_max + 1, dtype=np.int64)
    for x0 in range(-x_max, x_max + 1):
        rest = p2 - x0 * x0
        if d == 1:
            pts = np.array([[x0]], dtype=np.int64)
        else:
            y_max = math.isqrt(rest)
            sub = axis[(axis >= -y_max) & (axis <= y_max)]
            grids = np.meshgrid(*([sub] * (d - 1)), indexing="ij")
            ys = np.stack([g.ravel() for g in grids], axis=1)
            pts = np.concatenate([np.full((ys.shape[0], 1), x0, dtype=np.int64), ys], axis=1)
        sq = (pts * pts).sum(axis=1)
        shifted = ((pts + k) ** 2).sum(axis=1)
        chunks.append(pts[(sq <= p2) & (shifted > p2)])
    if not chunks:
        return np.zeros((0, d), dtype=np.int64)
    return np.concatenate(chunks, axis=0)
