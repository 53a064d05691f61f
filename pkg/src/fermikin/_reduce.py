"""Exactly rounded scatter-reductions and the worker pool helper."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .lattice import decode


def scatter_fsum(keys: np.ndarray, vals: np.ndarray, d: int, prefactor: float) -> dict:
    """Group ``vals`` by ``keys`` and reduce each group with ``math.fsum``.

    ``fsum`` is correctly rounded, so the result does not depend on the
    order in which contributions were produced.  Output is sorted by point.
    """
    if keys.size == 0:
        return {}
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    vals = vals[order]
    cuts = np.flatnonzero(np.diff(keys)) + 1
    starts = np.concatenate([[0], cuts])
    ends = np.concatenate([cuts, [keys.size]])
    pts = decode(keys[starts], d)
    out = {}
    for p, a, b in zip(pts, starts, ends):
        out[tuple(int(c) for c in p)] = prefactor * math.fsum(vals[a:b].tolist())
    return dict(sorted(out.items()))


def default_jobs() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def map_chunks(fn, chunks, jobs: int = 1):
    """``[fn(c) for c in chunks]``, optionally on a process pool."""
    chunks = list(chunks)
    if jobs <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, chunks))


def split_rows(n: int, jobs: int) -> list[slice]:
    if n == 0:
        return []
    parts = max(1, min(jobs, n))
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
