"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy fallback
takes over.  ``use_backend`` switches at runtime (benchmarks, cross-checks).
"""

from __future__ import annotations

from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_EXPORTS = (
    "delta_t_array",
    "disk_count",
    "annulus_count",
    "plane_lune_count",
    "lune_points",
)

_active: ModuleType = _ckernels if _ckernels is not None else _pykernels


def available_backends() -> list[str]:
    names = ["python"]
    if _ckernels is not None:
        names.insert(0, "cython")
    return names


def backend() -> str:
    return _active.BACKEND


def use_backend(name: str) -> str:
    """Activate ``"cython"`` or ``"python"``; returns the previous name."""
    global _active
    previous = _active.BACKEND
    if name == "cython":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not built")
        _active = _ckernels
    elif name == "python":
        _active = _pykernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    return previous


def delta_t_array(t, e):
    return _active.delta_t_array(float(t), e)


def disk_count(r2):
    return _active.disk_count(int(r2))


def annulus_count(lo2, hi2):
    return _active.annulus_count(int(lo2), int(hi2))


def plane_lune_count(k, c, p2):
    return _active.plane_lune_count(tuple(int(v) for v in k), int(c), int(p2))


def lune_points(k, p2):
    return _active.lune_points(tuple(int(v) for v in k), int(p2))


__all__ = list(_EXPORTS) + ["available_backends", "backend", "use_backend"]
