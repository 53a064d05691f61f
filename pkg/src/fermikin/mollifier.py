"""Fejer-type energy mollifier and its sharp (Kronecker) limit."""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from ._pykernels import TAYLOR_SWITCH, TWO_OVER_PI


def delta1(E: float) -> float:
    """``(2/pi) sin^2(E/2) / E^2``, Taylor branch near the removable singularity."""
    E = float(E)
    if abs(E) < TAYLOR_SWITCH:
        return TWO_OVER_PI * 0.25 * (1.0 - E * E / 12.0)
    s = math.sin(0.5 * E)
    return TWO_OVER_PI * (s * s) / (E * E)


def delta_t(t: float, E: float) -> float:
    """Mollified delta ``t * delta1(t * E)``; same arithmetic as the array kernel."""
    if not t > 0:
        raise ValueError("t must be positive")
    return t * delta1(t * E)


def delta_t_array(t: float, E) -> np.ndarray:
    if not t > 0:
        raise ValueError("t must be positive")
    return kernels.delta_t_array(t, E)


def kronecker_coeff(convention: str = "consistent") -> float:
    """Weight that replaces ``delta_t / t`` at exact resonance.

    ``"consistent"`` is ``delta1(0) = 1/(2 pi)``, which makes ``Q_t / t``
    converge to the sharp operator.  ``"literal"`` is the bare constant ``2/pi``.
    """
    if convention == "consistent":
        return delta1(0.0)
    if convention == "literal":
        return TWO_OVER_PI
    raise ValueError(f"unknown kronecker convention {convention!r}")


def sharp_limit_error(x: int, y: float, lam: float, t: float, convention: str = "consistent"):
    """Deviation of ``delta_t(x + lam y)`` from ``kappa t kron(x, 0)``.

    Returns ``(deviation, (tail_term, resonance_term))`` where the structural
    terms are ``1/(x^2 t)`` for ``x != 0`` and ``lam^2 t^3 y^2`` for ``x = 0``.
    """
    if int(x) != x:
        raise ValueError("x must be an integer")
    if lam * abs(y) > 0.5:
        raise ValueError("requires lam*|y| <= 1/2")
    x = int(x)
    kappa = kronecker_coeff(convention)
    value = delta_t(t, x + lam * y)
    if x == 0:
        return abs(value - kappa * t), (0.0, lam * lam * t ** 3 * y * y)
    return abs(value), (1.0 / (x * x * t), 0.0)


def fit_sharp_limit_constant(xs, ys, lam: float, ts, convention: str = "consistent") -> dict:
    """Smallest constant ``C`` with deviation <= C * (sum of structural terms) on a grid."""
    worst = 0.0
    exact_zero = True
    for x in xs:
        for y in ys:
            for t in ts:
                dev, (a, b) = sharp_limit_error(x, y, lam, t, convention)
                bound = a + b
                if bound == 0.0:
                    exact_zero = exact_zero and dev == 0.0
                    continue
                worst = max(worst, dev / bound)
    return {"C": worst, "resonant_exact": exact_zero}


def double_time_integral(omega: float, t: float) -> float:
    """``2 Re int_0^t int_0^{t1} exp(i omega t2) dt2 dt1 = 4 sin^2(omega t/2) / omega^2``."""
    if not t > 0:
        raise ValueError("t must be positive")
    if abs(omega * t) < TAYLOR_SWITCH:
        x = omega * t
        return t * t * (1.0 - x * x / 12.0)
    s = math.sin(0.5 * omega * t)
    return 4.0 * s * s / (omega * omega)


def decay_envelope(fn, ts, period: float, samples: int = 16) -> np.ndarray:
    """``max fn(s)`` over ``s in [t, t + period]`` for each ``t``.

    Oscillating quantities such as ``delta_t(x)`` at fixed ``x`` decay along
    their envelope; fitting the pointwise values would fit the oscillation.
    """
    out = []
    for t in ts:
        grid = t + period * np.arange(samples) / samples
        out.append(max(abs(fn(float(s))) for s in grid))
    return np.array(out)


def loglog_slope(xs, ys) -> float:
    xs = np.log(np.asarray(xs, dtype=float))
    ys = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(xs, ys, 1)[0])
