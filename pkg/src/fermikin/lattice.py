"""Momentum lattice geometry around the Fermi ball.

Momenta are integer tuples (single points) or ``(n, d)`` int64 arrays
(batches).  Every membership test reduces to exact integer comparisons of
``|p|^2`` against integer thresholds derived once from ``p_F``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import kernels
from .conventions import DEFAULT, Conventions
from .potential import Potential

_OFFSET = 1 << 20
_SHIFT = 21


@dataclass(frozen=True)
class LatticeContext:
    """Torus of side ``2 pi`` with dual lattice ``Z^d``.

    ``p_F`` is the Fermi momentum and ``r`` the support radius of the
    potential, which sets the width of the Fermi surface shells.
    """

    d: int = 3
    p_F: float = 10.0
    r: int = 1

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError("d must be 1, 2 or 3")
        if not self.p_F > 0:
            raise ValueError("p_F must be positive")
        if int(self.r) != self.r or self.r < 1:
            raise ValueError("shell width r must be a positive integer")

    @property
    def L(self) -> float:
        return 2.0 * math.pi

    @property
    def volume(self) -> float:
        return self.L ** self.d

    @cached_property
    def pf2(self) -> int:
        """``floor(p_F^2)``; ``|p| <= p_F`` iff ``|p|^2 <= pf2`` for integer ``p``."""
        return math.floor(Fraction(self.p_F) ** 2)

    @cached_property
    def N(self) -> int:
        return fermi_count(self)

    @property
    def R(self) -> float:
        return self.volume * self.p_F ** (self.d - 1)

    def shell_bounds(self, n: int = 3) -> tuple[int, int]:
        """Integer bounds ``(lo2, hi2)`` with ``p in S(n)`` iff ``lo2 <= |p|^2 <= hi2``."""
        if n < 1:
            raise ValueError("shell multiplier must be >= 1")
        lo = Fraction(self.p_F) - n * self.r
        hi = Fraction(self.p_F) + n * self.r
        lo2 = 0 if lo <= 0 else math.ceil(lo * lo)
        return lo2, math.floor(hi * hi)

    def to_dict(self) -> dict:
        return {"d": self.d, "p_F": self.p_F, "r": self.r}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeContext":
        return cls(d=int(data["d"]), p_F=float(data["p_F"]), r=int(data["r"]))

    @classmethod
    def from_json(cls, text: str) -> "LatticeContext":
        return cls.from_dict(json.loads(text))


# batch helpers


def as_points(P, d: int) -> np.ndarray:
    return np.asarray(P, dtype=np.int64).reshape(-1, d)


def norm2(P) -> np.ndarray:
    P = np.asarray(P, dtype=np.int64)
    return (P * P).sum(axis=-1)


def encode(P) -> np.ndarray:
    """Injective int64 key per point; coordinates must satisfy ``|c| < 2^20``."""
    P = np.asarray(P, dtype=np.int64)
    keys = np.zeros(P.shape[:-1], dtype=np.int64)
    for i in range(P.shape[-1]):
        keys |= (P[..., i] + _OFFSET) << (_SHIFT * i)
    return keys


def decode(keys, d: int) -> np.ndarray:
    keys = np.asarray(keys, dtype=np.int64)
    mask = (1 << _SHIFT) - 1
    return np.stack([((keys >> (_SHIFT * i)) & mask) - _OFFSET for i in range(d)], axis=-1)


# indicators


def chi(ctx: LatticeContext, p) -> int:
    """1 iff ``|p| <= p_F`` (closed Fermi ball)."""
    return int(sum(int(c) * int(c) for c in p) <= ctx.pf2)


def chi_perp(ctx: LatticeContext, p) -> int:
    return 1 - chi(ctx, p)


def chi_many(ctx: LatticeContext, P) -> np.ndarray:
    return (norm2(P) <= ctx.pf2).astype(np.int64)


def in_shell(ctx: LatticeContext, p, n: int = 3) -> int:
    """1 iff ``p_F - n r <= |p| <= p_F + n r``."""
    lo2, hi2 = ctx.shell_bounds(n)
    s = sum(int(c) * int(c) for c in p)
    return int(lo2 <= s <= hi2)


def in_shell_many(ctx: LatticeContext, P, n: int = 3) -> np.ndarray:
    lo2, hi2 = ctx.shell_bounds(n)
    s = norm2(P)
    return ((s >= lo2) & (s <= hi2)).astype(np.int64)


def fermi_count(ctx: LatticeContext) -> int:
    """Exact number of lattice points in the closed Fermi ball."""
    p2 = ctx.pf2
    if ctx.d == 1:
        return 2 * math.isqrt(p2) + 1
    if ctx.d == 2:
        return kernels.disk_count(p2)
    z_max = math.isqrt(p2)
    return kernels.disk_count(p2) + 2 * sum(
        kernels.disk_count(p2 - z * z) for z in range(1, z_max + 1)
    )


# dispersion


def convolve_with_chi_many(
    ctx: LatticeContext,
    pot: Potential,
    P,
    side: str = "inside",
    conv: Conventions = DEFAULT,
) -> np.ndarray:
    """``(V * chi)(p)`` or ``(V * chi_perp)(p)`` for a batch of momenta.

    Only ``k`` in the support of ``V`` are visited; accumulation follows the
    lexicographic order of ``pot.support``.
    """
    if side not in ("inside", "outside"):
        raise ValueError("side must be 'inside' or 'outside'")
    P = as_points(P, ctx.d)
    acc = np.zeros(P.shape[0], dtype=np.float64)
    for k, v in zip(pot.support, pot.values):
        ind = norm2(P - k) <= ctx.pf2
        if side == "outside":
            ind = ~ind
        acc = acc + v * ind
    return conv.measure(ctx.d) * acc


def convolve_with_chi(ctx, pot, p, side="inside", conv=DEFAULT) -> float:
    return float(convolve_with_chi_many(ctx, pot, [p], side, conv)[0])


def free_energy_many(ctx: LatticeContext, P) -> np.ndarray:
    """Signed free dispersion ``e(p) = (chi_perp - chi) p^2 / 2``."""
    return 0.5 * doubled_free_energy_many(ctx, P)


def doubled_free_energy_many(ctx: LatticeContext, P) -> np.ndarray:
    """``2 e(p)`` as exact integers."""
    s = norm2(as_points(P, ctx.d))
    return np.where(s <= ctx.pf2, -s, s)


def free_energy_e(ctx: LatticeContext, p) -> float:
    return float(free_energy_many(ctx, [p])[0])


def dispersion_many(
    ctx: LatticeContext,
    pot: Potential,
    lam: float,
    P,
    conv: Conventions = DEFAULT,
) -> np.ndarray:
    """Particle/hole dispersion ``E_p`` including the mean-field correction.

    Negative on the Fermi ball.  With ``conv.dispersion == "free"`` the
    correction is dropped and ``e(p)`` is returned.
    """
    if lam < 0:
        raise ValueError("coupling must be nonnegative")
    P = as_points(P, ctx.d)
    s = norm2(P).astype(np.float64)
    inside = norm2(P) <= ctx.pf2
    if conv.dispersion == "free" or lam == 0:
        return np.where(inside, -(s / 2), s / 2)
    c_out = convolve_with_chi_many(ctx, pot, P, "outside", conv)
    c_in = convolve_with_chi_many(ctx, pot, P, "inside", conv)
    return np.where(inside, -(s / 2 + lam / 2 * c_out), s / 2 - lam / 2 * c_in)


def dispersion_E(ctx, pot, lam, p, conv=DEFAULT) -> float:
    return float(dispersion_many(ctx, pot, lam, [p], conv)[0])
