"""Compactly supported, even interaction potentials on ``Z^d``."""

from __future__ import annotations

import itertools
import math
from typing import Callable, Iterable, Mapping

import numpy as np

from .conventions import DEFAULT, Conventions


class PotentialError(ValueError):
    pass


class Potential:
    """Fourier coefficients ``V(k)`` on the lattice ball ``|k| <= radius``.

    Stored sparsely: ``support`` lists the nonzero ``k`` in lexicographic
    order and ``values`` the matching coefficients.  Construction enforces
    evenness, ``V(0) = 0`` and the support radius.
    """

    def __init__(self, d: int, radius: int, table: Mapping[tuple, float]):
        if d not in (1, 2, 3):
            raise PotentialError("dimension must be 1, 2 or 3")
        if int(radius) != radius or radius < 1:
            raise PotentialError("support radius must be a positive integer")
        self.d = int(d)
        self.radius = int(radius)
        clean: dict[tuple, float] = {}
        for k, v in table.items():
            k = tuple(int(c) for c in k)
            if len(k) != d:
                raise PotentialError(f"momentum {k} has wrong dimension")
            v = float(v)
            if v == 0.0:
                continue
            if not any(k):
                raise PotentialError("V(0) must vanish")
            if sum(c * c for c in k) > self.radius ** 2:
                raise PotentialError(f"{k} lies outside the support ball of radius {radius}")
            clean[k] = v
        for k, v in clean.items():
            mirror = tuple(-c for c in k)
            if clean.get(mirror, 0.0) != v:
                raise PotentialError(f"V is not even: V{k} != V{mirror}")
        keys = sorted(clean)
        self.support = np.array(keys, dtype=np.int64).reshape(len(keys), d)
        self.values = np.array([clean[k] for k in keys], dtype=np.float64)
        self._table = clean
        side = 2 * self.radius + 1
        self._grid = np.zeros((side,) * d, dtype=np.float64)
        for k, v in clean.items():
            self._grid[tuple(c + self.radius for c in k)] = v

    # construction helpers

    @classmethod
    def indicator(cls, d: int, radius: int, amplitude: float = 1.0) -> "Potential":
        """``amplitude`` on every ``k`` with ``1 <= |k| <= radius``."""
        return cls.radial(d, radius, lambda k2: amplitude)

    @classmethod
    def radial(cls, d: int, radius: int, profile: Callable[[int], float]) -> "Potential":
        """Rotationally symmetric potential, ``V(k) = profile(|k|^2)``."""
        table = {}
        for k in itertools.product(range(-radius, radius + 1), repeat=d):
            k2 = sum(c * c for c in k)
            if 0 < k2 <= radius * radius:
                table[k] = profile(k2)
        return cls(d, radius, table)

    @classmethod
    def from_dict(cls, data: Mapping) -> "Potential":
        kind = data.get("kind", "indicator")
        d = int(data["d"])
        radius = int(data["radius"])
        if kind == "indicator":
            return cls.indicator(d, radius, float(data.get("amplitude", 1.0)))
        if kind == "table":
            return cls(d, radius, {tuple(k): v for k, v in data["values"]})
        raise PotentialError(f"unknown potential kind {kind!r}")

    def to_dict(self) -> dict:
        return {
            "kind": "table",
            "d": self.d,
            "radius": self.radius,
            "values": [[list(k), v] for k, v in sorted(self._table.items())],
        }

    # queries

    def __call__(self, k: Iterable[int]) -> float:
        return self._table.get(tuple(int(c) for c in k), 0.0)

    def __len__(self) -> int:
        return len(self._table)

    def lookup(self, diffs: np.ndarray) -> np.ndarray:
        """Vectorized ``V(k)`` for an ``(n, d)`` integer array, zero off support."""
        diffs = np.asarray(diffs, dtype=np.int64).reshape(-1, self.d)
        inside = np.all(np.abs(diffs) <= self.radius, axis=1)
        out = np.zeros(diffs.shape[0], dtype=np.float64)
        idx = diffs[inside] + self.radius
        out[inside] = self._grid[tuple(idx.T)]
        return out

    def l1_norm(self, conv: Conventions = DEFAULT) -> float:
        return conv.measure(self.d) * math.fsum(abs(v) for v in self.values)

    def l2_squared(self, conv: Conventions = DEFAULT) -> float:
        return conv.measure(self.d) * math.fsum(v * v for v in self.values)

    def is_radial_axis_positive(self) -> bool:
        """Rotational symmetry plus positivity on the axis points ``(0,..,0,j)``."""
        by_radius: dict[int, set] = {}
        for k in itertools.product(range(-self.radius, self.radius + 1), repeat=self.d):
            k2 = sum(c * c for c in k)
            if 0 < k2 <= self.radius ** 2:
                by_radius.setdefault(k2, set()).add(self(k))
        if any(len(vals) > 1 for vals in by_radius.values()):
            return False
        return all(self((0,) * (self.d - 1) + (j,)) > 0 for j in range(1, self.radius + 1))

    def __repr__(self) -> str:
        return f"Potential(d={self.d}, radius={self.radius}, |supp|={len(self)})"
