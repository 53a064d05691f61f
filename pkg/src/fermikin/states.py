"""Momentum distributions, Slater delta data and the weighted norms."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .conventions import DEFAULT, Conventions
from .lattice import LatticeContext, encode, in_shell, norm2


class DistributionError(ValueError):
    pass


class SlaterError(ValueError):
    """Invalid or infeasible Slater data; ``reasons`` lists every violation."""

    def __init__(self, reasons):
        self.reasons = list(reasons)
        super().__init__("; ".join(self.reasons))


class Distribution:
    """Sparse occupation numbers ``f(p)`` in ``[0, 1]``.

    The complement ``1 - f`` is evaluated on demand and never stored.
    """

    def __init__(self, d: int, values: Mapping[tuple, float] | None = None):
        self.d = int(d)
        clean = {}
        for p, v in (values or {}).items():
            p = tuple(int(c) for c in p)
            if len(p) != self.d:
                raise DistributionError(f"momentum {p} has wrong dimension")
            v = float(v)
            if not 0.0 <= v <= 1.0:
                raise DistributionError(f"occupation {v} at {p} outside [0, 1]")
            if v != 0.0:
                clean[p] = v
        self._values = dict(sorted(clean.items()))
        keys = list(self._values)
        self.points = np.array(keys, dtype=np.int64).reshape(len(keys), self.d)
        self.vals = np.array(list(self._values.values()), dtype=np.float64)
        self._keys = encode(self.points) if keys else np.zeros(0, dtype=np.int64)
        self._order = np.argsort(self._keys)
        self._sorted_keys = self._keys[self._order]

    @classmethod
    def constant(cls, d: int, points: Iterable, c: float) -> "Distribution":
        return cls(d, {tuple(p): c for p in points})

    def __call__(self, p) -> float:
        return self._values.get(tuple(int(c) for c in p), 0.0)

    def tilde(self, p) -> float:
        return 1.0 - self(p)

    def __len__(self) -> int:
        return len(self._values)

    def __iter__(self):
        return iter(self._values.items())

    @property
    def support(self) -> list[tuple]:
        return list(self._values)

    @property
    def n(self) -> float:
        """Raw particle/hole count ``sum_p f(p)``."""
        return math.fsum(self._values.values())

    def lookup(self, P) -> np.ndarray:
        """Vectorized ``f`` for an ``(..., d)`` integer array."""
        P = np.asarray(P, dtype=np.int64)
        shape = P.shape[:-1]
        if len(self) == 0:
            return np.zeros(shape, dtype=np.float64)
        keys = encode(P).ravel()
        pos = np.searchsorted(self._sorted_keys, keys)
        pos = np.clip(pos, 0, len(self._sorted_keys) - 1)
        hit = self._sorted_keys[pos] == keys
        out = np.where(hit, self.vals[self._order[pos]], 0.0)
        return out.reshape(shape)

    def to_records(self) -> list[dict]:
        return [{"p": list(p), "value": v} for p, v in self._values.items()]

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    @classmethod
    def from_records(cls, d: int, records) -> "Distribution":
        return cls(d, {tuple(r["p"]): r["value"] for r in records})

    def __repr__(self) -> str:
        return f"Distribution(d={self.d}, |supp|={len(self)}, n={self.n:g})"


@dataclass
class SlaterData:
    H: list = field(default_factory=list)
    P: list = field(default_factory=list)
    epsilon: float = 0.2

    @property
    def n(self) -> int:
        return len(self.H)

    def to_dict(self) -> dict:
        return {
            "H": [list(h) for h in self.H],
            "P": [list(p) for p in self.P],
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SlaterData":
        return cls(
            H=[tuple(h) for h in data["H"]],
            P=[tuple(p) for p in data["P"]],
            epsilon=float(data["epsilon"]),
        )


def _component_band(ctx: LatticeContext, q, eps: float) -> bool:
    pf2 = Fraction(ctx.p_F) ** 2
    e = Fraction(eps)
    return any(e * pf2 <= c * c <= (1 - e) * pf2 for c in q)


def slater_violations(ctx: LatticeContext, data: SlaterData) -> list[str]:
    """Every way ``data`` fails the delta-support conditions; empty when valid."""
    reasons = []
    eps = data.epsilon
    if not 0 < eps < 0.5:
        reasons.append(f"epsilon {eps} outside (0, 1/2)")
    if len(data.H) != len(data.P):
        reasons.append(f"charged data: |H| = {len(data.H)} != |P| = {len(data.P)}")
    lo2, hi2 = ctx.shell_bounds(3)
    for h in data.H:
        s = sum(c * c for c in h)
        if len(h) != ctx.d:
            reasons.append(f"hole {tuple(h)} has wrong dimension")
        elif s > ctx.pf2:
            reasons.append(f"hole {tuple(h)} outside the Fermi ball")
        elif in_shell(ctx, h):
            reasons.append(f"hole {tuple(h)} inside the Fermi surface shell")
    for p in data.P:
        s = sum(c * c for c in p)
        if len(p) != ctx.d:
            reasons.append(f"particle {tuple(p)} has wrong dimension")
        elif s <= ctx.pf2:
            reasons.append(f"particle {tuple(p)} inside the Fermi ball")
        elif in_shell(ctx, p):
            reasons.append(f"particle {tuple(p)} inside the Fermi surface shell")
    pts = [tuple(q) for q in list(data.H) + list(data.P)]
    r2 = ctx.r * ctx.r
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            dist2 = sum((a - b) ** 2 for a, b in zip(pts[i], pts[j]))
            if dist2 <= r2:
                reasons.append(f"points {pts[i]} and {pts[j]} closer than r = {ctx.r}")
    if 0 < eps < 0.5:
        for q in pts:
            if not _component_band(ctx, q, eps):
                reasons.append(f"{q} has no component with eps p_F^2 <= q_i^2 <= (1-eps) p_F^2")
    return reasons


def make_slater(ctx: LatticeContext, H, P, eps: float) -> Distribution:
    """Delta data ``f = sum_{q in H u P} kron(p, q)`` after validation."""
    data = SlaterData([tuple(h) for h in H], [tuple(p) for p in P], eps)
    reasons = slater_violations(ctx, data)
    if reasons:
        raise SlaterError(reasons)
    return Distribution(ctx.d, {q: 1.0 for q in list(data.H) + list(data.P)})


def _unit(rng: np.random.Generator, d: int) -> np.ndarray:
    while True:
        v = rng.standard_normal(d)
        nv = np.linalg.norm(v)
        if nv > 1e-12:
            return v / nv


def generate_slater(
    ctx: LatticeContext,
    n: int,
    eps: float = 0.2,
    seed: int = 0,
    band: int = 3,
    aligned: bool = False,
    scaling_regime: bool = False,
    max_attempts: int = 20000,
) -> SlaterData:
    """Seeded rejection sampler for valid ``(H, P)``.

    Proposals are drawn in coordinates relative to ``p_F`` so one seed gives
    geometrically similar data across Fermi momenta.  Particles stay within
    ``band * r`` beyond the shell.  With ``aligned`` each particle shares one
    coordinate with its hole, which puts the pair on an exact free-energy
    resonance for axis transfers.
    """
    if n < 0:
        raise SlaterError(["n must be nonnegative"])
    if band < 1:
        raise SlaterError(["band must be >= 1"])
    if scaling_regime and n > ctx.N ** (1.0 / 6.0):
        raise SlaterError([f"n = {n} exceeds N^(1/6) = {ctx.N ** (1 / 6):.3f}"])
    data = SlaterData([], [], eps)
    if n == 0:
        return data
    rng = np.random.default_rng(seed)
    lo2, hi2 = ctx.shell_bounds(3)
    hole_max = math.sqrt(lo2) if lo2 > 0 else 0.0
    part_min = math.sqrt(hi2)
    part_max = ctx.p_F + (3 + band) * ctx.r
    hole_min = math.sqrt(eps) * ctx.p_F
    if hole_max <= hole_min:
        raise SlaterError(
            [f"no room for holes: need sqrt(eps) p_F = {hole_min:.3f} < p_F - 3r = {hole_max:.3f}"]
        )
    d = ctx.d
    accepted: list[tuple] = []

    def ok(q, want_hole: bool) -> bool:
        s = sum(c * c for c in q)
        if want_hole and (s > ctx.pf2 or s >= lo2):
            return False
        if not want_hole and (s <= hi2 or s > part_max ** 2):
            return False
        if not _component_band(ctx, q, eps):
            return False
        return all(sum((a - b) ** 2 for a, b in zip(q, x)) > ctx.r ** 2 for x in accepted)

    attempts = 0
    while len(data.H) < n:
        attempts += 1
        if attempts > max_attempts:
            raise SlaterError(
                [f"gave up after {max_attempts} proposals with {len(data.H)}/{n} pairs placed"]
            )
        rho = hole_min + rng.random() * (hole_max - hole_min)
        h = tuple(int(v) for v in np.rint(rho * _unit(rng, d)))
        if not ok(h, True):
            continue
        accepted.append(h)
        placed = False
        for _ in range(200):
            attempts += 1
            rad = part_min + rng.random() * (part_max - part_min)
            if aligned and d > 1:
                j = int(rng.integers(d))
                rest = rad * rad - h[j] * h[j]
                if rest <= 0:
                    continue
                u = _unit(rng, d - 1) * math.sqrt(rest)
                v = list(np.rint(u).astype(int))
                v.insert(j, h[j])
                p = tuple(int(c) for c in v)
            else:
                p = tuple(int(v) for v in np.rint(rad * _unit(rng, d)))
            if ok(p, False):
                accepted.append(p)
                data.H.append(h)
                data.P.append(p)
                placed = True
                break
        if not placed:
            accepted.pop()
    reasons = slater_violations(ctx, data)
    if reasons:
        raise SlaterError(reasons)
    return data


# norms


def weight(ctx: LatticeContext, P, m: float) -> np.ndarray:
    """``<p>^m`` on the Fermi surface shell, 1 elsewhere."""
    lo2, hi2 = ctx.shell_bounds(3)
    s = norm2(P)
    on = (s >= lo2) & (s <= hi2)
    return np.where(on, (1.0 + s.astype(np.float64)) ** (m / 2.0), 1.0)


NORM_KINDS = ("l1", "linf", "l1_m", "dual_m", "linf_off_S")


def norm(
    f,
    kind: str,
    ctx: LatticeContext,
    m: float = 6.0,
    conv: Conventions = DEFAULT,
) -> float:
    """Norms of a finitely supported function ``p -> value``.

    ``f`` is a ``Distribution`` or any mapping from momenta to reals.
    """
    if kind not in NORM_KINDS:
        raise ValueError(f"unknown norm {kind!r}")
    items = list(f) if isinstance(f, Distribution) else list(f.items())
    if not items:
        return 0.0
    P = np.array([p for p, _ in items], dtype=np.int64).reshape(len(items), ctx.d)
    v = np.abs(np.array([x for _, x in items], dtype=np.float64))
    if kind == "l1":
        return conv.measure(ctx.d) * math.fsum(v)
    if kind == "linf":
        return float(v.max())
    w = weight(ctx, P, m)
    if kind == "l1_m":
        return conv.measure(ctx.d) * math.fsum(v * w)
    if kind == "dual_m":
        return float((v / w).max())
    lo2, hi2 = ctx.shell_bounds(3)
    s = norm2(P)
    off = (s < lo2) | (s > hi2)
    return float(v[off].max()) if off.any() else 0.0
