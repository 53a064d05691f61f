"""Bosonized particle-hole exchange: resonance coefficients and the B operators.

``alpha^H_t(h, k)`` sums the mollified resonance over the lune
``{r : |r| <= p_F < |r + k|}``; only lune points are visited, never the
whole ball.  The sharp coefficients reduce to the lattice counting function
``N(q, k)`` of plane sections of the lune.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels, mollifier
from ._reduce import map_chunks, split_rows
from .conventions import DEFAULT, Conventions
from .lattice import LatticeContext, dispersion_many, norm2
from .potential import Potential
from .states import Distribution

KINDS = ("H", "P")


def _tuple(p) -> tuple:
    return tuple(int(c) for c in p)


def _dot(a, b) -> int:
    return sum(int(x) * int(y) for x, y in zip(a, b))


# counting


def counting_window(ctx: LatticeContext, q, k) -> bool:
    """Necessary condition ``-k^2/2 < q.k <= p_F |k|`` for ``N(q, k) > 0``."""
    qk = _dot(q, k)
    k2 = _dot(k, k)
    if 2 * qk <= -k2:
        return False
    from fractions import Fraction

    return qk <= 0 or qk * qk <= Fraction(ctx.p_F) ** 2 * k2


def _axis(k) -> int | None:
    nz = [i for i, c in enumerate(k) if c != 0]
    return nz[0] if len(nz) == 1 else None


def counting_N(ctx: LatticeContext, q, k, method: str = "auto") -> int:
    """``|{r : |r| <= p_F, |r + k| > p_F, r.k = q.k}|``.

    ``method`` is ``"auto"`` (axis fast path when ``k`` is axis aligned),
    ``"annulus"`` (force the fast path) or ``"plane"`` (plane scan).
    """
    k = _tuple(k)
    q = _tuple(q)
    if not any(k):
        raise ValueError("k must be nonzero")
    if not counting_window(ctx, q, k):
        return 0
    c = _dot(q, k)
    j = _axis(k)
    if method == "plane" or (method == "auto" and j is None):
        return kernels.plane_lune_count(k, c, ctx.pf2)
    if j is None:
        raise ValueError("annulus fast path needs an axis-aligned k")
    kj = k[j]
    if c % kj:
        return 0
    rj = c // kj
    lo2 = ctx.pf2 - (rj + kj) ** 2
    hi2 = ctx.pf2 - rj * rj
    if ctx.d == 3:
        return kernels.annulus_count(lo2, hi2)
    if ctx.d == 2:
        return _line_count(lo2, hi2)
    return int(hi2 >= 0 and lo2 < 0)


def _line_count(lo2: int, hi2: int) -> int:
    """Integers ``x`` with ``lo2 < x^2 <= hi2``."""

    def upto(m):
        return 0 if m < 0 else 2 * math.isqrt(m) + 1

    return max(0, upto(hi2) - upto(lo2)) if hi2 > lo2 else 0


def counting_ratio(ctx: LatticeContext, q, k) -> float:
    """``N(q, k) / (2 pi q.k)``, the quantity that tends to 1."""
    qk = _dot(q, k)
    return counting_N(ctx, q, k) / (2.0 * math.pi * qk)


def gauss_circle(r2: int) -> tuple[int, float]:
    """Lattice points in the disk of squared radius ``r2`` and ``E = n - pi r2``."""
    if r2 < 0:
        raise ValueError("r2 must be nonnegative")
    n = kernels.disk_count(r2)
    return n, n - math.pi * r2


@dataclass
class LuneSet:
    """``L(k) = {q : |q| <= p_F, |q + k| > p_F}``."""

    ctx: LatticeContext
    k: tuple

    def __post_init__(self):
        self.k = _tuple(self.k)
        if not any(self.k):
            raise ValueError("k must be nonzero")

    def __contains__(self, q) -> bool:
        q = _tuple(q)
        return _dot(q, q) <= self.ctx.pf2 < sum((a + b) ** 2 for a, b in zip(q, self.k))

    @cached_property
    def points(self) -> np.ndarray:
        return kernels.lune_points(self.k, self.ctx.pf2)

    @cached_property
    def cardinality(self) -> int:
        return lune_cardinality(self.ctx, self.k)


def lune_cardinality(ctx: LatticeContext, k) -> int:
    k = _tuple(k)
    if not any(k):
        raise ValueError("k must be nonzero")
    j = _axis(k)
    if ctx.d == 3 and j is not None:
        kj = k[j]
        x_max = math.isqrt(ctx.pf2)
        return sum(
            kernels.annulus_count(ctx.pf2 - (x + kj) ** 2, ctx.pf2 - x * x)
            for x in range(-x_max, x_max + 1)
        )
    return int(kernels.lune_points(k, ctx.pf2).shape[0])


# resonance coefficients


@dataclass
class AlphaCache:
    """Memo tables for one ``(ctx, pot, lam, conv)``.

    ``alpha`` depends on its anchor only through the energy offset
    ``E_q - E_{q -/+ k}``, which is the cache key together with ``(kind, k, t)``.
    """

    ctx: LatticeContext
    pot: Potential
    lam: float = 0.0
    conv: Conventions = DEFAULT
    _lunes: dict = field(default_factory=dict)
    _alpha: dict = field(default_factory=dict)
    _counts: dict = field(default_factory=dict)

    def lune(self, k: tuple):
        """Lune points with ``E_r`` and ``E_{r+k}``."""
        if k not in self._lunes:
            pts = kernels.lune_points(k, self.ctx.pf2)
            e_r = dispersion_many(self.ctx, self.pot, self.lam, pts, self.conv)
            e_rk = dispersion_many(self.ctx, self.pot, self.lam, pts + np.array(k), self.conv)
            self._lunes[k] = (pts, e_r, e_rk)
        return self._lunes[k]

    def energy(self, P) -> np.ndarray:
        return dispersion_many(self.ctx, self.pot, self.lam, P, self.conv)

    def count(self, q, k) -> int:
        key = (k, _dot(q, k))
        if key not in self._counts:
            self._counts[key] = counting_N(self.ctx, q, k)
        return self._counts[key]


def _anchor_ok(ctx: LatticeContext, kind: str, q, k) -> bool:
    q2 = _dot(q, q)
    if kind == "H":
        return q2 <= ctx.pf2 and sum((a + b) ** 2 for a, b in zip(q, k)) <= ctx.pf2
    return q2 > ctx.pf2 and sum((a - b) ** 2 for a, b in zip(q, k)) > ctx.pf2


def _partner(kind: str, q, k) -> tuple:
    return tuple(a + b for a, b in zip(q, k)) if kind == "H" else tuple(a - b for a, b in zip(q, k))


def alpha(
    ctx: LatticeContext,
    pot: Potential,
    kind: str,
    q,
    k,
    t: float,
    lam: float = 0.0,
    conv: Conventions = DEFAULT,
    cache: AlphaCache | None = None,
) -> float:
    """Mollified resonance coefficient ``alpha^H_t(h, k)`` or ``alpha^P_t(p, k)``."""
    if kind not in KINDS:
        raise ValueError("kind must be 'H' or 'P'")
    if not t > 0:
        raise ValueError("t must be positive")
    q = _tuple(q)
    k = _tuple(k)
    if not any(k) or not _anchor_ok(ctx, kind, q, k):
        return 0.0
    cache = cache or AlphaCache(ctx, pot, lam, conv)
    E = cache.energy([q, _partner(kind, q, k)])
    shift = float(E[0] - E[1])
    key = (kind, k, shift, float(t))
    if key not in cache._alpha:
        _, e_r, e_rk = cache.lune(k)
        dt = mollifier.delta_t_array(t, (shift - e_r) - e_rk)
        cache._alpha[key] = conv.measure(ctx.d) * math.fsum(dt.tolist())
    return cache._alpha[key]


def alpha_sharp(
    ctx: LatticeContext,
    kind: str,
    q,
    k,
    conv: Conventions = DEFAULT,
    cache: AlphaCache | None = None,
) -> float:
    """Resonant coefficient: measure times ``N(h, k)`` (holes) or ``N(p - k, k)``."""
    q = _tuple(q)
    k = _tuple(k)
    if not any(k) or not _anchor_ok(ctx, kind, q, k):
        return 0.0
    anchor = q if kind == "H" else _partner(kind, q, k)
    n = cache.count(anchor, k) if cache is not None else counting_N(ctx, anchor, k)
    return conv.measure(ctx.d) * n


def alpha_brute(ctx, pot, kind, q, k, t, lam=0.0, conv=DEFAULT) -> float:
    """``alpha`` by a literal scan of the box ``[-ceil(p_F), ceil(p_F)]^d``."""
    q = _tuple(q)
    k = _tuple(k)
    if not _anchor_ok(ctx, kind, q, k) or not any(k):
        return 0.0
    B = int(math.ceil(ctx.p_F))
    axis = np.arange(-B, B + 1, dtype=np.int64)
    R = np.stack([g.ravel() for g in np.meshgrid(*([axis] * ctx.d), indexing="ij")], axis=1)
    Rk = R + np.array(k)
    ind = (norm2(R) <= ctx.pf2) & (norm2(Rk) > ctx.pf2)
    E = dispersion_many(ctx, pot, lam, [q, _partner(kind, q, k)], conv)
    shift = float(E[0] - E[1])
    if t is None:
        e = dispersion_many(ctx, pot, 0.0, R[ind], conv.with_(dispersion="free"))
        ek = dispersion_many(ctx, pot, 0.0, Rk[ind], conv.with_(dispersion="free"))
        e_shift = dispersion_many(ctx, pot, 0.0, [q, _partner(kind, q, k)], conv.with_(dispersion="free"))
        res = ((e_shift[0] - e_shift[1]) - e) - ek
        return conv.measure(ctx.d) * int(np.count_nonzero(res == 0))
    e_r = dispersion_many(ctx, pot, lam, R[ind], conv)
    e_rk = dispersion_many(ctx, pot, lam, Rk[ind], conv)
    dt = mollifier.delta_t_array(t, (shift - e_r) - e_rk)
    return conv.measure(ctx.d) * math.fsum(dt.tolist())


def alpha_propagator_oracle(
    ctx: LatticeContext,
    pot: Potential,
    kind: str,
    q,
    k,
    t: float,
    lam: float = 0.0,
    conv: Conventions = DEFAULT,
) -> float:
    """``2 Re int_0^t int_0^{t1} G_k(t2) exp(i t2 (E_q - E_q')) dt2 dt1``.

    ``G_k(tau) = int chi(r) chi_perp(r+k) exp(-i tau (E_r + E_{r+k})) dr`` is
    expanded in modes and each mode integrated in closed form from the
    complex antiderivative.  Equals ``2 pi t alpha``.
    """
    q = _tuple(q)
    k = _tuple(k)
    if not any(k) or not _anchor_ok(ctx, kind, q, k):
        return 0.0
    B = int(math.ceil(ctx.p_F))
    axis = np.arange(-B, B + 1, dtype=np.int64)
    R = np.stack([g.ravel() for g in np.meshgrid(*([axis] * ctx.d), indexing="ij")], axis=1)
    Rk = R + np.array(k)
    ind = (norm2(R) <= ctx.pf2) & (norm2(Rk) > ctx.pf2)
    E = dispersion_many(ctx, pot, lam, [q, _partner(kind, q, k)], conv)
    mode_energy = dispersion_many(ctx, pot, lam, R[ind], conv) + dispersion_many(ctx, pot, lam, Rk[ind], conv)
    omega = (E[0] - E[1]) - mode_energy
    x = omega * t
    small = np.abs(x) < 1e-3
    val = np.empty_like(omega)
    # int_0^t int_0^t1 e^{i w s} ds dt1 = -(e^{i w t} - 1 - i w t) / w^2
    wb = omega[~small]
    inner = -(np.exp(1j * wb * t) - 1.0 - 1j * wb * t) / (wb * wb)
    val[~small] = 2.0 * inner.real
    xs = x[small]
    val[small] = t * t * (1.0 - xs * xs / 12.0 + xs ** 4 / 360.0)
    return conv.measure(ctx.d) * math.fsum(val.tolist())


# operators


def _b_points(ctx: LatticeContext, pot: Potential, f: Distribution, kind: str) -> np.ndarray:
    F = f.points
    S = pot.support
    if F.shape[0] == 0:
        return np.zeros((0, ctx.d), dtype=np.int64)
    shifted = (F[:, None, :] + (S if kind == "H" else -S)[None, :, :]).reshape(-1, ctx.d)
    pts = np.unique(np.concatenate([F, shifted], axis=0), axis=0)
    inside = norm2(pts) <= ctx.pf2
    return pts[inside] if kind == "H" else pts[~inside]


def _b_sector(points, kind, ctx, pot, f, t, lam, conv, cache):
    """``sum_k V(k)^2 (alpha_gain f f~ - alpha_loss f f~)`` terms per point."""
    out = []
    S = pot.support
    for q in points:
        q = _tuple(q)
        fq = f(q)
        terms = []
        for k, v in zip(S, pot.values):
            k = _tuple(k)
            if kind == "H":
                src = tuple(a - b for a, b in zip(q, k))  # h - k
                dst = tuple(a + b for a, b in zip(q, k))  # h + k
            else:
                src = tuple(a + b for a, b in zip(q, k))  # p + k
                dst = tuple(a - b for a, b in zip(q, k))  # p - k
            f_src = f(src)
            a_gain = a_loss = 0.0
            if f_src != 0.0:
                a_gain = _coef(ctx, pot, kind, src, k, t, lam, conv, cache)
            if fq != 0.0:
                a_loss = _coef(ctx, pot, kind, q, k, t, lam, conv, cache)
            terms.append((v * v) * (a_gain * f_src * (1.0 - fq) - a_loss * fq * (1.0 - f(dst))))
        out.append((q, terms))
    return out


def _coef(ctx, pot, kind, q, k, t, lam, conv, cache):
    if t is None:
        return alpha_sharp(ctx, kind, q, k, conv, cache)
    return alpha(ctx, pot, kind, q, k, t, lam, conv, cache)


def _b_prefactor(ctx: LatticeContext, t, conv: Conventions) -> float:
    pref = 2.0 * math.pi * conv.measure(ctx.d)
    if t is None:
        pref = pref * mollifier.kronecker_coeff(conv.kronecker)
    return pref


def _b_chunk(points, kind, ctx, pot, f, t, lam, conv):
    cache = AlphaCache(ctx, pot, lam, conv)
    return _b_sector(points, kind, ctx, pot, f, t, lam, conv, cache)


def boson_operator(
    ctx: LatticeContext,
    pot: Potential,
    f: Distribution,
    lam: float = 0.0,
    t: float | None = None,
    conv: Conventions = DEFAULT,
    split: bool = False,
    jobs: int = 1,
    cache: AlphaCache | None = None,
):
    """``B_t[f]`` (``t`` given) or the sharp operator (``t=None``).

    Returns ``{p: value}``; with ``split=True`` returns the hole and
    particle parts ``(B_H, B_P)`` whose supports are disjoint.
    """
    if t is not None and not t > 0:
        raise ValueError("t must be positive")
    pref = _b_prefactor(ctx, t, conv)
    parts = {}
    for kind in KINDS:
        pts = _b_points(ctx, pot, f, kind)
        if jobs > 1 and len(pts) > 1:
            chunks = [pts[s] for s in split_rows(len(pts), jobs)]
            from functools import partial

            work = partial(_b_chunk, kind=kind, ctx=ctx, pot=pot, f=f, t=t, lam=lam, conv=conv)
            rows = [r for chunk in map_chunks(work, chunks, jobs) for r in chunk]
        else:
            rows = _b_sector(pts, kind, ctx, pot, f, t, lam, conv, cache or AlphaCache(ctx, pot, lam, conv))
        parts[kind] = dict(sorted((q, pref * math.fsum(terms)) for q, terms in rows))
    if split:
        return parts["H"], parts["P"]
    return dict(sorted({**parts["H"], **parts["P"]}.items()))


def b_mollified(ctx, pot, f, lam, t, conv=DEFAULT, **kw):
    return boson_operator(ctx, pot, f, lam, t, conv, **kw)


def b_sharp(ctx, pot, f, conv=DEFAULT, require_radial: bool = True, **kw):
    if require_radial and not pot.is_radial_axis_positive():
        raise ValueError("sharp boson operator requires a rotationally symmetric, axis-positive potential")
    return boson_operator(ctx, pot, f, 0.0, None, conv, **kw)


def b_brute_oracle(ctx, pot, f, lam, t, q, conv=DEFAULT) -> float:
    """Literal definition at one momentum: ``k`` over the box ``[-r, r]^d``, brute ``alpha``."""
    q = _tuple(q)
    r = pot.radius
    pref = _b_prefactor(ctx, t, conv)
    terms = []
    import itertools

    fq = f(q)
    for k in itertools.product(range(-r, r + 1), repeat=ctx.d):
        v = pot(k)
        if v == 0.0:
            continue
        for kind in KINDS:
            if kind == "H":
                src = tuple(a - b for a, b in zip(q, k))
                dst = tuple(a + b for a, b in zip(q, k))
            else:
                src = tuple(a + b for a, b in zip(q, k))
                dst = tuple(a - b for a, b in zip(q, k))
            a_gain = alpha_brute(ctx, pot, kind, src, k, t, lam, conv)
            a_loss = alpha_brute(ctx, pot, kind, q, k, t, lam, conv)
            term = (v * v) * (a_gain * f(src) * (1.0 - fq) - a_loss * fq * (1.0 - f(dst)))
            if term != 0.0:
                terms.append(term)
    return pref * math.fsum(terms)


def sector_residuals(BH: dict, BP: dict) -> dict:
    def rel(vals):
        vals = list(vals)
        scale = math.fsum(abs(v) for v in vals)
        return abs(math.fsum(vals)) / scale if scale > 0 else 0.0

    return {"holes": rel(BH.values()), "particles": rel(BP.values())}


def b_limit_check(ctx, pot, f, lam, t, conv=DEFAULT) -> dict:
    """Measured ``||B_t[f] - t Bsharp[f]||_inf`` against its structural factor."""
    if lam * pot.l1_norm(conv) > 0.5:
        raise ValueError("requires lam * ||V||_1 <= 1/2")
    bt = boson_operator(ctx, pot, f, lam, t, conv)
    bs = boson_operator(ctx, pot, f, 0.0, None, conv)
    keys = set(bt) | set(bs)
    dev = max((abs(bt.get(p, 0.0) - t * bs.get(p, 0.0)) for p in keys), default=0.0)
    finf = float(f.vals.max()) if len(f) else 0.0
    factor = t * (1.0 / t ** 2 + (lam * t) ** 2) * ctx.N ** ((ctx.d - 1) / ctx.d) * finf
    return {"deviation": dev, "structural_factor": factor, "ratio": dev / factor if factor > 0 else 0.0}
