"""Quantum Boltzmann collision operator with hole/particle channels.

The optimized evaluator enumerates only configurations whose gain or loss
product can be nonzero: two slots must lie in ``supp f`` and the kernel
restricts one momentum transfer to ``supp V``.  The bracket delta
``[d(p-p1) + d(p-p2) - d(p-p3) - d(p-p4)]`` is resolved by scattering each
configuration weight to its four momenta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from . import mollifier
from ._reduce import map_chunks, scatter_fsum, split_rows
from .conventions import DEFAULT, Conventions
from .lattice import (
    LatticeContext,
    as_points,
    dispersion_many,
    doubled_free_energy_many,
    encode,
    norm2,
)
from .potential import Potential
from .states import Distribution

CHANNELS = ("HH", "PP", "HP", "PH")
_CHANNEL_CODE = {name: i for i, name in enumerate(CHANNELS)}

# slot signs of the momentum constraint
_SIGNATURE = {
    "HH": (1, 1, -1, -1),
    "PP": (1, 1, -1, -1),
    "HP": (1, -1, -1, 1),
    "PH": (1, -1, -1, 1),
}
# 1 = Fermi ball, 0 = complement, per slot
_OCCUPANCY = {
    "HH": (1, 1, 1, 1),
    "PP": (0, 0, 0, 0),
    "HP": (1, 0, 1, 0),
    "PH": (0, 1, 0, 1),
}
BRACKET = (1, 1, -1, -1)


@dataclass(frozen=True)
class CollisionChannel:
    tag: str

    @property
    def signature(self):
        return _SIGNATURE[self.tag]

    @property
    def occupancy(self):
        return _OCCUPANCY[self.tag]


def sigma(channel: str, p1, p2, p3, p4, pot: Potential, ctx: LatticeContext) -> float:
    """Channel kernel with the momentum delta as a raw Kronecker test."""
    if channel not in _SIGNATURE:
        raise ValueError(f"unknown channel {channel!r}")
    quad = [tuple(int(c) for c in p) for p in (p1, p2, p3, p4)]
    sig = _SIGNATURE[channel]
    total = tuple(sum(s * q[i] for s, q in zip(sig, quad)) for i in range(ctx.d))
    if any(total):
        return 0.0
    for want, q in zip(_OCCUPANCY[channel], quad):
        if (sum(c * c for c in q) <= ctx.pf2) != bool(want):
            return 0.0
    d13 = tuple(a - b for a, b in zip(quad[0], quad[2]))
    if channel in ("HH", "PP"):
        d14 = tuple(a - b for a, b in zip(quad[0], quad[3]))
        diff = pot(d14) - pot(d13)
        return diff * diff
    v = pot(d13)
    return 2.0 * (v * v)


def _kernel_values(chan: np.ndarray, quads: np.ndarray, pot: Potential) -> np.ndarray:
    v13 = pot.lookup(quads[:, 0] - quads[:, 2])
    v14 = pot.lookup(quads[:, 0] - quads[:, 3])
    diff = v14 - v13
    return np.where(chan <= 1, diff * diff, 2.0 * (v13 * v13))


def gain_loss(f1, f2, f3, f4):
    """``f3 f4 (1-f1)(1-f2) - f1 f2 (1-f3)(1-f4)``, fixed evaluation order."""
    return f3 * f4 * (1.0 - f1) * (1.0 - f2) - f1 * f2 * (1.0 - f3) * (1.0 - f4)


def configurations(ctx: LatticeContext, pot: Potential, f: Distribution):
    """Channel codes and quadruples ``(M, 4, d)`` that can carry weight.

    Sorted and deduplicated, so the configuration list is canonical.
    """
    d = ctx.d
    F = f.points
    S = pot.support
    if F.shape[0] == 0 or S.shape[0] == 0:
        return np.zeros(0, dtype=np.int64), np.zeros((0, 4, d), dtype=np.int64)
    a = F[:, None, None, :]
    b = F[None, :, None, :]
    k = S[None, None, :, :]
    shape = (F.shape[0], F.shape[0], S.shape[0], d)
    A = np.broadcast_to(a, shape)
    Bv = np.broadcast_to(b, shape)

    def quad(p1, p2, p3, p4):
        return np.stack([np.broadcast_to(x, shape) for x in (p1, p2, p3, p4)], axis=-2).reshape(-1, 4, d)

    # p1 + p2 = p3 + p4
    sum_type = [
        quad(A + k, Bv - k, A, Bv),  # gain, p1 - p3 = k
        quad(Bv + k, A - k, A, Bv),  # gain, p1 - p4 = k
        quad(A, Bv, A - k, Bv + k),  # loss, p1 - p3 = k
        quad(A, Bv, Bv + k, A - k),  # loss, p1 - p4 = k
    ]
    # p1 - p2 - p3 + p4 = 0
    diff_type = [
        quad(A + k, Bv + k, A, Bv),  # gain, p1 - p3 = k
        quad(A, Bv, A - k, Bv - k),  # loss
    ]
    pieces_c = []
    pieces_q = []
    for quads in sum_type:
        inside = norm2(quads) <= ctx.pf2
        hh = inside.all(axis=1)
        pp = (~inside).all(axis=1)
        pieces_q += [quads[hh], quads[pp]]
        pieces_c += [np.full(hh.sum(), 0), np.full(pp.sum(), 1)]
    for quads in diff_type:
        inside = norm2(quads) <= ctx.pf2
        hp = inside[:, 0] & ~inside[:, 1] & inside[:, 2] & ~inside[:, 3]
        ph = ~inside[:, 0] & inside[:, 1] & ~inside[:, 2] & inside[:, 3]
        pieces_q += [quads[hp], quads[ph]]
        pieces_c += [np.full(hp.sum(), 2), np.full(ph.sum(), 3)]
    chan = np.concatenate(pieces_c).astype(np.int64)
    quads = np.concatenate(pieces_q, axis=0)
    if chan.size == 0:
        return chan, quads
    rows = np.concatenate([chan[:, None], quads.reshape(-1, 4 * d)], axis=1)
    rows = np.unique(rows, axis=0)
    return rows[:, 0].copy(), rows[:, 1:].reshape(-1, 4, d)


def _terms(chunk, ctx, pot, f, lam, t, conv):
    """Per-configuration weights (without the global prefactor)."""
    chan, quads = chunk
    d = ctx.d
    kern = _kernel_values(chan, quads, pot)
    fv = f.lookup(quads)
    gl = gain_loss(fv[:, 0], fv[:, 1], fv[:, 2], fv[:, 3])
    if t is None:
        e2 = doubled_free_energy_many(ctx, quads.reshape(-1, d)).reshape(-1, 4)
        resonant = (e2[:, 0] + e2[:, 1] - e2[:, 2] - e2[:, 3]) == 0
        return kern * gl, resonant
    E = dispersion_many(ctx, pot, lam, quads.reshape(-1, d), conv).reshape(-1, 4)
    dE = E[:, 0] + E[:, 1] - E[:, 2] - E[:, 3]
    return kern * mollifier.delta_t_array(t, dE) * gl, np.ones(chan.size, dtype=bool)


def _prefactor(ctx: LatticeContext, t, conv: Conventions) -> float:
    mu = conv.measure(ctx.d)
    pref = math.pi * mu * mu
    if t is None:
        pref = pref * mollifier.kronecker_coeff(conv.kronecker)
    return pref


def collision_operator(
    ctx: LatticeContext,
    pot: Potential,
    f: Distribution,
    lam: float = 0.0,
    t: float | None = None,
    conv: Conventions = DEFAULT,
    jobs: int = 1,
    stats: dict | None = None,
) -> dict:
    """``Q_t[f]`` (``t`` given) or the sharp operator (``t=None``) on its support.

    Returns ``{p: value}`` for every momentum touched by a weighted
    configuration; all other momenta carry zero.
    """
    if t is not None and not t > 0:
        raise ValueError("t must be positive")
    chan, quads = configurations(ctx, pot, f)
    if stats is not None:
        stats["configurations"] = int(chan.size)
    if chan.size == 0:
        if stats is not None:
            stats["off_shell_skipped"] = 0
        return {}
    work = partial(_terms, ctx=ctx, pot=pot, f=f, lam=lam, t=t, conv=conv)
    parts = map_chunks(work, [(chan[s], quads[s]) for s in split_rows(chan.size, jobs)], jobs)
    w = np.concatenate([p[0] for p in parts])
    keep = np.concatenate([p[1] for p in parts])
    if stats is not None:
        stats["off_shell_skipped"] = int((~keep).sum())
    w = w[keep]
    quads = quads[keep]
    keys = encode(quads).T.ravel()  # slot-major: all p1, all p2, ...
    vals = np.concatenate([w, w, -w, -w])
    return scatter_fsum(keys, vals, ctx.d, _prefactor(ctx, t, conv))


def q_mollified(ctx, pot, f, lam, t, p, conv=DEFAULT) -> float:
    return collision_operator(ctx, pot, f, lam, t, conv).get(tuple(int(c) for c in p), 0.0)


def q_sharp(ctx, pot, f, p, conv=DEFAULT) -> float:
    return collision_operator(ctx, pot, f, 0.0, None, conv).get(tuple(int(c) for c in p), 0.0)


# brute force


ORACLE_MAX_PF = 8


def q_brute_oracle(
    ctx: LatticeContext,
    pot: Potential,
    f: Distribution,
    lam: float,
    t: float | None,
    p,
    conv: Conventions = DEFAULT,
) -> float:
    """Literal definition at one momentum: every slot, every channel, full box.

    The bracket delta fixes one slot to ``p``, two more slots range over the
    whole box ``[-B, B]^d`` and the momentum constraint determines the last.
    """
    if ctx.p_F > ORACLE_MAX_PF:
        raise ValueError(f"brute-force oracle refuses p_F > {ORACLE_MAX_PF}")
    d = ctx.d
    p = np.array([int(c) for c in p], dtype=np.int64)
    reach = max([int(math.ceil(ctx.p_F))] + [int(np.abs(q).max()) for q in f.points])
    B = reach + pot.radius
    axis = np.arange(-B, B + 1, dtype=np.int64)
    X = np.stack([g.ravel() for g in np.meshgrid(*([axis] * d), indexing="ij")], axis=1)
    M = X.shape[0]
    x_in = norm2(X) <= ctx.pf2
    p_in = bool(norm2(p[None, :])[0] <= ctx.pf2)
    terms = []
    for slot in range(4):
        others = [s for s in range(4) if s != slot]
        free_a, free_b, solved = others
        for family in ("sum", "diff"):
            sig = _SIGNATURE["HH" if family == "sum" else "HP"]
            for lo in range(0, M, 64):
                xa = X[lo:lo + 64]
                acc = sig[free_a] * xa[:, None, :] + sig[free_b] * X[None, :, :] + sig[slot] * p
                solved_pts = -sig[solved] * acc
                in_box = np.all(np.abs(solved_pts) <= B, axis=2)
                solved_in = norm2(solved_pts) <= ctx.pf2
                for tag in (("HH", "PP") if family == "sum" else ("HP", "PH")):
                    occ = _OCCUPANCY[tag]
                    if p_in != bool(occ[slot]):
                        continue
                    ok = (
                        in_box
                        & (x_in[lo:lo + 64, None] == bool(occ[free_a]))
                        & (x_in[None, :] == bool(occ[free_b]))
                        & (solved_in == bool(occ[solved]))
                    )
                    ia, ib = np.nonzero(ok)
                    if ia.size == 0:
                        continue
                    qs = np.empty((ia.size, 4, d), dtype=np.int64)
                    qs[:, slot] = p
                    qs[:, free_a] = xa[ia]
                    qs[:, free_b] = X[ib]
                    qs[:, solved] = solved_pts[ia, ib]
                    code = np.full(qs.shape[0], _CHANNEL_CODE[tag])
                    kern = _kernel_values(code, qs, pot)
                    fv = f.lookup(qs)
                    gl = gain_loss(fv[:, 0], fv[:, 1], fv[:, 2], fv[:, 3])
                    live = (kern != 0) & (gl != 0)
                    if not live.any():
                        continue
                    qs, kern, gl = qs[live], kern[live], gl[live]
                    if t is None:
                        e2 = doubled_free_energy_many(ctx, qs.reshape(-1, d)).reshape(-1, 4)
                        res = (e2[:, 0] + e2[:, 1] - e2[:, 2] - e2[:, 3]) == 0
                        w = (kern * gl)[res]
                    else:
                        E = dispersion_many(ctx, pot, lam, qs.reshape(-1, d), conv).reshape(-1, 4)
                        dE = E[:, 0] + E[:, 1] - E[:, 2] - E[:, 3]
                        w = kern * mollifier.delta_t_array(t, dE) * gl
                    terms.append(BRACKET[slot] * w)
    flat = np.concatenate(terms).tolist() if terms else []
    return _prefactor(ctx, t, conv) * math.fsum(flat)


# diagnostics


def sup_norm(values: dict) -> float:
    return max((abs(v) for v in values.values()), default=0.0)


def q_limit_check(
    ctx: LatticeContext,
    pot: Potential,
    f: Distribution,
    lam: float,
    t: float,
    conv: Conventions = DEFAULT,
) -> dict:
    """Measured ``||Q_t[f] - t Qsharp[f]||_inf`` against its structural factor."""
    if lam * pot.l1_norm(conv) > 0.5:
        raise ValueError("requires lam * ||V||_1 <= 1/2")
    qt = collision_operator(ctx, pot, f, lam, t, conv)
    qs = collision_operator(ctx, pot, f, 0.0, None, conv)
    keys = set(qt) | set(qs)
    dev = max((abs(qt.get(p, 0.0) - t * qs.get(p, 0.0)) for p in keys), default=0.0)
    fv = f.vals
    ftilde_sup = 1.0 if len(f) == 0 else max(1.0, float((1.0 - fv).max()))
    f1 = conv.measure(ctx.d) * math.fsum(np.abs(fv).tolist())
    finf = float(np.abs(fv).max()) if len(f) else 0.0
    factor = t * (1.0 / t ** 2 + (lam * t) ** 2) * ftilde_sup ** 2 * f1 * finf
    return {
        "deviation": dev,
        "structural_factor": factor,
        "ratio": dev / factor if factor > 0 else 0.0,
    }


def conservation_residuals(ctx: LatticeContext, values: dict, sharp: bool = False) -> dict:
    """Number, sector, signed momentum and (sharp) signed energy balances.

    Each residual is the absolute sum divided by the matching sum of
    absolute values (0 when the operator vanishes).
    """
    if not values:
        zero = {"number": 0.0, "ball": 0.0, "complement": 0.0, "momentum": 0.0}
        if sharp:
            zero["energy"] = 0.0
        return zero
    P = np.array(list(values), dtype=np.int64)
    v = np.array(list(values.values()))
    inside = norm2(P) <= ctx.pf2
    sign = np.where(inside, -1.0, 1.0)

    def rel(x):
        x = np.asarray(x, dtype=float)
        scale = math.fsum(np.abs(x).tolist())
        return abs(math.fsum(x.tolist())) / scale if scale > 0 else 0.0

    out = {
        "number": rel(v),
        "ball": rel(v[inside]),
        "complement": rel(v[~inside]),
        "momentum": max(rel(sign * P[:, i] * v) for i in range(ctx.d)),
    }
    if sharp:
        out["energy"] = rel(0.5 * doubled_free_energy_many(ctx, P) * v)
    return out
