"""One-shot leading-order expansion, the first-collision-time regime and reports."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from . import bosonization, collision, mollifier, states
from .conventions import DEFAULT, Conventions
from .lattice import LatticeContext, in_shell
from .potential import Potential
from .states import Distribution

REPORT_SCHEMA = "fermikin.report/1"


@dataclass(frozen=True)
class ScalingRegime:
    """``lam = N^-(3/2 + d1)``, ``t = N^(1/6 + d2) T`` with ``0 < d2 <= d1/2``."""

    N: int
    delta1: float = 0.1
    delta2: float = 0.05
    T: float = 1.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        if not 0 < self.delta1:
            raise ValueError("delta1 must be positive")
        if not 0 < self.delta2 <= self.delta1 / 2:
            raise ValueError("need 0 < delta2 <= delta1 / 2")
        if not self.N ** (-self.delta / 2) <= self.T <= 1.0:
            raise ValueError(f"T must lie in [N^(-delta/2), 1] = [{self.N ** (-self.delta / 2):.4g}, 1]")

    @classmethod
    def for_context(cls, ctx: LatticeContext, delta1=0.1, delta2=0.05, T=1.0) -> "ScalingRegime":
        return cls(ctx.N, delta1, delta2, T)

    @property
    def delta(self) -> float:
        return self.delta1 / 2

    @property
    def lam(self) -> float:
        return self.N ** -(1.5 + self.delta1)

    @property
    def t(self) -> float:
        return self.N ** (1.0 / 6.0 + self.delta2) * self.T

    @property
    def eps_scale(self) -> float:
        return self.N ** -(1.0 / 6.0 + self.delta2)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(lam=self.lam, t=self.t, eps_scale=self.eps_scale)
        return d


@dataclass
class StepResult:
    """Updated occupations with the out-of-range values listed, never clamped."""

    values: dict
    change: dict
    excursions: list = field(default_factory=list)

    def total_change(self) -> float:
        return math.fsum(self.change.values())


def _combine(f0: Distribution, parts, factor: float) -> StepResult:
    change = {}
    for part in parts:
        for p, v in part.items():
            change[p] = change.get(p, 0.0) + v
    change = {p: factor * v for p, v in sorted(change.items())}
    keys = sorted(set(change) | set(f0.support))
    values = {p: f0(p) + change.get(p, 0.0) for p in keys}
    excursions = [(p, v) for p, v in values.items() if not 0.0 <= v <= 1.0]
    return StepResult(values, change, excursions)


def leading_order_step(
    ctx: LatticeContext,
    pot: Potential,
    f0: Distribution,
    lam: float,
    t: float,
    conv: Conventions = DEFAULT,
    jobs: int = 1,
) -> StepResult:
    """``f_t = f_0 + lam^2 t (B_t[f_0] + Q_t[f_0])``."""
    if not t > 0:
        raise ValueError("t must be positive")
    if lam == 0.0 or len(f0) == 0:
        return _combine(f0, [], 0.0)
    B = bosonization.boson_operator(ctx, pot, f0, lam, t, conv, jobs=jobs)
    Q = collision.collision_operator(ctx, pot, f0, lam, t, conv, jobs=jobs)
    return _combine(f0, [B, Q], lam * lam * t)


def rem2_budget(N: float, delta: float, m: float, C: float = 1.0) -> float:
    return C * N ** (1.0 / 3.0) * (N ** -delta + N ** (-(m - 5.0) / 3.0))


def expansion_remainder_budget(
    ctx: LatticeContext, lam: float, t: float, n: float, m: float, C: float = 1.0
) -> float:
    """``C t exp(C lam R <t>) (lam R^2 (R^1/2 + n^2) <t> + R^3 / p_F^m)``."""
    if lam < 0 or t <= 0 or n < 0 or m <= 0 or C <= 0:
        raise ValueError("inputs must be positive")
    R = ctx.R
    bracket = math.sqrt(1.0 + t * t)
    return C * t * math.exp(C * lam * R * bracket) * (
        lam * R * R * (math.sqrt(R) + n * n) * bracket + R ** 3 / ctx.p_F ** m
    )


def _off_shell_sup(ctx: LatticeContext, values: dict) -> float:
    return max((abs(v) for p, v in values.items() if not in_shell(ctx, p)), default=0.0)


def _signed_residuals(ctx: LatticeContext, values: dict) -> dict:
    if not values:
        return {"number": 0.0, "momentum": 0.0, "energy": 0.0}
    res = collision.conservation_residuals(ctx, values, sharp=True)
    return {key: res[key] for key in ("number", "momentum", "energy")}


def first_collision_step(
    regime: ScalingRegime,
    ctx: LatticeContext,
    pot: Potential,
    f0: Distribution,
    m: float = 6.0,
    C: float = 1.0,
    conv: Conventions = DEFAULT,
    mollified: bool = False,
):
    """``f_0 + (lam / eps)^2 T^2 (Bsharp[f_0] + Qsharp[f_0])`` with a report.

    ``mollified=True`` additionally evaluates ``f_0 + lam^2 t (B_t + Q_t)`` at
    ``t = T / eps`` and reports the deviation from the sharp update.
    """
    if ctx.d != 3:
        raise ValueError("the first-collision-time regime is three dimensional")
    if not m > 5:
        raise ValueError("requires m > 5")
    if regime.N != ctx.N:
        raise ValueError(f"regime N = {regime.N} does not match the lattice N = {ctx.N}")
    Bs = bosonization.b_sharp(ctx, pot, f0, conv)
    Qs = collision.collision_operator(ctx, pot, f0, 0.0, None, conv)
    factor = (regime.lam / regime.eps_scale) ** 2 * regime.T ** 2
    step = _combine(f0, [Bs, Qs], factor)
    report = {
        "B_sharp_off_S": _off_shell_sup(ctx, Bs),
        "Q_sharp_off_S": _off_shell_sup(ctx, Qs),
        "rem2_budget": rem2_budget(ctx.N, regime.delta, m, C),
        "prefactor": factor,
        "excursions": len(step.excursions),
        # the boson part shifts occupation by k within each sector, so only
        # number is conserved there; momentum and energy hold for the collision part
        "residuals": _signed_residuals(ctx, step.change),
        "Q_residuals": _signed_residuals(ctx, Qs),
        "B_residuals": bosonization.sector_residuals(
            *bosonization.boson_operator(ctx, pot, f0, 0.0, None, conv, split=True)
        ),
    }
    if mollified:
        moll = leading_order_step(ctx, pot, f0, regime.lam, regime.t, conv)
        keys = set(moll.values) | set(step.values)
        report["mollified_deviation"] = max(
            (abs(moll.values.get(p, 0.0) - step.values.get(p, 0.0)) for p in keys), default=0.0
        )
    return step, report


@dataclass
class ExperimentReport:
    meta: dict
    lattice: dict
    regime: dict
    metrics: dict
    schema: str = REPORT_SCHEMA

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "meta": self.meta,
            "lattice": self.lattice,
            "regime": self.regime,
            "metrics": self.metrics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def loss_only(ctx: LatticeContext, pot: Potential, f0: Distribution, values: dict, conv=DEFAULT) -> bool:
    """``Bsharp[f](q)`` equals its loss sum exactly at every ``q`` in the support of delta data."""
    kappa = mollifier.kronecker_coeff(conv.kronecker)
    pref = 2.0 * math.pi * conv.measure(ctx.d) * kappa
    for q, fq in f0:
        inside = sum(c * c for c in q) <= ctx.pf2
        kind = "H" if inside else "P"
        terms = []
        for k, v in zip(pot.support, pot.values):
            k = tuple(int(c) for c in k)
            sgn = 1 if inside else -1
            src = tuple(a - sgn * b for a, b in zip(q, k))
            dst = tuple(a + sgn * b for a, b in zip(q, k))
            if f0(src) != 0.0:
                return False
            a = bosonization.alpha_sharp(ctx, kind, q, k, conv)
            terms.append((v * v) * -(a * fq * (1.0 - f0(dst))))
        if values.get(q, 0.0) != pref * math.fsum(terms):
            return False
    return True


def dominance_report(
    ctx: LatticeContext,
    pot: Potential,
    f0: Distribution,
    regime: ScalingRegime,
    m: float = 6.0,
    C: float = 1.0,
    conv: Conventions = DEFAULT,
    meta: dict | None = None,
) -> ExperimentReport:
    """Norms, operator magnitudes, conservation residuals and remainder budgets."""
    Bs = bosonization.b_sharp(ctx, pot, f0, conv)
    Qs = collision.collision_operator(ctx, pot, f0, 0.0, None, conv)
    # pair count: total hole occupation, equal to the particle total for neutral data
    n = math.fsum(v for q, v in f0 if sum(c * c for c in q) <= ctx.pf2)
    norms = {kind: states.norm(f0, kind, ctx, m, conv) for kind in states.NORM_KINDS}
    b_norm = _off_shell_sup(ctx, Bs)
    q_norm = _off_shell_sup(ctx, Qs)
    rem2 = rem2_budget(ctx.N, regime.delta, m, C)
    metrics = {
        "n": n,
        "l1_raw": f0.n,
        "N": ctx.N,
        "norms": norms,
        "B_sharp_off_S": b_norm,
        "Q_sharp_off_S": q_norm,
        "Q_sharp_sup": collision.sup_norm(Qs),
        "Q_sup_over_n": collision.sup_norm(Qs) / n if n else 0.0,
        "B_over_N13": b_norm / ctx.N ** (1.0 / 3.0),
        "rem2_budget": rem2,
        "expansion_budget": expansion_remainder_budget(ctx, regime.lam, regime.t, n, m, C),
        "dominance": b_norm / (q_norm + rem2),
        "loss_only": loss_only(ctx, pot, f0, Bs, conv),
        "Q_residuals": collision.conservation_residuals(ctx, Qs, sharp=True) if Qs else {},
        "B_residuals": bosonization.sector_residuals(
            *bosonization.boson_operator(ctx, pot, f0, 0.0, None, conv, split=True)
        ),
    }
    return ExperimentReport(
        meta=dict(meta or {}),
        lattice=ctx.to_dict(),
        regime=regime.to_dict(),
        metrics=metrics,
    )


def dominance_sweep(
    p_fs,
    pot: Potential,
    n: int = 2,
    r: int | None = None,
    eps: float = 0.2,
    seed: int = 0,
    delta1: float = 0.1,
    delta2: float = 0.05,
    T: float = 1.0,
    m: float = 6.0,
    C: float = 1.0,
    conv: Conventions = DEFAULT,
    aligned: bool = False,
) -> dict:
    """Reports along a Fermi-momentum sweep plus the fitted ``log B`` vs ``log N`` slope."""
    r = pot.radius if r is None else r
    rows = []
    for p_F in p_fs:
        ctx = LatticeContext(3, float(p_F), r)
        data = states.generate_slater(ctx, n, eps, seed, aligned=aligned)
        f0 = states.make_slater(ctx, data.H, data.P, eps)
        regime = ScalingRegime.for_context(ctx, delta1, delta2, T)
        rows.append(dominance_report(ctx, pot, f0, regime, m, C, conv))
    Ns = [row.metrics["N"] for row in rows]
    Bn = [row.metrics["B_sharp_off_S"] for row in rows]
    slope = mollifier.loglog_slope(Ns, Bn) if len(rows) > 1 and min(Bn) > 0 else float("nan")
    return {"rows": rows, "B_slope": slope}
