import itertools
import math

import numpy as np
import pytest

from conftest import box, random_sparse
from fermikin import RAW, LatticeContext, Potential
from fermikin import collision as Q
from fermikin import lattice as L
from fermikin import mollifier
from fermikin.states import Distribution


@pytest.fixture(scope="module")
def tiny():
    return LatticeContext(3, 3.0, 1), Potential.radial(3, 1, lambda k2: 1.0)


def test_sigma_momentum_and_occupancy():
    ctx = LatticeContext(3, 3.0, 1)
    pot = Potential.indicator(3, 1)
    assert Q.sigma("HH", (0, 0, 1), (1, 0, 0), (0, 0, 0), (1, 0, 0), pot, ctx) == 0.0
    assert Q.sigma("HH", (0, 0, 3), (0, 0, 0), (0, 0, 2), (0, 0, 1), pot, ctx) != 0.0
    assert Q.sigma("HH", (0, 0, 4), (0, 0, 0), (0, 0, 3), (0, 0, 1), pot, ctx) == 0.0
    assert Q.sigma("PP", (0, 0, 5), (0, 0, 4), (0, 0, 4), (0, 0, 5), pot, ctx) == 1.0
    assert Q.sigma("HP", (0, 0, 1), (0, 0, 5), (0, 0, 0), (0, 0, 4), pot, ctx) == 2.0
    assert Q.sigma("PH", (0, 0, 5), (0, 0, 1), (0, 0, 4), (0, 0, 0), pot, ctx) == 2.0
    with pytest.raises(ValueError):
        Q.sigma("XX", (0, 0, 0), (0, 0, 0), (0, 0, 0), (0, 0, 0), pot, ctx)


def test_sigma_hh_symmetry_exhaustive():
    ctx = LatticeContext(3, 2.0, 1)
    pot = Potential.radial(3, 1, lambda k2: 1.0)
    ball = [p for p in box(3, 2) if L.chi(ctx, p)]
    nonzero = 0
    for p1, p2, p3 in itertools.product(ball, repeat=3):
        p4 = tuple(a + b - c for a, b, c in zip(p1, p2, p3))
        a = Q.sigma("HH", p1, p2, p3, p4, pot, ctx)
        assert a == Q.sigma("HH", p2, p1, p4, p3, pot, ctx)
        nonzero += a != 0.0
    assert nonzero > 0


def test_gain_loss_constant_cancels():
    for c in (0.0, 0.25, 0.5, 0.7, 1.0):
        assert Q.gain_loss(c, c, c, c) == 0.0


def test_zero_distribution(tiny):
    ctx, pot = tiny
    f = Distribution(3)
    assert Q.collision_operator(ctx, pot, f, 0.0, 5.0) == {}
    assert Q.collision_operator(ctx, pot, f) == {}
    assert Q.q_brute_oracle(ctx, pot, f, 0.0, 5.0, (0, 0, 1)) == 0.0


@pytest.mark.parametrize("c", [0.25, 0.5, 1.0])
def test_constant_on_ball_vanishes(c):
    ctx = LatticeContext(3, 3.0, 1)
    pot = Potential.indicator(3, 1)
    f = Distribution.constant(3, [p for p in box(3, 3) if L.chi(ctx, p)], c)
    for t in (3.0, None):
        vals = Q.collision_operator(ctx, pot, f, 0.02, t, RAW)
        assert all(v == 0.0 for v in vals.values())


def _oracle_points(values, extra):
    pts = list(values)[:: max(1, len(values) // 3)][:3]
    return pts + extra


@pytest.mark.parametrize("seed", [0, 1])
@pytest.mark.parametrize("t", [4.0, None])
def test_oracle_exact(tiny, seed, t):
    ctx, pot = tiny
    f = random_sparse(ctx, 5, seed, spread=1)
    lam = 0.0 if t is None else 0.01
    vals = Q.collision_operator(ctx, pot, f, lam, t, RAW)
    for p in _oracle_points(vals, [(9, 9, 9)]):
        assert vals.get(p, 0.0) == Q.q_brute_oracle(ctx, pot, f, lam, t, p, RAW)


def test_oracle_single_point_distribution(tiny):
    ctx, pot = tiny
    f = Distribution(3, {(0, 0, 3): 0.6})
    vals = Q.collision_operator(ctx, pot, f, 0.0, 2.0, RAW)
    for p in list(vals)[:2] + [(0, 0, 3)]:
        assert vals.get(p, 0.0) == Q.q_brute_oracle(ctx, pot, f, 0.0, 2.0, p, RAW)


def test_oracle_two_dimensions():
    ctx = LatticeContext(2, 4.0, 1)
    pot = Potential.indicator(2, 1)
    f = Distribution(2, {(0, 4): 0.7, (1, 4): 0.3, (0, 3): 0.9, (-1, 3): 0.5})
    for t in (3.0, None):
        vals = Q.collision_operator(ctx, pot, f, 0.0, t, RAW)
        for p in vals:
            assert vals[p] == Q.q_brute_oracle(ctx, pot, f, 0.0, t, p, RAW)


def test_oracle_cost_guard():
    ctx = LatticeContext(3, 9.0, 1)
    with pytest.raises(ValueError):
        Q.q_brute_oracle(ctx, Potential.indicator(3, 1), Distribution(3), 0.0, 1.0, (0, 0, 0))


def test_single_point_has_no_weight():
    ctx = LatticeContext(3, 6.0, 1)
    pot = Potential.indicator(3, 1)
    f = Distribution(3, {(0, 0, 7): 1.0})
    vals = Q.collision_operator(ctx, pot, f, 0.0, 2.0, RAW)
    assert all(v == 0.0 for v in vals.values())


@pytest.mark.parametrize("seed", range(6))
def test_conservation_laws(seed):
    ctx = LatticeContext(3, 8.0, 1)
    pot = Potential.radial(3, 2, lambda k2: 1.0 / k2) if seed % 2 else Potential.indicator(3, 1)
    ctx = LatticeContext(3, 8.0, pot.radius)
    f = random_sparse(ctx, 8, seed)
    for lam, t in [(0.0, 3.0), (0.05, 11.0), (0.0, None)]:
        vals = Q.collision_operator(ctx, pot, f, lam, t)
        res = Q.conservation_residuals(ctx, vals, sharp=t is None)
        assert max(res.values()) <= 1e-10, res


def test_sharp_operator_only_resonant():
    ctx = LatticeContext(3, 8.0, 1)
    pot = Potential.indicator(3, 1)
    f = random_sparse(ctx, 8, 3)
    stats = {}
    Q.collision_operator(ctx, pot, f, 0.0, None, RAW, stats=stats)
    assert stats["off_shell_skipped"] > 0
    assert stats["configurations"] >= stats["off_shell_skipped"]


def test_parallel_matches_serial():
    ctx = LatticeContext(3, 8.0, 1)
    pot = Potential.indicator(3, 1)
    f = random_sparse(ctx, 10, 9)
    serial = Q.collision_operator(ctx, pot, f, 0.01, 6.0, jobs=1)
    parallel = Q.collision_operator(ctx, pot, f, 0.01, 6.0, jobs=3)
    assert serial == parallel


def test_point_wrappers(tiny):
    ctx, pot = tiny
    f = random_sparse(ctx, 4, 2, spread=1)
    vals = Q.collision_operator(ctx, pot, f, 0.0, 3.0)
    p = next(iter(vals))
    assert Q.q_mollified(ctx, pot, f, 0.0, 3.0, p) == vals[p]
    assert Q.q_sharp(ctx, pot, f, (50, 0, 0)) == 0.0


def test_kronecker_convention_scales_sharp_operator():
    ctx = LatticeContext(3, 6.0, 1)
    pot = Potential.indicator(3, 1)
    f = Distribution(3, {(0, 0, -4): 1.0, (0, 1, -4): 0.5, (0, 0, 7): 0.8, (1, 0, 6): 0.4})
    a = Q.collision_operator(ctx, pot, f, 0.0, None, RAW)
    b = Q.collision_operator(ctx, pot, f, 0.0, None, RAW.with_(kronecker="literal"))
    ratio = mollifier.kronecker_coeff("literal") / mollifier.kronecker_coeff("consistent")
    assert a.keys() == b.keys()
    for p in a:
        assert b[p] == pytest.approx(ratio * a[p], rel=1e-14)


def test_limit_check_decays_like_inverse_time():
    ctx = LatticeContext(3, 6.0, 1)
    pot = Potential.indicator(3, 1)
    f = random_sparse(ctx, 6, 4)
    ts = np.geomspace(10, 1000, 7)
    dev = lambda s: Q.q_limit_check(ctx, pot, f, 0.0, s, RAW)["deviation"]
    env = mollifier.decay_envelope(dev, ts, 2 * math.pi, samples=16)
    assert mollifier.loglog_slope(ts, env) == pytest.approx(-1.0, abs=0.1)


def test_limit_check_quadratic_in_coupling():
    ctx = LatticeContext(3, 6.0, 1)
    pot = Potential.indicator(3, 1)
    f = random_sparse(ctx, 6, 4)
    lams = [1e-4, 1e-3, 1e-2]
    base = Q.q_limit_check(ctx, pot, f, 0.0, 50.0)["deviation"]
    grow = [Q.q_limit_check(ctx, pot, f, lam, 50.0)["deviation"] - base for lam in lams]
    for (l1, g1), (l2, g2) in zip(zip(lams, grow), zip(lams[1:], grow[1:])):
        assert abs(g2) <= abs(g1) * (l2 / l1) ** 2 * 1.01 + 1e-15


def test_limit_check_rejects_strong_coupling():
    ctx = LatticeContext(3, 6.0, 1)
    pot = Potential.indicator(3, 1)
    with pytest.raises(ValueError):
        Q.q_limit_check(ctx, pot, Distribution(3), 1.0, 2.0, RAW)
    rep = Q.q_limit_check(ctx, pot, Distribution(3), 0.0, 2.0)
    assert rep["deviation"] == 0.0 and rep["structural_factor"] == 0.0
