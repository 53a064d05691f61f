import math

import numpy as np
import pytest

from conftest import box, random_sparse
from fermikin import RAW, LatticeContext, Potential
from fermikin import bosonization as B
from fermikin import lattice as L
from fermikin import mollifier
from fermikin.states import Distribution, generate_slater, make_slater


def _admissible(ctx, rng, count, kmax=2):
    out = []
    while len(out) < count:
        k = tuple(int(c) for c in rng.integers(-kmax, kmax + 1, ctx.d))
        if not any(k):
            continue
        q = tuple(int(c) for c in rng.integers(-int(ctx.p_F) - kmax, int(ctx.p_F) + kmax + 1, ctx.d))
        kind = "H" if L.chi(ctx, q) else "P"
        if B._anchor_ok(ctx, kind, q, k):
            out.append((kind, q, k, float(rng.uniform(0.5, 60))))
    return out


def test_alpha_zero_off_anchor():
    ctx = LatticeContext(3, 5.0, 1)
    pot = Potential.indicator(3, 1)
    assert B.alpha(ctx, pot, "H", (0, 0, 5), (0, 0, 1), 3.0) == 0.0
    assert B.alpha(ctx, pot, "P", (0, 0, 6), (0, 0, 1), 3.0) == 0.0
    assert B.alpha(ctx, pot, "P", (0, 0, 7), (0, 0, 1), 3.0) > 0.0
    with pytest.raises(ValueError):
        B.alpha(ctx, pot, "X", (0, 0, 0), (0, 0, 1), 3.0)
    with pytest.raises(ValueError):
        B.alpha(ctx, pot, "H", (0, 0, 0), (0, 0, 1), 0.0)


def test_alpha_matches_brute_force_example():
    ctx = LatticeContext(3, 5.0, 1)
    pot = Potential.indicator(3, 1)
    fast = B.alpha(ctx, pot, "H", (0, 0, -3), (0, 0, 1), 50.0, 0.0)
    # literal scan of [-7, 7]^3
    terms = []
    E = lambda p: L.free_energy_e(ctx, p)
    shift = E((0, 0, -3)) - E((0, 0, -2))
    for r in box(3, 7):
        rk = (r[0], r[1], r[2] + 1)
        if L.chi(ctx, r) and not L.chi(ctx, rk):
            terms.append(mollifier.delta_t(50.0, (shift - E(r)) - E(rk)))
    assert fast == (2 * math.pi) ** -3 * math.fsum(terms)


def test_alpha_potential_free_at_zero_coupling():
    ctx = LatticeContext(3, 5.0, 2)
    a = B.alpha(ctx, Potential.indicator(3, 2), "H", (1, 0, -3), (0, 1, 1), 9.0)
    b = B.alpha(ctx, Potential.radial(3, 2, lambda k2: 3.0 / k2), "H", (1, 0, -3), (0, 1, 1), 9.0)
    assert a == b


@pytest.mark.parametrize("lam", [0.0, 0.03])
def test_alpha_matches_brute_force_random(lam):
    ctx = LatticeContext(3, 5.0, 2)
    pot = Potential.indicator(3, 2)
    rng = np.random.default_rng(3)
    for kind, q, k, t in _admissible(ctx, rng, 15):
        assert B.alpha(ctx, pot, kind, q, k, t, lam) == B.alpha_brute(ctx, pot, kind, q, k, t, lam)


def test_alpha_nonnegative_and_memoized():
    ctx = LatticeContext(3, 6.0, 1)
    pot = Potential.indicator(3, 1)
    cache = B.AlphaCache(ctx, pot)
    rng = np.random.default_rng(8)
    cases = _admissible(ctx, rng, 30, kmax=1)
    vals = [B.alpha(ctx, pot, kind, q, k, t, cache=cache) for kind, q, k, t in cases]
    assert min(vals) >= 0.0
    again = [B.alpha(ctx, pot, kind, q, k, t, cache=cache) for kind, q, k, t in cases]
    assert vals == again


def test_sharp_alpha_matches_brute_force():
    ctx = LatticeContext(3, 5.0, 1)
    pot = Potential.indicator(3, 1)
    rng = np.random.default_rng(4)
    for kind, q, k, _ in _admissible(ctx, rng, 20):
        assert B.alpha_sharp(ctx, kind, q, k) == B.alpha_brute(ctx, pot, kind, q, k, None)


def test_propagator_identity():
    ctx = LatticeContext(3, 8.0, 1)
    pot = Potential.indicator(3, 1)
    rng = np.random.default_rng(11)
    for kind, q, k, t in _admissible(ctx, rng, 20):
        lam = float(rng.choice([0.0, 0.02]))
        a = B.alpha(ctx, pot, kind, q, k, t, lam)
        o = B.alpha_propagator_oracle(ctx, pot, kind, q, k, t, lam)
        assert o == pytest.approx(2 * math.pi * t * a, rel=1e-10)


def test_propagator_small_time_scaling():
    ctx = LatticeContext(3, 5.0, 1)
    pot = Potential.indicator(3, 1)
    modes = B.LuneSet(ctx, (0, 0, 1)).cardinality
    t = 1e-5
    o = B.alpha_propagator_oracle(ctx, pot, "H", (0, 0, -3), (0, 0, 1), t, 0.0, RAW)
    assert o == pytest.approx(t * t * modes, rel=1e-6)
    assert B.alpha_propagator_oracle(ctx, pot, "H", (0, 0, 5), (0, 0, 1), 1.0) == 0.0


def test_counting_examples():
    ctx = LatticeContext(3, 5.0, 1)
    want = sum(1 for x, y in box(2, 5) if 9 < x * x + y * y <= 16)
    assert B.counting_N(ctx, (0, 0, 3), (0, 0, 1)) == want == 20
    assert B.counting_N(ctx, (0, 0, 6), (0, 0, 1)) == 0
    assert not B.counting_window(ctx, (0, 0, 6), (0, 0, 1))
    with pytest.raises(ValueError):
        B.counting_N(ctx, (0, 0, 1), (0, 0, 0))


def test_counting_brute_force_general_k():
    ctx = LatticeContext(3, 4.5, 1)
    pts = box(3, 5)
    for k in [(0, 0, 1), (1, 1, 0), (1, -1, 2), (0, 2, 0), (2, 1, 1)]:
        lune = [r for r in pts if L.chi(ctx, r) and not L.chi(ctx, np.add(r, k))]
        for q in box(3, 3)[::7]:
            c = sum(a * b for a, b in zip(q, k))
            want = sum(1 for r in lune if sum(a * b for a, b in zip(r, k)) == c)
            assert B.counting_N(ctx, q, k) == want


def test_counting_fast_path_matches_plane_scan():
    rng = np.random.default_rng(2)
    for pf in (7.5, 20.0, 40.0):
        ctx = LatticeContext(3, pf, 1)
        for mag in (1, 2, 3):
            for axis in range(3):
                for sign in (1, -1):
                    k = [0, 0, 0]
                    k[axis] = sign * mag
                    for _ in range(50):
                        q = tuple(int(c) for c in rng.integers(-int(pf) - 3, int(pf) + 4, 3))
                        fast = B.counting_N(ctx, q, k, method="annulus")
                        assert fast == B.counting_N(ctx, q, k, method="plane")


def test_counting_fast_path_requires_axis():
    with pytest.raises(ValueError):
        B.counting_N(LatticeContext(3, 5.0, 1), (0, 0, 0), (1, 1, 0), method="annulus")


def test_counting_low_dimensions():
    for d in (1, 2):
        ctx = LatticeContext(d, 6.3, 1)
        k = (0,) * (d - 1) + (1,)
        pts = box(d, 8)
        for q in pts:
            c = q[-1]
            want = sum(1 for r in pts if L.chi(ctx, r) and not L.chi(ctx, np.add(r, k)) and r[-1] == c)
            assert B.counting_N(ctx, q, k) == want


def test_counting_asymptotic_band():
    ctx = LatticeContext(3, 200.0, 1)
    ratio = B.counting_ratio(ctx, (0, 0, 100), (0, 0, 1))
    assert 0.85 <= ratio <= 1.15


def test_gauss_circle_examples():
    assert B.gauss_circle(0) == (1, 1.0)
    assert B.gauss_circle(25)[0] == 81
    with pytest.raises(ValueError):
        B.gauss_circle(-1)


def test_gauss_circle_brute_force():
    for r in (0, 1, 2, 3, 7, 13, 20):
        want = sum(1 for x, y in box(2, r) if x * x + y * y <= r * r)
        n, rem = B.gauss_circle(r * r)
        assert n == want and rem == pytest.approx(want - math.pi * r * r)


def test_lune_cardinality():
    ctx = LatticeContext(3, 5.0, 1)
    assert B.lune_cardinality(ctx, (0, 0, 11)) == ctx.N
    want = sum(1 for r in box(3, 5) if L.chi(ctx, r) and not L.chi(ctx, (r[0], r[1], r[2] + 1)))
    assert B.lune_cardinality(ctx, (0, 0, 1)) == want
    assert B.lune_cardinality(ctx, (1, 1, 0)) == B.LuneSet(ctx, (1, 1, 0)).points.shape[0]
    lune = B.LuneSet(ctx, (0, 0, 1))
    assert (0, 0, 5) in lune and (0, 0, 4) not in lune
    with pytest.raises(ValueError):
        B.LuneSet(ctx, (0, 0, 0))


@pytest.mark.parametrize("pf", [20.0, 50.0, 100.0])
def test_lune_cardinality_band(pf):
    ctx = LatticeContext(3, pf, 1)
    ratio = B.lune_cardinality(ctx, (0, 0, 1)) / pf ** 2
    assert math.pi - 1 <= ratio <= math.pi + 1


def test_boson_operator_zero():
    ctx = LatticeContext(3, 5.0, 1)
    pot = Potential.indicator(3, 1)
    assert B.b_mollified(ctx, pot, Distribution(3), 0.0, 3.0) == {}
    assert B.b_sharp(ctx, pot, Distribution(3)) == {}


def test_boson_operator_filled_ball_vanishes():
    ctx = LatticeContext(3, 4.0, 1)
    pot = Potential.indicator(3, 1)
    # every hole state occupied: f(h) f~(h + k) = 0 whenever h + k is a hole
    f = Distribution.constant(3, [p for p in box(3, 4) if L.chi(ctx, p)], 1.0)
    for t in (3.0, None):
        vals = B.boson_operator(ctx, pot, f, 0.0, t)
        assert all(v == 0.0 for v in vals.values())


@pytest.mark.parametrize("t", [7.0, None])
def test_boson_operator_matches_oracle(t):
    ctx = LatticeContext(3, 5.0, 1)
    pot = Potential.indicator(3, 1)
    f = random_sparse(ctx, 6, 5, spread=1)
    lam = 0.0 if t is None else 0.02
    vals = B.boson_operator(ctx, pot, f, lam, t, RAW)
    for p in list(vals)[::3] + [(0, 0, 0)]:
        assert vals.get(p, 0.0) == B.b_brute_oracle(ctx, pot, f, lam, t, p, RAW)


@pytest.mark.parametrize("seed", range(5))
def test_sector_sums_vanish(seed):
    ctx = LatticeContext(3, 10.0, 1)
    pot = Potential.radial(3, 2, lambda k2: 1.0 / k2)
    ctx = LatticeContext(3, 10.0, 2)
    f = random_sparse(ctx, 8, seed)
    for t in (4.0, None):
        BH, BP = B.boson_operator(ctx, pot, f, 0.01 if t else 0.0, t, split=True)
        assert not set(BH) & set(BP)
        res = B.sector_residuals(BH, BP)
        assert max(res.values()) <= 1e-10


def test_parallel_matches_serial():
    ctx = LatticeContext(3, 10.0, 1)
    pot = Potential.indicator(3, 1)
    f = random_sparse(ctx, 8, 1)
    assert B.b_mollified(ctx, pot, f, 0.0, 5.0, jobs=1) == B.b_mollified(ctx, pot, f, 0.0, 5.0, jobs=2)


def test_sharp_requires_radial_potential():
    ctx = LatticeContext(3, 5.0, 1)
    pot = Potential(3, 1, {(0, 0, 1): 1.0, (0, 0, -1): 1.0})
    with pytest.raises(ValueError):
        B.b_sharp(ctx, pot, Distribution(3, {(0, 0, 4): 1.0}))
    B.b_sharp(ctx, pot, Distribution(3, {(0, 0, 4): 1.0}), require_radial=False)


def test_sharp_on_slater_data_is_pure_loss():
    ctx = LatticeContext(3, 20.0, 2)
    pot = Potential.indicator(3, 2)
    data = generate_slater(ctx, 3, 0.2, seed=1)
    f = make_slater(ctx, data.H, data.P, data.epsilon)
    vals = B.b_sharp(ctx, pot, f, RAW)
    kappa = mollifier.kronecker_coeff("consistent")
    for p in data.P:
        terms = [-(v * v) * B.counting_N(ctx, np.subtract(p, k), k) for k, v in zip(pot.support, pot.values)]
        assert vals[p] == pytest.approx(2 * math.pi * kappa * math.fsum(terms), rel=1e-14)
        assert vals[p] < 0
    for h in data.H:
        terms = [-(v * v) * B.counting_N(ctx, h, k) for k, v in zip(pot.support, pot.values)]
        assert vals[h] == pytest.approx(2 * math.pi * kappa * math.fsum(terms), rel=1e-14)


def test_limit_check_structure():
    ctx = LatticeContext(3, 8.0, 1)
    pot = Potential.indicator(3, 1)
    f = random_sparse(ctx, 5, 0)
    rep = B.b_limit_check(ctx, pot, f, 0.0, 20.0)
    assert rep["deviation"] >= 0 and rep["structural_factor"] > 0
    with pytest.raises(ValueError):
        B.b_limit_check(ctx, pot, f, 1e4, 20.0)
