import math

import numpy as np
import pytest
from scipy import integrate

from fermikin import mollifier as M


def test_delta1_values():
    assert M.delta1(0.0) == pytest.approx(1 / (2 * math.pi), rel=1e-15)
    assert M.delta1(math.pi) == pytest.approx((2 / math.pi) / math.pi ** 2, rel=1e-15)


def test_delta1_taylor_switch_is_continuous():
    eps = M.TAYLOR_SWITCH
    below = M.delta1(eps * (1 - 1e-9))
    s = math.sin(0.5 * eps)
    above = (2 / math.pi) * s * s / (eps * eps)
    assert below == pytest.approx(above, rel=1e-12)


def test_delta1_unit_mass():
    # integrate over [0, X] per period, then the tail: int_X^inf (2/pi) sin^2/E^2 ~ 1/(pi X)
    X = 2 * math.pi * 2000
    edges = np.arange(0, X + 1e-9, 2 * math.pi)
    half = math.fsum(integrate.quad(M.delta1, a, b, epsabs=1e-14)[0] for a, b in zip(edges[:-1], edges[1:]))
    tail = 1 / (math.pi * X)
    assert 2 * (half + tail) == pytest.approx(1.0, abs=1e-6)


def test_delta_t_examples():
    assert M.delta_t(10.0, 0.0) == pytest.approx(10 / (2 * math.pi), rel=1e-15)
    assert M.delta_t(1.0, 2 * math.pi) < 1e-32
    with pytest.raises(ValueError):
        M.delta_t(0.0, 1.0)
    with pytest.raises(ValueError):
        M.delta_t_array(-1.0, [1.0])


def test_delta_t_scaling_symmetry_and_bounds():
    rng = np.random.default_rng(0)
    for _ in range(500):
        t = float(rng.uniform(0.1, 100))
        E = float(rng.normal(scale=5))
        v = M.delta_t(t, E)
        assert v == t * M.delta1(t * E)
        assert v == M.delta_t(t, -E)
        assert 0 <= v <= (2 / math.pi) * min(t / 4, 1 / (t * E * E)) * (1 + 1e-12)


def test_array_kernel_matches_scalar():
    E = np.linspace(-20, 20, 4001)
    got = M.delta_t_array(3.3, E)
    assert all(g == M.delta_t(3.3, float(e)) for g, e in zip(got, E))


def test_kronecker_conventions():
    assert M.kronecker_coeff("consistent") == M.delta1(0.0)
    assert M.kronecker_coeff("literal") == pytest.approx(2 / math.pi)
    with pytest.raises(ValueError):
        M.kronecker_coeff("other")


def test_sharp_limit_error_examples():
    dev, terms = M.sharp_limit_error(0, 0.0, 0.3, 17.0)
    assert dev == 0.0 and terms == (0.0, 0.0)
    dev, (tail, res) = M.sharp_limit_error(3, 0.0, 0.0, 100.0)
    assert dev <= (2 / math.pi) / (100 * 9)
    assert tail == 1 / 900 and res == 0.0
    with pytest.raises(ValueError):
        M.sharp_limit_error(1, 1.0, 0.6, 1.0)
    with pytest.raises(ValueError):
        M.sharp_limit_error(1.5, 0.0, 0.0, 1.0)


def test_fitted_sharp_limit_constant_is_finite():
    fit = M.fit_sharp_limit_constant(range(0, 6), [0.0, 0.5, -1.0], 1e-4, [10.0, 100.0, 1000.0])
    assert 0 < fit["C"] < 1.0
    assert fit["resonant_exact"] is True
    exact = M.fit_sharp_limit_constant(range(1, 6), [0.0], 0.0, [10.0, 100.0])
    assert math.isfinite(exact["C"])


def test_double_time_integral_examples():
    assert M.double_time_integral(0.0, 3.0) == 9.0
    assert M.double_time_integral(2 * math.pi, 1.0) < 1e-30


@pytest.mark.parametrize("seed", range(12))
def test_double_time_integral_by_quadrature(seed):
    rng = np.random.default_rng(seed)
    omega = float(rng.uniform(-5, 5))
    t = float(rng.uniform(0.2, 4))
    re, _ = integrate.dblquad(lambda t2, t1: math.cos(omega * t2), 0, t, 0, lambda t1: t1, epsabs=1e-13, epsrel=1e-13)
    assert M.double_time_integral(omega, t) == pytest.approx(2 * re, rel=1e-10)


def test_double_time_integral_identity():
    rng = np.random.default_rng(42)
    for _ in range(100):
        omega = float(rng.normal(scale=10))
        t = float(rng.uniform(0.01, 200))
        lhs = M.double_time_integral(omega, t)
        rhs = 2 * math.pi * t * M.delta_t(t, omega)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_concentration_rate_along_envelope():
    ts = np.geomspace(10, 1e4, 12)
    for x in (1, 2, 5):
        env = M.decay_envelope(lambda s: M.delta_t(s, x), ts, 2 * math.pi / x, samples=64)
        assert M.loglog_slope(ts, env) == pytest.approx(-1.0, abs=0.05)


def test_loglog_slope():
    xs = np.array([1.0, 10.0, 100.0])
    assert M.loglog_slope(xs, 3 * xs ** -2) == pytest.approx(-2.0)
