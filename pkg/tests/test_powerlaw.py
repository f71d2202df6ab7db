import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from hausdorff_bounds.errors import DivergentIntegral
from hausdorff_bounds.powerlaw import RadialPower, merge_terms, monomial_integral


def random_profile(rng, terms=3):
    rows = []
    for _ in range(terms):
        lo = 2.0 ** rng.uniform(-3, 0)
        hi = lo * 2.0 ** rng.uniform(0.5, 4)
        rows.append((rng.uniform(-2, 2), rng.uniform(-2, 2), lo, hi))
    return RadialPower.from_terms(rows)


def test_monomial_integral_cases():
    assert monomial_integral(1.0, 1.0, 0.0, 2.0) == pytest.approx(2.0)
    assert monomial_integral(3.0, 0.0, 1.0, math.e) == pytest.approx(3.0)
    with pytest.raises(DivergentIntegral):
        monomial_integral(1.0, -0.5, 0.0, 1.0)
    with pytest.raises(DivergentIntegral):
        monomial_integral(1.0, 0.5, 1.0, math.inf)


def test_merge_terms_cancels():
    assert merge_terms([(1.0, 2.0), (-1.0, 2.0), (3.0, 1.0)]) == ((3.0, 1.0),)


def test_evaluation_and_algebra():
    rng = np.random.default_rng(3)
    r = 2.0 ** rng.uniform(-4, 5, 200)
    for _ in range(20):
        f, g = random_profile(rng), random_profile(rng)
        assert np.allclose((f + g)(r), f(r) + g(r), rtol=1e-12, atol=1e-300)
        assert np.allclose((f * g)(r), f(r) * g(r), rtol=1e-12, atol=1e-300)
        assert np.allclose(f.dilate(1.7)(r), f(1.7 * r), rtol=1e-12, atol=1e-300)
        assert np.allclose(f.compose_monomial(0.6, -1.3)(r), f(0.6 * r ** -1.3), rtol=1e-11, atol=1e-300)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 2.0))
def test_integrate_matches_oracle(seed, s):
    f = random_profile(np.random.default_rng(seed))
    value = f.integrate(s)
    oracle = sum(integrate.quad(lambda r: f(np.array([r]))[0] * r ** s, pc.lo, pc.hi)[0] for pc in f.pieces)
    assert value == pytest.approx(oracle, rel=1e-8, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(1.0, 4.0))
def test_abs_moment_matches_oracle(seed, q):
    f = random_profile(np.random.default_rng(seed))
    value = f.abs_moment(q, 0.5)
    oracle = 0.0
    for pc in f.pieces:
        oracle += integrate.quad(lambda r: abs(f(np.array([r]))[0]) ** q * r ** 0.5, pc.lo, pc.hi, limit=200)[0]
    assert value == pytest.approx(oracle, rel=1e-7, abs=1e-12)


def test_abs_moment_infinite_ranges():
    f = RadialPower.from_terms([(1.0, -2.0, 1.0, math.inf), (2.0, -3.0, 1.0, math.inf)])
    # int_1^inf (r^-2 + 2 r^-3)^2 dr = 1/3 + 4/4 + 4/5
    assert f.abs_moment(2.0) == pytest.approx(1 / 3 + 1.0 + 4 / 5, rel=1e-9)
    assert math.isinf(RadialPower.monomial(1.0, -0.25).abs_moment(2.0))


def test_top_and_bottom():
    f = RadialPower.from_terms([(1.0, -1.0, 0.0, math.inf), (5.0, 2.0, 0.0, math.inf)])
    assert f.top() == (5.0, 2.0)
    assert f.bottom() == (1.0, -1.0)
    assert RadialPower.monomial(1.0, 0.0, 1.0, 2.0).top() is None
