import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from hausdorff_bounds.errors import DIVERGENT, OutOfRangeWarning
from hausdorff_bounds.spaces import DEFAULT_RANGE, SpaceSpec, TestFunction, annulus_norm, space_norm
from hausdorff_bounds.weights import Weight

W0 = Weight.power(0.0, 1)


def herz(alpha, p, q, beta=0.0, gamma=0.0, n=1):
    return SpaceSpec.herz(alpha, p, q, Weight.power(beta, n), Weight.power(gamma, n))


def morrey(q, lam, beta=0.0, gamma=0.0, n=1):
    return SpaceSpec.central_morrey(q, lam, Weight.power(beta, n), Weight.power(gamma, n))


def morrey_herz(alpha, lam, p, q, beta=0.0, gamma=0.0, n=1):
    return SpaceSpec.morrey_herz(alpha, lam, p, q, Weight.power(beta, n), Weight.power(gamma, n))


def test_annulus_norm_examples():
    assert annulus_norm(TestFunction.annulus(0.5, 1.0), 0, 2.0, W0) == pytest.approx(1.0, rel=1e-12)
    assert annulus_norm(TestFunction.power(-0.5), 0, 2.0, W0) == pytest.approx(math.sqrt(2 * math.log(2)), rel=1e-12)
    assert annulus_norm(TestFunction.ball(1.0), 3, 3.0, Weight.power(0.7, 1)) == 0.0


def test_annulus_norm_oracle_2d():
    f = TestFunction.sum([TestFunction.power(0.3, 0.2, 3.0), TestFunction.power(-1.2, 0.0, 1.5, coef=2.0)])
    k, q, gamma = 1, 2.5, 0.4
    prof = f.radial_power()
    oracle, _ = integrate.quad(lambda r: abs(prof(np.array([r]))[0]) ** q * r ** (gamma + 1), 1.0, 2.0,
                               points=[1.5], limit=200)
    expected = (2 * math.pi * oracle) ** (1 / q)
    assert annulus_norm(f, k, q, Weight.power(gamma, 2)) == pytest.approx(expected, rel=1e-9)


def test_space_norm_examples():
    assert space_norm(herz(0.0, 2.0, 2.0), TestFunction.annulus(0.5, 1.0)) == pytest.approx(1.0, rel=1e-12)
    assert space_norm(morrey(2.0, -0.25), TestFunction.power(-0.25)) == pytest.approx(2 ** 0.75, rel=1e-10)


def test_lambda_zero_morrey_herz_is_herz():
    f = TestFunction.sum([TestFunction.power(-0.7, 0.1, 9.0), TestFunction.annulus(0.5, 2.0)])
    for alpha, p, q in [(0.3, 2.0, 2.0), (-0.2, 1.5, 3.0)]:
        assert space_norm(morrey_herz(alpha, 0.0, p, q), f) == space_norm(herz(alpha, p, q), f)


def test_herz_oracle_truncated_power():
    # independent shell-by-shell sum with scipy
    a, r0, r1, alpha, p, q, beta, gamma = -0.4, 0.3, 6.0, 0.25, 1.5, 2.0, 0.5, -0.3
    f = TestFunction.power(a, r0, r1)
    total = 0.0
    for k in range(-3, 4):
        lo, hi = max(2.0 ** (k - 1), r0), min(2.0 ** k, r1)
        if hi <= lo:
            continue
        shell = 2 * integrate.quad(lambda r: r ** (a * q + gamma), lo, hi)[0]
        vb = 2 * 2.0 ** (k * (1 + beta)) / (1 + beta)
        total += vb ** (alpha * p) * shell ** (p / q)
    expected = total ** (1 / p)
    assert space_norm(herz(alpha, p, q, beta, gamma), f) == pytest.approx(expected, rel=1e-9)


def test_herz_divergence_decided_by_exponents():
    # |x|^a with no cutoff has constant Herz shells when alpha + a + 1/q = 0 (n = 1)
    assert space_norm(herz(0.0, 2.0, 2.0), TestFunction.power(-0.5)) is DIVERGENT
    assert space_norm(herz(0.0, 2.0, 2.0), TestFunction.power(-0.6, 1.0)) < math.inf


def test_morrey_oracle_truncated_power():
    a, r0, r1, q, lam = 0.5, 1.0, 3.0, 2.0, -0.3
    f = TestFunction.power(a, r0, r1)

    def quotient(R):
        mass = 2 * integrate.quad(lambda r: r ** (a * q), r0, min(max(R, r0), r1))[0] if R > r0 else 0.0
        return (2 * R) ** -(lam + 1 / q) * mass ** (1 / q)

    radii = np.exp(np.linspace(math.log(r0), math.log(r1) + 1.0, 4001))
    oracle = max(quotient(R) for R in radii)
    value = space_norm(morrey(q, lam), f)
    assert value >= oracle * (1 - 1e-9)
    assert value == pytest.approx(oracle, rel=1e-5)


def test_morrey_ratio_constant_for_matched_power():
    beta, gamma, lam, q, n = 0.4, -0.2, -0.2, 2.5, 2
    a = ((beta + n) * (lam * q + 1) - gamma - n) / q
    f = TestFunction.power(a)
    spec = morrey(q, lam, beta, gamma, n)
    area = 2 * math.pi
    expected = (area / (a * q + gamma + n)) ** (1 / q) / (area / (n + beta)) ** (lam + 1 / q)
    assert space_norm(spec, f) == pytest.approx(expected, rel=1e-9)


def test_herz_truncation_consistency():
    f = TestFunction.sum([TestFunction.power(-0.8, 0.5), TestFunction.power(0.5, 0.0, 2.0)])
    spec = herz(0.1, 2.0, 2.0)
    a = space_norm(spec, f)
    b = space_norm(spec, f, DEFAULT_RANGE.widened(10))
    assert a == pytest.approx(b, rel=1e-6)


def test_homogeneity_and_zero():
    f = TestFunction.power(-0.3, 0.5, 4.0)
    for spec in (herz(0.2, 2.0, 3.0), morrey(2.0, -0.2), morrey_herz(0.1, 0.3, 2.0, 2.0)):
        base = space_norm(spec, f)
        assert space_norm(spec, f.scale(-3.5)) == pytest.approx(3.5 * base, rel=1e-10)
        assert space_norm(spec, TestFunction.scaled(0.0, f)) == 0.0


def test_dilation_law_lebesgue():
    f = TestFunction.sum([TestFunction.power(-0.3, 0.5, 4.0), TestFunction.annulus(1.0, 2.0)])
    n, gamma, q = 2, 0.7, 3.0
    spec = SpaceSpec.lebesgue(q, Weight.power(gamma, n))
    for delta in (0.25, 1.7, 9.0):
        assert space_norm(spec, f.dilate(delta)) == pytest.approx(delta ** (-(n + gamma) / q) * space_norm(spec, f),
                                                                   rel=1e-10)


def test_validation():
    with pytest.raises(ValueError):
        morrey(2.0, -0.5)
    with pytest.raises(ValueError):
        morrey_herz(0.0, -0.1, 2.0, 2.0)
    with pytest.warns(OutOfRangeWarning):
        herz(0.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        TestFunction.power(1.0, 2.0, 1.0)


def test_json_round_trip():
    f = TestFunction.sum([TestFunction.power(-0.25, 0.0, math.inf, coef=2.0), TestFunction.ball(3.0),
                          TestFunction.scaled(-1.5, TestFunction.annulus(0.5, 1.0))])
    data = f.to_json()
    assert data["terms"][0]["r1"] == "inf"
    g = TestFunction.from_json(data)
    r = np.linspace(0.01, 5, 50)
    assert np.array_equal(f.radial_values(r), g.radial_values(r))


def test_opaque_function_matches_symbolic():
    f = TestFunction.power(-0.3, 0.5, 4.0)
    g = TestFunction.opaque(lambda r: f.radial_values(r), radial=True)
    spec = herz(0.2, 2.0, 2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert space_norm(spec, g) == pytest.approx(space_norm(spec, f), rel=1e-6)
