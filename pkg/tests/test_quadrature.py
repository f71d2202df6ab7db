import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from hausdorff_bounds.errors import QuadratureFailure
from hausdorff_bounds.quadrature import (
    QuadratureSpec,
    adaptive_gl,
    ball_volume,
    integrate_log_radial,
    sphere_area,
)


def test_sphere_area_and_volume():
    assert sphere_area(1) == 2.0
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert ball_volume(3, 2.0) == pytest.approx(4 * math.pi * 8 / 3)


def test_adaptive_gl_smooth_and_kink():
    assert adaptive_gl(np.sin, 0.0, math.pi).value == pytest.approx(2.0, rel=1e-12)
    res = adaptive_gl(lambda x: np.abs(x - 0.3), 0.0, 1.0, points=[0.3])
    assert res.value == pytest.approx(0.045 + 0.245, rel=1e-12)


def test_adaptive_gl_endpoint_singularity():
    res = adaptive_gl(lambda x: x ** -0.5, 0.0, 1.0, strict=False)
    assert res.value == pytest.approx(2.0, rel=1e-3)


def test_adaptive_gl_reports_failure():
    quad = QuadratureSpec(rel_tol=1e-14, max_refinement=2)
    with pytest.raises(QuadratureFailure):
        adaptive_gl(lambda x: np.sin(1.0 / np.maximum(x, 1e-9)), 1e-3, 1.0, quad)


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.95, 3.0), st.floats(0.01, 10.0))
def test_log_radial_powers_against_oracle(s, hi):
    value = integrate_log_radial(lambda r: np.power(r, s), 0.0, hi).value
    oracle, _ = integrate.quad(lambda r: r ** s, 0.0, hi, limit=200)
    assert value == pytest.approx(oracle, rel=1e-7)


def test_log_radial_infinite_tail_extrapolated():
    value = integrate_log_radial(lambda r: 1.0 / (1.0 + r * r), 0.0, math.inf).value
    assert value == pytest.approx(math.pi / 2, rel=1e-8)


def test_log_radial_divergent_tail_is_infinite():
    value = integrate_log_radial(lambda r: np.power(r, -0.5), 1.0, math.inf, strict=False).value
    assert math.isinf(value)
