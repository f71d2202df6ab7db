import math

import numpy as np
import pytest
from scipy import integrate

from hausdorff_bounds.operators import (
    KernelSpec,
    MatrixFamily,
    OperatorSpec,
    ScalarMap,
    apply_hardy_1d,
    apply_hausdorff_1d,
    apply_operator,
    frobenius_norm,
    operator_output,
    rho_bound,
)
from hausdorff_bounds.spaces import TestFunction


def hybrid_unit(m=1, exprs=("|y|",)):
    kern = KernelSpec("hybrid_phi", support=("annulus", 0.0, 1.0))
    return OperatorSpec(m, 1, kern, [MatrixFamily.diag_scalar(e, 1) for e in exprs])


def test_frobenius_examples():
    assert frobenius_norm(np.eye(3)) == pytest.approx(math.sqrt(3))
    assert frobenius_norm(np.diag([1.0, 2.0])) == pytest.approx(math.sqrt(5))
    assert frobenius_norm([[1.0, 1.0], [0.0, 1.0]]) == pytest.approx(math.sqrt(3))


def test_rho_examples():
    k = KernelSpec()
    assert rho_bound(OperatorSpec(1, 2, k, [MatrixFamily.diag_scalar("3*|y|^2", 2)])) == 2.0
    assert rho_bound(OperatorSpec(1, 2, k, [MatrixFamily.rotation("|y|", 2)])) == 2.0
    assert rho_bound(OperatorSpec(1, 2, k, [MatrixFamily.fixed(np.diag([1.0, 2.0]))])) == pytest.approx(2.5)


def test_scalar_map_grammar():
    s = ScalarMap.parse("2*|y|^-0.5")
    assert (s.coef, s.var, s.exponent) == (2.0, "norm", -0.5)
    t = ScalarMap.parse("y1^3")
    assert t(np.array([[-2.0, 1.0]]))[0] == pytest.approx(-8.0)
    with pytest.raises(ValueError):
        ScalarMap.parse("sin(y)")


def test_apply_examples():
    # hybrid kernel phi = 1 on [0, 1] in one dimension integrates over y in [-1, 1]
    op = OperatorSpec(1, 1, KernelSpec("hybrid_phi", support=("cube", 0.0, 1.0)), [MatrixFamily.diag_scalar("t", 1)])
    assert apply_operator(op, [TestFunction.ball(1.0)], [2.0]) == pytest.approx(0.5, rel=1e-10)
    op2 = OperatorSpec(2, 1, KernelSpec("hybrid_phi", support=("cube", 0.0, 1.0)),
                       [MatrixFamily.diag_scalar("t", 1), MatrixFamily.diag_scalar("2*t", 1)])
    assert apply_operator(op2, [TestFunction.ball(1.0)] * 2, [1.0]) == pytest.approx(0.5, rel=1e-10)
    f = TestFunction.power(-0.25)
    for x in (0.3, 1.0, 7.0):
        assert apply_operator(op, [f], [x]) == pytest.approx(4 / 3 * x ** -0.25, rel=1e-10)


def test_hardy_examples():
    assert apply_hardy_1d(TestFunction.annulus(0.0, 1.0), 2.0) == pytest.approx(0.5)
    assert apply_hardy_1d(TestFunction.power(1.0, 0.0, 1.0), 1.0) == pytest.approx(0.5)
    assert apply_hardy_1d(TestFunction.power(-0.5, 1.0), 4.0) == pytest.approx(0.5, rel=1e-10)


def test_hardy_recovery():
    op = OperatorSpec(1, 1, KernelSpec("hardy_cesaro_psi"), [MatrixFamily.diag_scalar("t", 1)])
    rng = np.random.default_rng(7)
    for _ in range(30):
        f = TestFunction.sum([TestFunction.power(rng.uniform(-0.9, 1), rng.uniform(0, 1), rng.uniform(1.5, 4)),
                              TestFunction.annulus(rng.uniform(0, 1), rng.uniform(1.5, 3))])
        x = 2.0 ** rng.uniform(-2, 3)
        assert apply_operator(op, [f], [x]) == pytest.approx(apply_hardy_1d(f, x), rel=1e-9)


def test_hausdorff_1d_against_oracle():
    kern = KernelSpec("hausdorff_phi", 1.0, 0.5, ("annulus", 0.5, 3.0))
    f = TestFunction.power(-0.3, 0.2, 5.0)
    prof = f.radial_power()
    for x in (0.7, 2.0):
        oracle = integrate.quad(lambda t: t ** 0.5 / t * prof(np.array([x / t]))[0], 0.5, 3.0,
                                points=[x / 5.0, x / 0.2], limit=200)[0]
        assert apply_hausdorff_1d(kern, f, x) == pytest.approx(oracle, rel=1e-8)


def test_symbolic_and_quadrature_agree_2d_rotation():
    kern = KernelSpec("hausdorff_phi", 1.3, -0.4, ("annulus", 0.5, 2.0))
    op = OperatorSpec(2, 2, kern, [MatrixFamily.rotation("0.7*|y|", 2, "1.5*|y|^0.5"),
                                   MatrixFamily.diag_scalar("0.8*|y|^-1", 2)])
    fs = [TestFunction.power(-0.5, 0.3, 4.0), TestFunction.sum([TestFunction.power(0.4, 0.0, 2.0),
                                                                TestFunction.annulus(1.0, 3.0)])]
    prof = operator_output(op, fs)
    for r in (0.4, 1.1, 2.5):
        x = np.array([r * math.cos(0.3), r * math.sin(0.3)])
        numeric = apply_operator(op, fs, x, method="quadrature")
        assert numeric == pytest.approx(prof(np.array([r]))[0], rel=1e-7)


def test_cube_kernel_2d_against_oracle():
    kern = KernelSpec("hybrid_phi", 1.0, 0.0, ("cube", 0.0, 1.0))
    op = OperatorSpec(1, 2, kern, [MatrixFamily.diag_scalar("y1", 2)])
    f = TestFunction.power(-0.5)
    x = np.array([1.0, 0.5])
    # integrand |y1 x|^{-1/2} over the unit square
    oracle = integrate.quad(lambda t: (t * np.linalg.norm(x)) ** -0.5, 0.0, 1.0)[0]
    assert apply_operator(op, [f], x) == pytest.approx(oracle, rel=1e-6)


def test_multilinearity():
    op = hybrid_unit(2, ("|y|", "2*|y|^0.5"))
    f1, f2 = TestFunction.power(-0.3, 0.1, 3.0), TestFunction.annulus(0.2, 1.5)
    g1 = TestFunction.power(0.6, 0.0, 2.0)
    x = [1.3]
    lhs = apply_operator(op, [TestFunction.sum([f1.scale(2.0), g1.scale(-0.5)]), f2], x)
    rhs = 2.0 * apply_operator(op, [f1, f2], x) - 0.5 * apply_operator(op, [g1, f2], x)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_eigenfunction_identity():
    op = OperatorSpec(2, 2, KernelSpec("hausdorff_phi", 1.0, 0.5, ("annulus", 0.5, 2.0)),
                      [MatrixFamily.diag_scalar("|y|", 2), MatrixFamily.diag_scalar("2*|y|^-0.5", 2)])
    fs = [TestFunction.power(-0.3), TestFunction.power(0.8)]
    rng = np.random.default_rng(1)
    ks = []
    for _ in range(10):
        x = rng.normal(size=2) * 3
        r = np.linalg.norm(x)
        ks.append(apply_operator(op, fs, x) / (r ** -0.3 * r ** 0.8))
    assert np.ptp(ks) <= 1e-9 * abs(ks[0])


def test_json_round_trip():
    data = {"m": 1, "n": 1, "kernel": {"kind": "closed", "expr": "1", "support": {"cube": [0, 1]},
                                       "convention": "hybrid_phi"},
            "families": [{"kind": "diag_scalar", "expr": "y1"}]}
    op = OperatorSpec.from_json(data)
    assert OperatorSpec.from_json(op.to_json()) == op


def test_validation():
    with pytest.raises(ValueError):
        KernelSpec("hardy_cesaro_psi", support=("annulus", 0.0, 1.0))
    with pytest.raises(ValueError):
        OperatorSpec(2, 1, KernelSpec(), [MatrixFamily.diag_scalar("t", 1)])
    with pytest.raises(ValueError):
        MatrixFamily.rotation("|y|", 1)
