"""Acceptance criteria 1-7, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are written
straight to the terminal.
"""

import math
import re
import subprocess
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from hausdorff_bounds.constants import TheoremParams, compute_constant, compute_muckenhoupt_constant
from hausdorff_bounds.errors import BranchAmbiguity
from hausdorff_bounds.operators import KernelSpec, MatrixFamily, OperatorSpec
from hausdorff_bounds.verify import (
    empirical_ratio,
    random_functions,
    random_muckenhoupt_params,
    random_params,
    sharpness_sweep,
    two_sided_check,
)
from hausdorff_bounds.weights import (
    DIVERGENT,
    BallGrid,
    MuckenhouptParams,
    Weight,
    ap_characteristic,
    critical_index_estimate,
)

HARDY = OperatorSpec(1, 1, KernelSpec("hardy_cesaro_psi"), [MatrixFamily.diag_scalar("t", 1)])
EPS = [0.2, 0.1, 0.05, 0.02, 0.01]
TESTS = Path(__file__).resolve().parent


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed):
        with capsys.disabled():
            status = "PASS" if ok else "FAIL"
            print(f"\ncriterion {number}: {status} ({elapsed:.2f} s) {detail}")

    return emit


@pytest.fixture(autouse=True)
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


def test_criterion_1_hardy_sharp_constant(report):
    t0 = time.perf_counter()
    params = TheoremParams("C3.2.2", HARDY, q_i=[2.0], alpha_i=[0.0], p_i=[2.0], q=2.0, alpha=0.0, p=2.0)
    sweep = sharpness_sweep(params, EPS)
    r = sweep.ratios
    elapsed = time.perf_counter() - t0
    ok = sweep.strictly_increasing and r[-1] >= 1.95 and max(r) <= 2.0 + 1e-3 and elapsed < 5.0
    report(1, ok, "ratios " + ", ".join(f"{x:.6f}" for x in r), elapsed)
    assert ok


def test_criterion_2_eigenfunction_exactness(report):
    t0 = time.perf_counter()
    c12 = TheoremParams("C3.1.2", HARDY, q_i=[2.0], lam_i=[-0.25], q=2.0, lam=-0.25)
    # Morrey-Herz analogue: phi = 1 on [0, 1], s(t) = t, lam = 1/4, alpha = 0, p = q = 2 -> extremal |x|^(-1/4)
    cube = OperatorSpec(1, 1, KernelSpec("hybrid_phi", 1.0, 0.0, ("cube", 0.0, 1.0)),
                        [MatrixFamily.diag_scalar("|y|", 1)])
    c31 = TheoremParams("C3.3.1", cube, q_i=[2.0], lam_i=[0.25], alpha_i=[0.0], p_i=[2.0], q=2.0, lam=0.25,
                        alpha=0.0, p=2.0)
    reps = [two_sided_check(c12), two_sided_check(c31)]
    elapsed = time.perf_counter() - t0
    gaps = [abs(rep.ratio - 4 / 3) / (4 / 3) for rep in reps]
    ok = (all(rep.verdict == "ExactMatch" for rep in reps) and all(abs(rep.constant - 4 / 3) < 1e-12 for rep in reps)
          and max(gaps) <= 1e-3 and elapsed < 5.0)
    report(2, ok, f"C1.2 ratio {reps[0].ratio:.12f}, C3.1 ratio {reps[1].ratio:.12f}, max gap {max(gaps):.2e}",
           elapsed)
    assert ok


def test_criterion_3_herz_corollary(report):
    t0 = time.perf_counter()
    params = TheoremParams("C3.2.2", HARDY, q_i=[2.0], alpha_i=[-0.25], p_i=[2.0], q=2.0, alpha=-0.25, p=2.0)
    sweep = sharpness_sweep(params, EPS)
    r = sweep.ratios
    c = sweep.reports[0].constant
    elapsed = time.perf_counter() - t0
    final_gap = (c - r[-1]) / c
    ok = (abs(c - 4 / 3) < 1e-12 and 0 <= final_gap <= 0.05 and all(x <= c * (1 + 1e-3) for x in r)
          and elapsed < 10.0)
    report(3, ok, "ratios " + ", ".join(f"{x:.6f}" for x in r) + f", gap below C at 0.01: {final_gap:.2%}", elapsed)
    assert ok


def test_criterion_4_muckenhoupt_module(report):
    t0 = time.perf_counter()
    unit = BallGrid.single([0.0], 1.0)
    ap = ap_characteristic(Weight.power(0.5, 1), 2.0, unit)
    div = ap_characteristic(Weight.power(1.0, 1), 2.0, unit)
    index = critical_index_estimate(Weight.power(-0.5, 1), analytic=False)
    elapsed = time.perf_counter() - t0
    ok = abs(ap - 4 / 3) <= 0.01 * 4 / 3 and div is DIVERGENT and abs(index - 2.0) <= 0.05 and elapsed < 10.0
    report(4, ok, f"A_2(|x|^1/2) {ap:.10f}, A_2(|x|) {div}, critical index {index:.4f}", elapsed)
    assert ok


def test_criterion_5_constant_oracles(report):
    t0 = time.perf_counter()
    c12 = TheoremParams("C3.1.2", HARDY, q_i=[2.0], lam_i=[-0.25], q=2.0, lam=-0.25)
    op = OperatorSpec(1, 1, KernelSpec("hausdorff_phi", 1.0, 1.0, ("annulus", 1.0, 2.0)),
                      [MatrixFamily.diag_scalar("|y|", 1)])
    muck = MuckenhouptParams(1.0, 1.0, 2.0, 2.0)
    c4 = TheoremParams("T3.4", op, q_i=[4.0], lam_i=[-0.125], q=4.0, q_star=1.0, muck=muck)
    c4_inner = TheoremParams("T3.4", op.with_kernel(KernelSpec("hausdorff_phi", 1.0, 1.0, ("annulus", 0.5, 1.0))),
                             q_i=[4.0], lam_i=[-0.125], q=4.0, q_star=1.0, muck=muck)
    worked = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BranchAmbiguity)
        for method in ("closed", "quadrature"):
            worked.append((compute_constant(c12, method=method), 4 / 3))
            worked.append((compute_muckenhoupt_constant(c4, method=method), 2.0))
            worked.append((compute_muckenhoupt_constant(c4_inner, method=method), 32 / 13 * (1 - 2 ** (-13 / 16))))
    worked_gap = max(abs(a - b) / b for a, b in worked)

    rng = np.random.default_rng(2024)
    ids = ["T3.1", "C3.1.1", "C3.1.2", "T3.2", "C3.2.1", "C3.2.2", "T3.3", "C3.3.1", "T3.4", "T3.5", "T3.6"]
    random_gap, finite = 0.0, 0
    for j in range(50):
        tid = ids[j % len(ids)]
        m = int(rng.integers(1, 3))
        if tid in ("T3.4", "T3.5", "T3.6"):
            p = random_muckenhoupt_params(tid, m, int(rng.integers(1, 3)), rng)
            a = compute_muckenhoupt_constant(p, method="closed")
            b = compute_muckenhoupt_constant(p, method="quadrature")
        else:
            p = random_params(tid, m, int(rng.integers(1, 4)) if tid.startswith("C") else 2, rng)
            a = compute_constant(p, method="closed")
            b = compute_constant(p, method="quadrature")
        if math.isinf(a) or math.isinf(b):
            random_gap = max(random_gap, 0.0 if math.isinf(a) and math.isinf(b) else math.inf)
            continue
        finite += 1
        random_gap = max(random_gap, abs(a - b) / abs(a))
    elapsed = time.perf_counter() - t0
    ok = worked_gap <= 1e-8 and random_gap <= 1e-6 and elapsed < 60.0
    report(5, ok, f"worked examples (both routes) max rel gap {worked_gap:.2e}; 50 random configs ({finite} finite) "
                  f"max closed-vs-quadrature gap {random_gap:.2e}", elapsed)
    assert ok


def test_criterion_6_property_suites(report):
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(TESTS / "test_properties.py")],
                          capture_output=True, text=True, cwd=TESTS.parent)
    elapsed = time.perf_counter() - t0
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()
    passed = int(m.group(1)) if (m := re.search(r"(\d+) passed", tail)) else 0
    ok = proc.returncode == 0 and passed > 0 and elapsed < 300.0
    report(6, ok, f"property suites (100 seeded cases each): {tail}", elapsed)
    assert ok, proc.stdout[-3000:]


def test_criterion_7_budgeted_upper_bound(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst, violations, cases = 0.0, [], 0
    for tid in ("T3.1", "T3.2", "T3.3"):
        for _ in range(50):
            m = int(rng.integers(1, 3))
            p = random_params(tid, m, 2, rng, family="rotation")
            rep = empirical_ratio(p, random_functions(m, rng), k_upper=10.0)
            cases += 1
            if rep.verdict == "Violation":
                violations.append((tid, rep.ratio, rep.constant))
            if math.isfinite(rep.constant) and rep.constant > 0:
                worst = max(worst, rep.ratio / rep.constant)
    elapsed = time.perf_counter() - t0
    ok = not violations and elapsed < 300.0
    report(7, ok, f"{cases} cases, {len(violations)} violations, max ratio/C {worst:.3f}", elapsed)
    assert ok, violations[:5]
