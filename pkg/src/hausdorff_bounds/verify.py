"""Extremal functions, empirical operator-norm ratios and sharpness checks.

A ratio is ||H(f_1, ..., f_m)||_target / prod ||f_i||_source,i.  Pure power
inputs under scalar or rotation families are eigenfunctions, H(f) = K prod f_i,
so their ratio is K times the norm quotient of the pointwise product.  Herz
extremals carry a cutoff and are used in sweeps over a shrinking epsilon.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .constants import (
    TheoremParams,
    compute_constant,
    compute_muckenhoupt_constant,
    require_valid,
    _LAYOUT,
)
from .errors import (
    DivergentIntegral,
    DivergentNumerator,
    DivergentNorm,
    HypothesisViolation,
    ZeroDenominator,
    is_divergent,
)
from .operators import (
    KernelSpec,
    MatrixFamily,
    NotSymbolic,
    OperatorSpec,
    apply_operator,
    operator_output,
    rho_bound,
)
from .powerlaw import RadialPower
from .quadrature import DEFAULT_QUAD
from .spaces import DEFAULT_RANGE, SpaceSpec, TestFunction, space_norm
from .weights import MuckenhouptParams, Weight

EXACT_TOL = 1e-3
LIMIT_TOL = 0.05
DEFAULT_EPS = (0.2, 0.1, 0.05, 0.02, 0.01)
VERDICTS = ("ExactMatch", "LowerBoundOk", "UpperBoundOk", "Violation")


@dataclass
class RatioReport:
    ratio: float
    constant: float
    constant_id: str
    relative_gap: float
    verdict: str
    quadrature_error: float = 0.0
    reference: float = None  # value the ratio is compared with (constant times normalisation)
    flags: tuple = ()
    details: dict = field(default_factory=dict)

    def to_record(self):
        return {
            "ratio": self.ratio,
            "constant": self.constant,
            "constant_id": self.constant_id,
            "relative_gap": self.relative_gap,
            "verdict": self.verdict,
            "quadrature_error": self.quadrature_error,
            "reference": self.reference,
            "flags": list(self.flags),
        }


@dataclass
class SweepResult:
    reports: list
    eps: tuple
    nondecreasing: bool
    strictly_increasing: bool
    bounded: bool
    final_gap: float

    @property
    def ratios(self):
        return [r.ratio for r in self.reports]


# --------------------------------------------------------------------------
# spaces attached to a theorem


def _power(gamma, n):
    return Weight.power(gamma, n)


def source_spaces(params):
    n, tid = params.n, params.theorem_id
    out = []
    for i in range(params.m):
        if tid in ("T3.4", "T3.5", "T3.6"):
            v = _power(params.gamma if tid == "T3.6" else params.beta, n)
            w = _power(params.gamma, n)
        else:
            v, w = _power(params.beta_i[i], n), _power(params.gamma_i[i], n)
        q = params.q_i[i]
        kind = _space_kind(params)
        if kind == "morrey":
            out.append(SpaceSpec.central_morrey(q, params.lam_i[i], v, w))
        elif kind == "herz":
            out.append(SpaceSpec.herz(params.alpha_i[i], params.p_i[i], q, v, w))
        else:
            out.append(SpaceSpec.morrey_herz(params.alpha_i[i], params.lam_i[i], params.p_i[i], q, v, w))
    return out


def target_space(params):
    n, tid = params.n, params.theorem_id
    kind = _space_kind(params)
    if tid in ("T3.4", "T3.5", "T3.6"):
        v = _power(params.gamma if tid == "T3.6" else params.beta, n)
        w = _power(params.gamma, n)
        lam_star = sum(params.lam_i) if params.lam_star is None else params.lam_star
        if tid == "T3.4":
            return SpaceSpec.central_morrey(params.q_star, lam_star, v, w)
        return SpaceSpec.morrey_herz(params.alpha_star, lam_star, params.p, params.q_star, v, w)
    v, w = _power(params.beta, n), _power(params.gamma, n)
    if kind == "morrey":
        return SpaceSpec.central_morrey(params.q, params.lam, v, w)
    if kind == "herz":
        return SpaceSpec.herz(params.alpha, params.p, params.q, v, w)
    return SpaceSpec.morrey_herz(params.alpha, params.lam, params.p, params.q, v, w)


def _space_kind(params):
    if params.theorem_id in _LAYOUT:
        return _LAYOUT[params.theorem_id][1]
    return "morrey" if params.theorem_id == "T3.4" else "morrey_herz"


def theorem_constant(params, quad=DEFAULT_QUAD):
    if params.theorem_id in _LAYOUT:
        return compute_constant(params, quad)
    return compute_muckenhoupt_constant(params, quad)


# --------------------------------------------------------------------------
# extremal functions


def extremal_exponents(params, eps=0.0):
    n = params.n
    kind = _space_kind(params)
    out = []
    for i in range(params.m):
        b, g, q = params.beta_i[i], params.gamma_i[i], params.q_i[i]
        if kind == "morrey":
            out.append((b + n) * params.lam_i[i] + (b - g) / q)
        elif kind == "herz":
            out.append(-(1 + b / n) * params.alpha_i[i] - (n + g) / q - eps)
        else:
            out.append((params.lam_i[i] - params.alpha_i[i]) * (1 + b / n) - (n + g) / q)
    return out


def build_extremal(params, eps=0.0):
    """The power-law inputs used in the necessity arguments.

    Morrey and Morrey-Herz extremals are pure powers.  Herz extremals are the
    epsilon-family |x|^(-(1+beta_i/n) alpha_i - (n+gamma_i)/q_i - eps) on
    |x| >= 1/rho, which needs eps > 0.
    """
    if params.theorem_id not in _LAYOUT:
        raise ValueError(f"{params.theorem_id} has no extremal family")
    require_valid(params)
    kind = _space_kind(params)
    if kind == "herz":
        if not eps > 0:
            raise HypothesisViolation("Herz extremals form an epsilon-family and need eps > 0", ["ε > 0"])
        cutoff = 1.0 / rho_bound(params.operator)
        return [TestFunction.power(a, cutoff) for a in extremal_exponents(params, eps)]
    return [TestFunction.power(a) for a in extremal_exponents(params)]


# --------------------------------------------------------------------------
# ratios


def _output_function(params, functions, quad):
    op = params.operator
    try:
        return TestFunction.from_profile(operator_output(op, functions)), True
    except NotSymbolic:
        pass
    n = op.n

    def evaluate(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty(r.shape)
        for j, t in enumerate(r.ravel()):
            x = np.zeros(n)
            x[0] = t
            out.flat[j] = apply_operator(op, functions, x, quad, method="quadrature") if t > 0 else 0.0
        return out

    radial = op.line_data() is not None and all(f.is_radial for f in functions)
    if radial:
        return TestFunction.opaque(evaluate, radial=True), False

    def evaluate_points(pts):
        return np.array([apply_operator(op, functions, p, quad, method="quadrature") for p in np.atleast_2d(pts)])

    return TestFunction.opaque(evaluate_points, radial=False), False


def _product_function(functions):
    prof = RadialPower.monomial(1.0, 0.0)
    for f in functions:
        prof = prof * f.radial_power()
    return TestFunction.from_profile(prof)


def normalisation(params, functions, range_=DEFAULT_RANGE, quad=DEFAULT_QUAD):
    """||prod f_i||_target / prod ||f_i||_source,i (1 when m = 1 and the spaces agree)."""
    denom = 1.0
    for f, sp in zip(functions, source_spaces(params)):
        denom *= space_norm(sp, f, range_, quad)
    num = space_norm(target_space(params), _product_function(functions), range_, quad)
    if is_divergent(num) or denom == 0:
        return math.nan
    return num / denom


def _verdict(ratio, constant, reference, k_upper, tol):
    flags = []
    if math.isinf(constant):
        return "UpperBoundOk", ("vacuous: constant is infinite",), math.nan
    gap = (ratio - constant) / constant if constant > 0 else math.nan
    if reference is not None and reference > 0 and abs(ratio - reference) <= tol * reference:
        return "ExactMatch", tuple(flags), gap
    bound = k_upper * (reference if reference is not None else constant)
    if ratio <= bound * (1 + tol):
        return "UpperBoundOk", tuple(flags), gap
    return "Violation", tuple(flags), gap


def empirical_ratio(params, functions, range_=DEFAULT_RANGE, quad=DEFAULT_QUAD, k_upper=1.0, reference=None,
                    constant=None, tol=EXACT_TOL):
    """Measure ||H(f)||_target / prod ||f_i||_source,i and compare it with the constant.

    ``reference`` (when given) is the value an exact match is checked
    against; otherwise the verdict is UpperBoundOk when ratio <= k_upper * C.
    """
    functions = list(functions)
    if constant is None:
        constant = theorem_constant(params, quad)
    denom = 1.0
    flags = []
    for f, sp in zip(functions, source_spaces(params)):
        if f.is_zero():
            raise ZeroDenominator("a source function is identically zero")
        value = space_norm(sp, f, range_, quad)
        if is_divergent(value) or not math.isfinite(value):
            raise DivergentNorm("a source norm is infinite")
        if value == 0:
            raise ZeroDenominator("a source norm vanished")
        denom *= value
    try:
        out, symbolic = _output_function(params, functions, quad)
    except DivergentIntegral as exc:
        raise DivergentNumerator(str(exc)) from exc
    if not symbolic:
        flags.append("numerical operator output")
    num = space_norm(target_space(params), out, range_, quad)
    if is_divergent(num) or not math.isfinite(num):
        raise DivergentNumerator("the operator output has infinite norm")
    ratio = num / denom
    verdict, more, gap = _verdict(ratio, constant, reference, k_upper, tol)
    return RatioReport(ratio, constant, params.constant_id, gap, verdict, 0.0 if symbolic else quad.rel_tol,
                       reference, tuple(flags) + more, {"numerator": num, "denominator": denom})


def sharpness_sweep(params, eps_list=DEFAULT_EPS, range_=DEFAULT_RANGE, quad=DEFAULT_QUAD, tol=EXACT_TOL):
    """Ratios of the epsilon-extremals for a descending list of eps."""
    eps_list = tuple(float(e) for e in eps_list)
    if any(e <= 0 for e in eps_list):
        raise ValueError("eps values must be positive")
    if any(b >= a for a, b in zip(eps_list[:-1], eps_list[1:])):
        raise ValueError("eps values must be strictly descending")
    constant = theorem_constant(params, quad)
    reports = []
    for eps in eps_list:
        fs = build_extremal(params, eps)
        kappa = normalisation(params, fs, range_, quad)
        rep = empirical_ratio(params, fs, range_, quad, constant=constant, reference=None, k_upper=kappa, tol=tol)
        rep.details["eps"] = eps
        rep.details["normalisation"] = kappa
        reports.append(rep)
    ratios = [r.ratio for r in reports]
    nondecreasing = all(b >= a - 1e-9 for a, b in zip(ratios[:-1], ratios[1:]))
    strictly = all(b > a for a, b in zip(ratios[:-1], ratios[1:]))
    bounded = all(r.verdict != "Violation" for r in reports)
    last = reports[-1]
    final_gap = (last.ratio - constant * last.details["normalisation"]) / (constant * last.details["normalisation"])
    return SweepResult(reports, eps_list, nondecreasing, strictly, bounded, final_gap)


def two_sided_check(params, k_upper=10.0, range_=DEFAULT_RANGE, quad=DEFAULT_QUAD, eps_list=DEFAULT_EPS,
                    cases=20, seed=0, tol=EXACT_TOL):
    """Check the two-sided relation between operator norm and constant.

    Morrey and Morrey-Herz corollaries: the extremal ratio must equal C times
    the product normalisation (ExactMatch).  Herz corollaries: the sweep must
    increase and stay below C times the normalisation, and for m = 1 end
    within 5% of it (LowerBoundOk).  Other
    theorems: ratio <= k_upper * C over seeded random inputs (UpperBoundOk).
    """
    constant = theorem_constant(params, quad)
    if math.isinf(constant):
        return RatioReport(math.nan, constant, params.constant_id, math.nan, "UpperBoundOk",
                           flags=("vacuous: constant is infinite",))
    kind = _space_kind(params) if params.theorem_id in _LAYOUT else None
    if params.is_corollary and kind in ("morrey", "morrey_herz"):
        fs = build_extremal(params)
        kappa = normalisation(params, fs, range_, quad)
        rep = empirical_ratio(params, fs, range_, quad, constant=constant, reference=constant * kappa, tol=tol)
        if rep.verdict != "ExactMatch":
            rep.verdict = "Violation"
        rep.details["normalisation"] = kappa
        return rep
    if params.is_corollary and kind == "herz":
        sweep = sharpness_sweep(params, eps_list, range_, quad, tol)
        last = sweep.reports[-1]
        near = -LIMIT_TOL <= sweep.final_gap <= tol
        flags = list(last.flags)
        if params.m == 1:
            ok = sweep.nondecreasing and sweep.bounded and near
        else:
            # the multilinear limit carries an unspecified factor; only convergence from below is asserted
            ok = sweep.nondecreasing and sweep.bounded
            if not near:
                flags.append(f"sweep still {-sweep.final_gap:.1%} below C times the normalisation")
        rep = RatioReport(last.ratio, constant, params.constant_id, last.relative_gap,
                          "LowerBoundOk" if ok else "Violation", last.quadrature_error,
                          constant * last.details["normalisation"], tuple(flags),
                          {"sweep": sweep.ratios, "eps": list(sweep.eps), "final_gap": sweep.final_gap})
        return rep
    rng = np.random.default_rng(seed)
    worst = None
    for _ in range(cases):
        fs = random_functions(params.m, rng)
        rep = empirical_ratio(params, fs, range_, quad, constant=constant, k_upper=k_upper, tol=tol)
        if worst is None or rep.ratio > worst.ratio:
            worst = rep
        if rep.verdict == "Violation":
            return rep
    worst.details["cases"] = cases
    return worst


# --------------------------------------------------------------------------
# random admissible configurations

MARGIN = 0.05


def random_functions(m, rng, max_terms=2):
    """Sums of one or two truncated powers |x|^a on (r0, r1], a in [-1, 1]."""
    out = []
    for _ in range(m):
        terms = []
        for _ in range(int(rng.integers(1, max_terms + 1))):
            a = rng.uniform(-1.0, 1.0)
            r0 = 2.0 ** rng.uniform(-3.0, 0.0)
            r1 = r0 * 2.0 ** rng.uniform(0.5, 3.0)
            terms.append(TestFunction.power(a, r0, r1, coef=rng.uniform(0.5, 2.0)))
        out.append(terms[0] if len(terms) == 1 else TestFunction.sum(terms))
    return out


def random_kernel(rng, convention="hausdorff_phi"):
    u0 = rng.uniform(-2.0, 1.0)
    return KernelSpec(convention, rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0),
                      ("annulus", 2.0 ** u0, 2.0 ** (u0 + rng.uniform(0.5, 3.0))))


def random_family(kind, n, rng, var="|y|"):
    c = 2.0 ** rng.uniform(-1.0, 1.0)
    # |e| >= 0.1 keeps the radii (x/c)^(1/e) inside the double range
    e = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 1.5))
    if kind == "rotation":
        return MatrixFamily.rotation(f"{rng.uniform(0, 2 * math.pi)!r}*|y|", n, f"{c!r}*|y|^{e!r}")
    return MatrixFamily.diag_scalar(f"{c!r}*{var}^{e!r}", n)


def random_params(theorem_id, m, n, rng, family="rotation", kernel=None, beta_min=-1.0):
    """Seeded admissible parameters, drawn with margin 0.05 from every boundary.

    Box: beta_i in [beta_min, 1], gamma_i in [-1, 1], q_i, p_i in [2, 5]
    (in [1.5, 4] when m = 1), alpha_i in [-1, 1], Morrey lam_i in
    (-1/q_i, 0) and Morrey-Herz lam_i in (0, 1].  Targets follow from the
    balance equations.
    """
    if kernel is None:
        convention = "hausdorff_phi"
        if theorem_id in ("C3.1.1", "C3.2.1", "C3.3.1"):
            convention = "hybrid_phi"
        kernel = random_kernel(rng, convention)
    var = "|y|"
    if theorem_id in ("C3.1.2", "C3.2.2"):
        # constant psi on the unit cube, curves c * y1^e
        kernel = KernelSpec("hardy_cesaro_psi", kernel.coef, 0.0)
        var = "y1"
    if theorem_id.startswith("C"):
        family = "diag_scalar"
    fams = [random_family(family, n, rng, var) for _ in range(m)]
    op = OperatorSpec(m, n, kernel, fams)
    lo_q, hi_q = (1.5, 4.0) if m == 1 else (2.0, 5.0)
    q_i = rng.uniform(lo_q, hi_q, m)
    p_i = rng.uniform(lo_q, hi_q, m)
    beta_i = rng.uniform(max(beta_min, -n + MARGIN), 1.0, m)
    gamma_i = rng.uniform(-1.0, 1.0, m)
    q = 1.0 / np.sum(1.0 / q_i)
    p = 1.0 / np.sum(1.0 / p_i)
    beta = q * np.sum(beta_i / q_i)
    gamma = q * np.sum(gamma_i / q_i)
    kind = _LAYOUT[theorem_id][1]
    kw = dict(q_i=q_i, beta_i=beta_i, gamma_i=gamma_i, beta=float(beta), gamma=float(gamma), q=float(q))
    if kind == "morrey":
        lam_i = np.array([rng.uniform(-1.0 / qq + MARGIN, -MARGIN) for qq in q_i])
        lam = float(np.sum((n + beta_i) * lam_i) / (n + beta))
        kw.update(lam_i=lam_i, lam=lam)
    else:
        alpha_i = rng.uniform(-1.0, 1.0, m)
        alpha = float(np.sum((1 + beta_i / n) * alpha_i) / (1 + beta / n))
        kw.update(alpha_i=alpha_i, alpha=alpha, p_i=p_i, p=float(p))
        if kind == "morrey_herz":
            lam_i = rng.uniform(MARGIN, 1.0, m)
            lam = float(np.sum((1 + beta_i / n) * lam_i) / (1 + beta / n))
            kw.update(lam_i=lam_i, lam=lam)
    return TheoremParams(theorem_id, op, **kw)


def random_muckenhoupt_params(theorem_id, m, n, rng, kernel=None):
    """Seeded admissible parameters for T3.4-T3.6 with power weights."""
    if kernel is None:
        kernel = random_kernel(rng)
    op = OperatorSpec(m, n, kernel, [random_family("diag_scalar", n, rng) for _ in range(m)])
    xi = rng.uniform(1.0, 3.0)
    eta = rng.uniform(1.0, 3.0)
    gamma = rng.uniform(-0.5 * n, 0.0) if theorem_id != "T3.6" else rng.uniform(-0.5 * n, -0.1)
    r_om = n / abs(gamma) if gamma < 0 else math.inf
    delta1 = 1.0 + (min(r_om, 4.0) - 1.0) * rng.uniform(0.2, 0.8)
    delta2 = 1.0 + (min(r_om, 4.0) - 1.0) * rng.uniform(0.2, 0.8)
    muck = MuckenhouptParams(xi, eta, delta1, delta2)
    r_conj = 1.0 if math.isinf(r_om) else r_om / (r_om - 1.0)
    q_star = rng.uniform(1.0, 2.0)
    q_min = q_star * xi * r_conj
    if theorem_id == "T3.5":
        q_min = max(q_min, m * q_star)
    q = q_min * rng.uniform(1.1, 2.0)
    q_i = np.full(m, q * m)
    kw = dict(q_i=q_i, beta_i=[gamma] * m, gamma_i=[gamma] * m, beta=gamma, gamma=gamma, q=q, q_star=q_star,
              muck=muck)
    if theorem_id == "T3.4":
        lam_i = np.array([rng.uniform(-1.0 / qq + MARGIN / qq, -MARGIN / qq) for qq in q_i])
        kw.update(lam_i=lam_i)
    else:
        lam_i = rng.uniform(0.0, 1.0, m)
        p_i = np.full(m, rng.uniform(2.0, 4.0) * m)
        kw.update(lam_i=lam_i, p_i=p_i, p=float(p_i[0] / m))
        if theorem_id == "T3.5":
            # common value of alpha_i/n + 1/q_i, then alpha* from it
            s = rng.uniform(-1.0, 1.0 / q_i[0] - MARGIN)
            alpha_i = np.full(m, n * (s - 1.0 / q_i[0]))
            alpha_star = n * (m * s - 1.0 / q_star)
        else:
            # one branch for every index: alpha_i/n + 1/q_i all positive or all <= 0
            if rng.uniform() < 0.5:
                alpha_i = -(n / q_i) * rng.uniform(MARGIN, 1.0 - MARGIN, m)
            else:
                alpha_i = -n / q_i - rng.uniform(MARGIN, 1.0, m)
            alpha_star = n * (np.sum(alpha_i) / n + 1.0 / q - 1.0 / q_star)
        kw.update(alpha_i=alpha_i, alpha_star=float(alpha_star))
    return TheoremParams(theorem_id, op, **kw)
