"""Hypothesis checks and boundedness constants for multilinear Hausdorff
operators on weighted Morrey, Herz and Morrey-Herz spaces.

Every constant is an integral of the kernel density against products of
powers of ||A_i(y)^-1||, |s_i(y)|, ||A_i(y)|| and |det A_i(y)^-1|.  When the
families scale like c_i |y|^{e_i} (or c_i |y_1|^{e_i} on a cube) the
integrand is piecewise monomial and the integral is closed form; otherwise it
is computed by quadrature over the kernel support.
"""

from dataclasses import dataclass, field, replace
import math
import warnings

import numpy as np

from .errors import UNBOUNDED, BranchAmbiguity, DivergentIntegral, HypothesisViolation
from .operators import OperatorSpec, integrate_over_support
from .powerlaw import monomial_integral
from .quadrature import DEFAULT_QUAD, integrate_log_radial
from .weights import MuckenhouptParams, power_weight_in_ap

BALANCE_TOL = 1e-12

THEOREM_IDS = ("T3.1", "C3.1.1", "C3.1.2", "T3.2", "C3.2.1", "C3.2.2", "T3.3", "C3.3.1", "T3.4", "T3.5", "T3.6")

# theorem id -> (constant id, target space family, scalar form?)
_LAYOUT = {
    "T3.1": ("C1", "morrey", False),
    "C3.1.1": ("C1.1", "morrey", True),
    "C3.1.2": ("C1.2", "morrey", True),
    "T3.2": ("C2", "herz", False),
    "C3.2.1": ("C2.1", "herz", True),
    "C3.2.2": ("C2.2", "herz", True),
    "T3.3": ("C3", "morrey_herz", False),
    "C3.3.1": ("C3.1", "morrey_herz", True),
}
_CONVENTION = {"C3.1.1": "hybrid_phi", "C3.1.2": "hardy_cesaro_psi", "C3.2.1": "hybrid_phi",
               "C3.2.2": "hardy_cesaro_psi", "C3.3.1": "hybrid_phi"}


def _seq(values, m=None):
    if values is None:
        return None
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class TheoremParams:
    """Exponents of one theorem or corollary together with its operator.

    Per-index lists have length m.  ``beta``/``gamma`` are the target weight
    exponents; for the Muckenhoupt theorems (T3.4-T3.6) the single pair of
    weights v = |x|^beta, omega = |x|^gamma is shared by all spaces.
    """

    theorem_id: str
    operator: OperatorSpec
    q_i: tuple
    beta_i: tuple = None
    gamma_i: tuple = None
    lam_i: tuple = None
    alpha_i: tuple = None
    p_i: tuple = None
    beta: float = 0.0
    gamma: float = 0.0
    q: float = None
    lam: float = None
    alpha: float = None
    p: float = None
    q_star: float = None
    alpha_star: float = None
    lam_star: float = None
    muck: MuckenhouptParams = field(default_factory=MuckenhouptParams)

    def __post_init__(self):
        if self.theorem_id not in THEOREM_IDS:
            raise ValueError(f"unknown theorem id {self.theorem_id!r}")
        m = self.operator.m
        for name in ("q_i", "beta_i", "gamma_i", "lam_i", "alpha_i", "p_i"):
            value = getattr(self, name)
            if value is None and name in ("beta_i", "gamma_i"):
                value = (0.0,) * m
            value = _seq(value)
            if value is not None and len(value) != m:
                raise ValueError(f"{name} must have length m = {m}")
            object.__setattr__(self, name, value)

    @property
    def m(self):
        return self.operator.m

    @property
    def n(self):
        return self.operator.n

    @property
    def constant_id(self):
        if self.theorem_id in _LAYOUT:
            return _LAYOUT[self.theorem_id][0]
        if self.theorem_id == "T3.4":
            return "C4"
        if self.theorem_id == "T3.5":
            return "C5.1" if self.alpha_star / self.n + 1.0 / self.q_star <= 0 else "C5.2"
        signs = [a / self.n + 1.0 / q for a, q in zip(self.alpha_i, self.q_i)]
        return "C6.1" if all(s <= 0 for s in signs) else "C6.2"

    @property
    def is_corollary(self):
        return self.theorem_id.startswith("C")

    def with_operator(self, operator):
        return replace(self, operator=operator)

    def r_omega(self):
        """Critical reverse Hölder index of omega (from the power exponent unless given)."""
        if self.muck.r_omega is not UNBOUNDED:
            return self.muck.r_omega
        return UNBOUNDED if self.gamma >= 0 else self.n / abs(self.gamma)

    def r_v(self):
        if self.muck.r_v is not UNBOUNDED:
            return self.muck.r_v
        return UNBOUNDED if self.beta >= 0 else self.n / abs(self.beta)


# --------------------------------------------------------------------------
# hypotheses


def _close(a, b):
    return abs(a - b) <= BALANCE_TOL * max(1.0, abs(a), abs(b))


def validate_hypotheses(params):
    """Names of every violated hypothesis (an empty list means Ok)."""
    tid, n, m = params.theorem_id, params.n, params.m
    bad = []

    def need(*names):
        missing = [name for name in names if getattr(params, name) is None]
        for name in missing:
            bad.append(f"missing {name}")
        return not missing

    b_i, g_i, q_i = params.beta_i, params.gamma_i, params.q_i
    if any(b <= -n for b in b_i) or any(g <= -n for g in g_i):
        bad.append("βᵢ, γᵢ > −n")
    if params.beta <= -n or params.gamma <= -n:
        bad.append("β, γ > −n")
    if any(q < 1 for q in q_i):
        bad.append("qᵢ ≥ 1")
    if need("q"):
        if params.q < 1:
            bad.append("q ≥ 1")
        if not _close(sum(1.0 / q for q in q_i), 1.0 / params.q):
            bad.append("Σ1/qᵢ=1/q")

    if tid in _LAYOUT:
        _classical_hypotheses(params, bad, need)
    else:
        _muckenhoupt_hypotheses(params, bad, need)
    return bad


def _classical_hypotheses(params, bad, need):
    tid, n = params.theorem_id, params.n
    b_i, g_i, q_i = params.beta_i, params.gamma_i, params.q_i
    space = _LAYOUT[tid][1]
    if tid in _CONVENTION:
        op = params.operator
        if op.kernel.convention != _CONVENTION[tid]:
            bad.append(f"kernel convention {_CONVENTION[tid]}")
        if any(f.kind != "diag_scalar" for f in op.families):
            bad.append("scalar diagonal families")
    if space != "morrey" and need("p_i", "p"):
        if any(p < 1 for p in params.p_i) or params.p < 1:
            bad.append("pᵢ, p ≥ 1")
        if not _close(sum(1.0 / p for p in params.p_i), 1.0 / params.p):
            bad.append("Σ1/pᵢ=1/p")
    if params.q is not None and not _close(sum(g / q for g, q in zip(g_i, q_i)), params.gamma / params.q):
        bad.append("Σγᵢ/qᵢ=γ/q")
    if space == "morrey":
        if not need("lam_i", "lam") or params.q is None:
            return
        lam_i, lam, q = params.lam_i, params.lam, params.q
        if not _close(sum(b / qq for b, qq in zip(b_i, q_i)), params.beta / q):
            bad.append("Σβᵢ/qᵢ=β/q")
        if not _close(sum((n + b) / (n + params.beta) * l for b, l in zip(b_i, lam_i)), lam):
            bad.append("Σ(n+βᵢ)/(n+β)λᵢ=λ")
        if any(not 1 + l * qq > 0 for l, qq in zip(lam_i, q_i)):
            bad.append("1+λᵢqᵢ>0")
        if not 1 + lam * q > 0:
            bad.append("1+λq>0")
        lhs = sum((b + n) * (l + 1.0 / qq) for b, l, qq in zip(b_i, lam_i, q_i))
        if not bad and not _close(lhs, (params.beta + n) * (lam + 1.0 / q)):
            bad.append("derived: Σ(βᵢ+n)(λᵢ+1/qᵢ)=(β+n)(λ+1/q)")
        return
    if need("alpha_i", "alpha"):
        lhs = sum((1 + b / n) * a for b, a in zip(b_i, params.alpha_i))
        if not _close(lhs, (1 + params.beta / n) * params.alpha):
            bad.append("Σ(1+βᵢ/n)αᵢ=(1+β/n)α")
    if space == "morrey_herz" and need("lam_i", "lam"):
        if any(not l > 0 for l in params.lam_i):
            bad.append("λᵢ>0")
        if params.lam < 0:
            bad.append("λ≥0")
        lhs = sum((1 + b / n) * l for b, l in zip(b_i, params.lam_i))
        if not _close(lhs, (1 + params.beta / n) * params.lam):
            bad.append("Σ(1+βᵢ/n)λᵢ=(1+β/n)λ")


def _muckenhoupt_hypotheses(params, bad, need):
    tid, n, m = params.theorem_id, params.n, params.m
    mk = params.muck
    if not need("q_star", "lam_i"):
        return
    q, q_star = params.q, params.q_star
    if q_star < 1:
        bad.append("q* ≥ 1")
    if any(b != params.beta for b in params.beta_i) or any(g != params.gamma for g in params.gamma_i):
        bad.append("shared weights v, ω")
    if not power_weight_in_ap(params.gamma, n, mk.xi):
        bad.append("ω ∈ A_ξ")
    if tid != "T3.6" and not power_weight_in_ap(params.beta, n, mk.eta):
        bad.append("v ∈ A_η")
    if tid != "T3.6" and not _close(params.gamma, params.beta):
        # omega(B(0,R)) <~ v(B(0,R)) for every R forces equal exponents
        bad.append("ω(B) ≲ v(B)")
    r_om, r_v = params.r_omega(), params.r_v()
    r_conj = MuckenhouptParams.conjugate(r_om)
    if r_om is not UNBOUNDED and not mk.delta1 < r_om:
        bad.append("δ₁ ∈ (1, r_ω)")
    if tid != "T3.6" and r_v is not UNBOUNDED and not mk.delta2 < r_v:
        bad.append("δ₂ ∈ (1, r_v)")
    lam_star = sum(params.lam_i) if params.lam_star is None else params.lam_star
    if not _close(lam_star, sum(params.lam_i)):
        bad.append("λ*=Σλᵢ")
    if tid == "T3.4":
        if any(not -1.0 / qq < l < 0 for l, qq in zip(params.lam_i, params.q_i)):
            bad.append("−1/qᵢ<λᵢ<0")
        if q is not None and not q > q_star * mk.xi * r_conj:
            bad.append("q > q*ξr'_ω")
        return
    if not need("alpha_i", "alpha_star"):
        return
    if any(not a < 0 for a in params.alpha_i):
        bad.append("αᵢ<0")
    if any(l < 0 for l in params.lam_i):
        bad.append("λᵢ≥0")
    a_star = params.alpha_star
    if tid == "T3.5":
        if q is not None and not q > max(m * q_star, q_star * mk.xi * r_conj):
            bad.append("q > max{mq*, q*ξr'_ω}")
        target = (a_star / n + 1.0 / q_star) / m
        if any(not _close(a / n + 1.0 / qq, target) for a, qq in zip(params.alpha_i, params.q_i)):
            bad.append("(1/m)(α*/n+1/q*)=αᵢ/n+1/qᵢ")
        return
    if q is not None and not q > q_star * mk.xi * r_conj:
        bad.append("q > q*ξr'_ω")
    if q is not None and not _close(a_star / n + 1.0 / q_star, sum(params.alpha_i) / n + 1.0 / q):
        bad.append("α*/n+1/q*=Σαᵢ/n+1/q")
    signs = [a / n + 1.0 / qq for a, qq in zip(params.alpha_i, params.q_i)]
    if not (all(s <= 0 for s in signs) or all(s > 0 for s in signs)):
        bad.append("αᵢ/n+1/qᵢ of one sign")


def require_valid(params):
    bad = validate_hypotheses(params)
    if bad:
        raise HypothesisViolation(f"{params.theorem_id}: " + "; ".join(bad), bad)


# --------------------------------------------------------------------------
# classical constants C1 ... C3.1


def classical_exponents(params):
    """E_i with C = int |density| prod X_i^{E_i}; X_i = ||A_i^-1|| for theorems
    and X_i = |s_i|^{-1} for corollaries."""
    n = params.n
    cid = params.constant_id
    out = []
    for i in range(params.m):
        b, g, q = params.beta_i[i], params.gamma_i[i], params.q_i[i]
        if cid.startswith("C1"):
            out.append(-(b + n) * params.lam_i[i] + (g - b) / q)
        elif cid.startswith("C2"):
            out.append((1 + b / n) * params.alpha_i[i] + (n + g) / q)
        else:
            out.append((1 + b / n) * (params.alpha_i[i] - params.lam_i[i]) + (n + g) / q)
    return out


def _scalar_forms(op):
    """(variable, [(c_i, e_i)]) with |s_i| = c_i u^{e_i}, u = |y| or |y_1|; else None."""
    radial = op.radial_data()
    if radial is not None:
        return "norm", radial[1]
    kern = op.kernel
    if kern.support[0] != "cube" or kern.sampled is not None or kern.density_power(op.n) != 0:
        return None
    forms = []
    for fam in op.families:
        if fam.kind != "diag_scalar" or fam.scalar.var not in ("y1", "const"):
            return None
        forms.append((abs(fam.scalar.coef), fam.scalar.exponent if fam.scalar.var == "y1" else 0.0))
    return "y1", forms


def _x_forms(params, forms):
    """(k_i, p_i) with X_i = k_i u^{p_i}."""
    n = params.n
    if params.is_corollary:
        return [(1.0 / c, -e) for c, e in forms]
    return [(math.sqrt(n) / c, -e) for c, e in forms]


def _monomial_region_integral(op, coef, power, quad):
    """int over the kernel support of coef * u^power * |density|, u as in _scalar_forms."""
    var, _ = _scalar_forms(op)
    kern = op.kernel
    n = op.n
    total = 0.0
    if var == "norm":
        d = kern.density_power(n) + n - 1.0
        for measure, r_lo, r_hi in kern.radial_segments(n):
            total += measure * abs(kern.coef) * monomial_integral(coef, power + d + 1.0, r_lo, r_hi)
        return total
    lo, hi = kern.support[1], kern.support[2]
    side = (hi - lo) ** (n - 1)
    for a, b in ((max(-hi, 0.0), -lo), (max(lo, 0.0), hi)):
        if b > a:
            total += side * abs(kern.coef) * monomial_integral(coef, power + 1.0, a, b)
    return total


def _x_values(params, fam, y):
    norm, inv_norm, _ = fam.norms(y)
    if params.is_corollary:
        with np.errstate(divide="ignore"):
            return 1.0 / np.abs(fam.scalar(y))
    return inv_norm


def compute_constant(params, quad=DEFAULT_QUAD, method="auto", check=True):
    """Value of C1, C1.1, C1.2, C2, C2.1, C2.2, C3 or C3.1 (math.inf when divergent).

    ``method`` is ``"auto"`` (closed form when available), ``"closed"`` or
    ``"quadrature"``.
    """
    if params.theorem_id not in _LAYOUT:
        raise ValueError(f"{params.theorem_id} has a Muckenhoupt-type constant")
    if check:
        require_valid(params)
    op = params.operator
    exps = classical_exponents(params)
    forms = _scalar_forms(op)
    if method == "closed" and forms is None:
        raise ValueError("no closed form for this kernel and family combination")
    if forms is not None:
        coef, power = 1.0, 0.0
        for (k, p), e in zip(_x_forms(params, forms[1]), exps):
            coef *= k ** e
            power += p * e
        try:
            closed = _monomial_region_integral(op, coef, power, quad)
        except DivergentIntegral:
            # the exponent test decides divergence for both routes
            return math.inf
        if method in ("auto", "closed"):
            return closed

    def g(y):
        out = np.abs(op.kernel.density(y))
        for fam, e in zip(op.families, exps):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                out = out * np.power(_x_values(params, fam, y), e)
        return np.where(out > 0, out, 0.0)

    return _quadrature_value(op, g, quad, slab=forms is not None and forms[0] == "y1")


def _quadrature_value(op, g, quad, slab=False):
    """Integral of g over the kernel support; radial integrands use a 1-D log-radial rule.

    ``slab`` marks integrands on a cube that depend on y_1 alone; they are
    integrated in y_1 and multiplied by the cross-section.
    """
    n = op.n
    if slab:
        lo, hi = op.kernel.support[1], op.kernel.support[2]
        centre = np.full(n, 0.5 * (lo + hi))
        total = 0.0
        for sign, a, b in ((-1.0, max(-hi, 0.0), -lo), (1.0, max(lo, 0.0), hi)):
            if not b > a:
                continue

            def h(r, sign=sign):
                y = np.tile(centre, (r.size, 1))
                y[:, 0] = sign * r
                return g(y)

            total += integrate_log_radial(h, a, b, quad, strict=False).value
        total *= (hi - lo) ** (n - 1)
        return total if math.isfinite(total) else math.inf
    if op.radial_data() is not None:
        segs = op.kernel.radial_segments(n)
        e1 = np.zeros(n)
        e1[0] = 1.0

        def h(r):
            return g(r[:, None] * e1[None, :]) * np.power(r, n - 1.0)

        total = 0.0
        for measure, r_lo, r_hi in segs:
            res = integrate_log_radial(h, r_lo, r_hi, quad, strict=False)
            total += measure * res.value
        return total if math.isfinite(total) else math.inf
    value, _ = integrate_over_support(op, g, quad)
    return value if math.isfinite(value) else math.inf


# --------------------------------------------------------------------------
# Muckenhoupt-type constants C4 ... C6.2


def _branch_exponents(params):
    """Per-family (low, high) exponents of ||A_i|| in the piecewise factor, with
    the power k of the det/norm prefactor (1 for C4, m otherwise)."""
    n, m, mk = params.n, params.m, params.muck
    xi, eta = mk.xi, mk.eta
    d1, d2 = (mk.delta1 - 1) / mk.delta1, (mk.delta2 - 1) / mk.delta2
    cid = params.constant_id
    out = []
    for i in range(m):
        q_i, lam = params.q_i[i], params.lam_i[i]
        if cid == "C4":
            s = lam + 1.0 / q_i
            low = n * s * d2 - xi * n / q_i
            high = n * eta * s - n / q_i * d1
        elif cid in ("C5.1", "C5.2"):
            a, qs = params.alpha_star, params.q_star
            if cid == "C5.1":
                low = -((n / qs + a) * d1 + (a - m * lam) * d2 - xi * a)
                high = -((n / qs + a) * xi + eta * (a - m * lam) - a * d1)
            else:
                low = -(xi * n / qs + (a - m * lam) * d2)
                high = -(n / qs * d1 + eta * (a - m * lam))
        else:
            s = params.alpha_i[i] / n + 1.0 / q_i
            if cid == "C6.1":
                low = m * (lam - n * s * d1)
                high = m * xi * (lam - n * s)
            else:
                low = m * (lam * d1 - n * xi * s)
                high = m * (lam * xi - n * s * d1)
        out.append((low, high))
    k = 1.0 if cid == "C4" else float(m)
    return out, k


def _muck_factor(params, fam, y, low, high, k, q_i):
    norm, _, det = fam.norms(y)
    n = params.n
    xi = params.muck.xi
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        pre = np.power(det, -k * xi / q_i) * np.power(norm, k * xi * n / q_i)
        branch = np.where(norm < 1.0, np.power(norm, low), np.power(norm, high))
    return pre * branch


def _warn_flat_norm(params):
    for fam in params.operator.families:
        rf = fam.radial_form()
        if rf is not None and rf[1] == 0.0 and abs(math.sqrt(params.n) * rf[0] - 1.0) < 1e-12:
            warnings.warn("matrix norm equals 1 on the whole support; using the >= 1 branch", BranchAmbiguity)


def compute_muckenhoupt_constant(params, quad=DEFAULT_QUAD, method="auto", check=True):
    """Value of C4, C5.1/C5.2 or C6.1/C6.2 (math.inf when divergent).

    The y-domain is split where ||A_i(y)|| = 1; the set {||A_i|| = 1} goes to
    the ">= 1" branch.  C5.* and C6.* keep their product of 1/m-th powers.
    """
    if params.theorem_id not in ("T3.4", "T3.5", "T3.6"):
        raise ValueError(f"{params.theorem_id} has a classical constant")
    if check:
        require_valid(params)
    _warn_flat_norm(params)
    op = params.operator
    branches, k = _branch_exponents(params)
    radial = op.radial_data()
    if method == "closed" and radial is None:
        raise ValueError("no closed form for this kernel and family combination")
    use_closed = method in ("auto", "closed") and radial is not None
    if params.constant_id == "C4":
        groups = [list(range(params.m))]
        outer = 1.0
    else:
        groups = [[i] for i in range(params.m)]
        outer = 1.0 / params.m
    total = 1.0
    for group in groups:
        if use_closed:
            value = _muck_closed(params, group, branches, k)
        else:

            def g(y, group=group):
                out = np.abs(op.kernel.density(y))
                for i in group:
                    out = out * _muck_factor(params, op.families[i], y, *branches[i], k, params.q_i[i])
                return np.where(out > 0, out, 0.0)

            value = _quadrature_value(op, g, quad)
        if not math.isfinite(value):
            return math.inf
        total *= value ** outer
    return total


def _muck_closed(params, group, branches, k):
    """Exact piecewise-monomial integral for radial families."""
    op = params.operator
    n = op.n
    segments, forms = op.radial_data()
    xi = params.muck.xi
    d = op.kernel.density_power(n) + n - 1.0
    # ||A_i|| = sqrt(n) c_i r^{e_i}; |det A_i^-1| = (c_i r^{e_i})^{-n}
    cuts = set()
    for i in group:
        c, e = forms[i]
        if e != 0.0:
            cuts.add((1.0 / (math.sqrt(n) * c)) ** (1.0 / e))
    total = 0.0
    for measure, r_lo, r_hi in segments:
        edges = sorted({r_lo, r_hi} | {t for t in cuts if r_lo < t < r_hi})
        for a, b in zip(edges[:-1], edges[1:]):
            rep = math.sqrt(a * b) if a > 0 and math.isfinite(b) else (b / 2 if a == 0 else 2 * a)
            coef, power = abs(op.kernel.coef) * measure, d
            for i in group:
                c, e = forms[i]
                q_i = params.q_i[i]
                low, high = branches[i]
                norm_c = math.sqrt(n) * c
                norm_at = norm_c * rep ** e
                expo = low if norm_at < 1.0 and not abs(norm_at - 1.0) < 1e-12 else high
                # det^{-k xi/q} * norm^{k xi n/q} = n^{k xi n/(2q)}, independent of y
                coef *= math.sqrt(n) ** (k * xi * n / q_i) * norm_c ** expo
                power += e * expo
            try:
                total += monomial_integral(coef, power + 1.0, a, b)
            except DivergentIntegral:
                return math.inf
    return total
