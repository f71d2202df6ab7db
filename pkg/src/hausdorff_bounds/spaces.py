"""Test functions and the weighted Lebesgue, central Morrey, Herz and
Morrey-Herz norms.

Symbolic test functions are radial piecewise power laws, so with power
weights every annulus integral is closed form.  Infinite sums and suprema are
split into an explicit middle part and two end zones where the function is a
single monomial; there the shell terms are exactly geometric and the tails
are summed (or declared divergent) from the exponents.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (
    DIVERGENT,
    DivergentNorm,
    OutOfRangeWarning,
    TruncationWarning,
    is_divergent,
)
from .powerlaw import RadialPower
from .quadrature import DEFAULT_QUAD, adaptive_gl, integrate_log_radial, sphere_area, sphere_rule
from .weights import Weight, ball_mass

# A geometric tail with ratio at or above this value is reported as divergent.
TAIL_RATIO_LIMIT = 0.999

_SYMBOLIC = ("power", "indicator", "scaled", "sum", "profile")


def _parse_radius(value):
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "+inf"):
            return math.inf
        return float(value)
    return float(value)


def _dump_radius(value):
    return "inf" if math.isinf(value) else value


@dataclass(frozen=True)
class TestFunction:
    """Radial test function.

    ``power``: coef * |x|^a on r0 < |x| <= r1.  ``indicator``: the ball
    |x| <= R or the annulus r0 < |x| <= r1.  ``scaled``: coef times a child.
    ``sum``: sum of children.  ``profile``: an explicit RadialPower.
    ``opaque``: a vectorised evaluator of points (or of radii when radial).
    """

    __test__ = False  # not a pytest class

    kind: str
    a: float = 0.0
    r0: float = 0.0
    r1: float = math.inf
    coef: float = 1.0
    children: tuple = ()
    profile: object = field(default=None, compare=False)
    evaluator: object = field(default=None, compare=False)
    radial: bool = True
    shape: str = "annulus"

    def __post_init__(self):
        if self.kind not in _SYMBOLIC + ("opaque",):
            raise ValueError(f"unknown test function kind {self.kind!r}")
        if self.kind in ("power", "indicator") and not self.r0 < self.r1:
            raise ValueError("cutoffs must satisfy r0 < r1")
        if self.r0 < 0:
            raise ValueError("inner cutoff must be nonnegative")
        if self.kind == "opaque" and self.evaluator is None:
            raise ValueError("opaque test functions need an evaluator")
        if self.kind == "profile" and self.profile is None:
            raise ValueError("profile test functions need a RadialPower")

    # constructors -----------------------------------------------------
    @classmethod
    def power(cls, a, r0=0.0, r1=math.inf, coef=1.0):
        return cls("power", a=float(a), r0=float(r0), r1=float(r1), coef=float(coef))

    @classmethod
    def ball(cls, radius):
        return cls("indicator", r0=0.0, r1=float(radius), shape="ball")

    @classmethod
    def annulus(cls, r0, r1):
        return cls("indicator", r0=float(r0), r1=float(r1), shape="annulus")

    @classmethod
    def scaled(cls, coef, child):
        return cls("scaled", coef=float(coef), children=(child,))

    @classmethod
    def sum(cls, children):
        return cls("sum", children=tuple(children))

    @classmethod
    def from_profile(cls, profile):
        return cls("profile", profile=profile)

    @classmethod
    def opaque(cls, evaluator, radial=False):
        return cls("opaque", evaluator=evaluator, radial=bool(radial))

    @classmethod
    def from_json(cls, data):
        kind = data["kind"]
        if kind == "power":
            return cls.power(data["a"], _parse_radius(data.get("r0", 0.0)), _parse_radius(data.get("r1", "inf")),
                             float(data.get("coef", 1.0)))
        if kind == "indicator":
            if data.get("shape", "ball") == "ball":
                return cls.ball(_parse_radius(data["R"]))
            return cls.annulus(_parse_radius(data["r0"]), _parse_radius(data["r1"]))
        if kind == "scaled":
            return cls.scaled(data["coef"], cls.from_json(data["child"]))
        if kind == "sum":
            return cls.sum(cls.from_json(t) for t in data["terms"])
        raise ValueError(f"test function kind {kind!r} cannot be read from JSON")

    def to_json(self):
        if self.kind == "power":
            out = {"kind": "power", "a": self.a, "r0": _dump_radius(self.r0), "r1": _dump_radius(self.r1)}
            if self.coef != 1.0:
                out["coef"] = self.coef
            return out
        if self.kind == "indicator":
            if self.shape == "ball":
                return {"kind": "indicator", "shape": "ball", "R": _dump_radius(self.r1)}
            return {"kind": "indicator", "shape": "annulus", "r0": self.r0, "r1": _dump_radius(self.r1)}
        if self.kind == "scaled":
            return {"kind": "scaled", "coef": self.coef, "child": self.children[0].to_json()}
        if self.kind == "sum":
            return {"kind": "sum", "terms": [c.to_json() for c in self.children]}
        if self.kind == "profile":
            return {"kind": "profile", "terms": [list(t) for t in self.profile.as_terms()]}
        return {"kind": "opaque"}

    # structure --------------------------------------------------------
    @property
    def is_symbolic(self):
        if self.kind == "opaque":
            return False
        return all(c.is_symbolic for c in self.children)

    @property
    def is_radial(self):
        if self.kind == "opaque":
            return self.radial
        return all(c.is_radial for c in self.children)

    def radial_power(self):
        """The exact radial profile of a symbolic test function."""
        if self.kind == "power":
            return RadialPower.monomial(self.coef, self.a, self.r0, self.r1)
        if self.kind == "indicator":
            return RadialPower.monomial(1.0, 0.0, self.r0, self.r1)
        if self.kind == "profile":
            return self.profile
        if self.kind == "scaled":
            return self.children[0].radial_power().scale(self.coef)
        if self.kind == "sum":
            out = RadialPower(())
            for c in self.children:
                out = out + c.radial_power()
            return out
        raise ValueError("opaque test functions have no symbolic profile")

    def is_zero(self):
        return self.is_symbolic and self.radial_power().is_zero()

    def scale(self, c):
        return TestFunction.scaled(c, self)

    def dilate(self, delta):
        """The function x -> f(delta x)."""
        if delta <= 0:
            raise ValueError("dilation factor must be positive")
        if self.is_symbolic:
            return TestFunction.from_profile(self.radial_power().dilate(delta))
        ev, radial = self.evaluator, self.radial
        return TestFunction.opaque(lambda z: ev(delta * np.asarray(z, dtype=float)), radial=radial)

    # evaluation -------------------------------------------------------
    def radial_values(self, r):
        if self.is_symbolic:
            return self.radial_power()(r)
        if not self.radial:
            raise ValueError("test function is not radial")
        return np.asarray(self.evaluator(np.asarray(r, dtype=float)), dtype=float)

    def __call__(self, points):
        """Values at an (N, n) array of points (a 1-D array is read as N points in R^1)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim <= 1:
            pts = pts.reshape(-1, 1)
        if self.is_symbolic or self.radial:
            return self.radial_values(np.linalg.norm(pts, axis=-1))
        return np.asarray(self.evaluator(pts), dtype=float)


@dataclass(frozen=True)
class SpaceSpec:
    """A norm: ``lebesgue``, ``central_morrey``, ``herz`` or ``morrey_herz``.

    ``v`` weights the normalising ball masses, ``omega`` the L^q integrals.
    """

    kind: str
    q: float
    p: float = 1.0
    alpha: float = 0.0
    lam: float = 0.0
    v: Weight = Weight.power(0.0, 1)
    omega: Weight = Weight.power(0.0, 1)

    def __post_init__(self):
        if self.kind not in ("lebesgue", "central_morrey", "herz", "morrey_herz"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if not self.q >= 1:
            raise ValueError("q must be >= 1")
        if self.v.n != self.omega.n:
            raise ValueError("weights v and omega live in different dimensions")
        if self.kind in ("herz", "morrey_herz"):
            if not self.p > 0:
                raise ValueError("p must be positive")
            if self.q == 1:
                warnings.warn("Herz-type norms with q = 1 lie outside the classical range 1 < q", OutOfRangeWarning)
        if self.kind == "central_morrey" and not 1 + self.lam * self.q > 0:
            raise ValueError("central Morrey norms need 1 + lam*q > 0")
        if self.kind == "morrey_herz" and self.lam < 0:
            raise ValueError("Morrey-Herz norms need lam >= 0")

    @property
    def n(self):
        return self.omega.n

    @classmethod
    def lebesgue(cls, q, omega):
        return cls("lebesgue", q, omega=omega, v=omega)

    @classmethod
    def central_morrey(cls, q, lam, v, omega):
        return cls("central_morrey", q, lam=lam, v=v, omega=omega)

    @classmethod
    def herz(cls, alpha, p, q, v, omega):
        return cls("herz", q, p=p, alpha=alpha, v=v, omega=omega)

    @classmethod
    def morrey_herz(cls, alpha, lam, p, q, v, omega):
        return cls("morrey_herz", q, p=p, alpha=alpha, lam=lam, v=v, omega=omega)


@dataclass(frozen=True)
class DyadicRange:
    k_min: int = -40
    k_max: int = 40
    R_grid: tuple = tuple(2.0 ** k for k in range(-30, 31))
    k0_grid: tuple = tuple(range(-30, 31))

    def __post_init__(self):
        if not self.k_min < self.k_max:
            raise ValueError("k_min must be smaller than k_max")
        if not self.R_grid or not self.k0_grid:
            raise ValueError("grids must be nonempty")
        object.__setattr__(self, "R_grid", tuple(float(r) for r in self.R_grid))
        object.__setattr__(self, "k0_grid", tuple(int(k) for k in self.k0_grid))

    def widened(self, extra):
        return DyadicRange(self.k_min - extra, self.k_max + extra, self.R_grid, self.k0_grid)


DEFAULT_RANGE = DyadicRange()


# --------------------------------------------------------------------------
# L^q_omega integrals over {a < |x| <= b}


def _symbolic_power_case(f, *weights):
    return f.is_symbolic and all(w.is_power for w in weights)


def _radial_moment(f, q, omega, a, b, quad):
    """int_{a<|x|<=b} |f|^q omega dx; inf when it diverges."""
    n = omega.n
    if f.is_symbolic and omega.is_power:
        return sphere_area(n) * f.radial_power().abs_moment(q, omega.gamma + n - 1.0, a, b, quad)
    if f.is_radial:
        g = f.radial_power() if f.is_symbolic else None
        pts = g.breakpoints() if g is not None else ()

        def h(r):
            return np.abs(f.radial_values(r)) ** q * omega.profile(r) * np.power(r, n - 1.0)

        if a > 0 and math.isfinite(b):
            value = adaptive_gl(h, a, b, quad, [p for p in pts if a < p < b], strict=False).value
        else:
            value = integrate_log_radial(h, a, b, quad, pts, strict=False).value
        return sphere_area(n) * value
    return _nonradial_moment(f, q, omega, a, b, quad)


def _nonradial_moment(f, q, omega, a, b, quad):
    n = omega.n
    if n == 1:

        def h1(r):
            pos = np.abs(f(r.reshape(-1, 1))) ** q * omega(r.reshape(-1, 1))
            neg = np.abs(f(-r.reshape(-1, 1))) ** q * omega(-r.reshape(-1, 1))
            return pos + neg

        if a > 0 and math.isfinite(b):
            return adaptive_gl(h1, a, b, quad, strict=False).value
        return integrate_log_radial(h1, a, b, quad, strict=False).value
    dirs, wts = sphere_rule(n, quad.seed)

    def h(r):
        pts = r[:, None, None] * dirs[None, :, :]
        flat = pts.reshape(-1, n)
        vals = (np.abs(f(flat)) ** q * omega(flat)).reshape(r.size, -1)
        return (vals @ wts) * np.power(r, n - 1.0)

    if a > 0 and math.isfinite(b):
        return adaptive_gl(h, a, b, quad, strict=False).value
    return integrate_log_radial(h, a, b, quad, strict=False).value


def annulus_norm(f, k, q, omega, quad=DEFAULT_QUAD):
    """(int_{C_k} |f|^q omega)^(1/q) over C_k = {2^(k-1) < |x| <= 2^k}.

    Closed form for symbolic f with a power weight; quadrature otherwise.
    """
    if not q >= 1:
        raise ValueError("q must be >= 1")
    value = _radial_moment(f, q, omega, 2.0 ** (k - 1), 2.0 ** k, quad)
    if not math.isfinite(value):
        raise DivergentNorm(f"|f|^q omega is not integrable on the annulus C_{k}")
    return value ** (1.0 / q)


def _centered_mass(v, radius, quad):
    if v.is_power:
        return sphere_area(v.n) * radius ** (v.n + v.gamma) / (v.n + v.gamma)
    return ball_mass(v, np.zeros(v.n), radius, quad)


def lebesgue_norm(f, q, omega, quad=DEFAULT_QUAD, range_=DEFAULT_RANGE):
    if _symbolic_power_case(f, omega):
        value = _radial_moment(f, q, omega, 0.0, math.inf, quad)
        return DIVERGENT if not math.isfinite(value) else value ** (1.0 / q)
    warnings.warn("L^q norm of a non-symbolic function summed over the dyadic range only", TruncationWarning)
    value = _radial_moment(f, q, omega, 2.0 ** (range_.k_min - 1), 2.0 ** range_.k_max, quad)
    return DIVERGENT if not math.isfinite(value) else value ** (1.0 / q)


# --------------------------------------------------------------------------
# central Morrey


def _morrey_norm(spec, f, range_, quad):
    n, q = spec.n, spec.q
    power = _symbolic_power_case(f, spec.v, spec.omega)
    scale = spec.lam + 1.0 / q
    if not power:
        warnings.warn("central Morrey supremum taken over R_grid only", TruncationWarning)
        best = 0.0
        for radius in range_.R_grid:
            mass = _radial_moment(f, q, spec.omega, 0.0, radius, quad)
            if not math.isfinite(mass):
                return DIVERGENT
            best = max(best, mass ** (1.0 / q) / _centered_mass(spec.v, radius, quad) ** scale)
        return best

    g = f.radial_power()
    if g.is_zero():
        return 0.0
    area = sphere_area(n)
    s = spec.omega.gamma + n - 1.0
    v_coef = area / (n + spec.v.gamma)
    v_pow = (n + spec.v.gamma) * scale  # v(B_R)^scale = v_coef^scale R^v_pow

    if not math.isfinite(g.abs_moment(q, s, 0.0, 1.0, quad)):
        return DIVERGENT

    def quotient(radius):
        mass = area * g.abs_moment(q, s, 0.0, radius, quad)
        return mass ** (1.0 / q) / (v_coef ** scale * radius ** v_pow)

    best = 0.0
    # behaviour as R -> 0: |f| ~ |c| r^p gives mass ~ area |c|^q R^e / e
    bottom = g.bottom()
    if bottom is not None:
        c, p = bottom
        e = q * p + spec.omega.gamma + n
        h = e / q - v_pow
        if h < -1e-12:
            return DIVERGENT
        if abs(h) <= 1e-12:
            best = max(best, (area * abs(c) ** q / e) ** (1.0 / q) / v_coef ** scale)
    top = g.top()
    if top is not None:
        c, p = top
        e = q * p + spec.omega.gamma + n
        if e > 0:
            h = e / q - v_pow
            if h > 1e-12:
                return DIVERGENT
            if abs(h) <= 1e-12:
                best = max(best, (area * abs(c) ** q / e) ** (1.0 / q) / v_coef ** scale)
        elif e == 0 and v_pow <= 0:
            return DIVERGENT

    lo_edge = min(min(range_.R_grid), g.asymptotic_bottom() / 2 if g.bottom() is not None else math.inf)
    hi_edge = max(max(range_.R_grid), 2 * g.asymptotic_top() if g.top() is not None else 0.0)
    radii = set(range_.R_grid) | set(g.breakpoints())
    lo_u, hi_u = math.log2(max(lo_edge, 1e-300)), math.log2(hi_edge)
    radii |= set(np.exp2(np.linspace(lo_u, hi_u, int(4 * (hi_u - lo_u)) + 2)).tolist())
    radii = sorted(r for r in radii if r > 0 and math.isfinite(r))
    increments = [g.abs_moment(q, s, lo, hi, quad) for lo, hi in zip([0.0] + radii[:-1], radii)]
    masses = area * np.cumsum(increments)
    values = [m ** (1.0 / q) / (v_coef ** scale * r ** v_pow) for m, r in zip(masses, radii)]
    j = int(np.argmax(values))
    best = max(best, values[j])
    if 0 < j < len(radii) - 1:
        res = minimize_scalar(lambda u: -quotient(2.0 ** u), bounds=(math.log2(radii[j - 1]), math.log2(radii[j + 1])),
                              method="bounded", options={"xatol": 1e-10})
        best = max(best, -res.fun)
    return best


# --------------------------------------------------------------------------
# Herz and Morrey-Herz


def _shell_terms(spec, f, ks, quad):
    """v(B_k)^(alpha p/n) ||f chi_k||^p for each k in ks (inf when a shell diverges)."""
    out = []
    for k in ks:
        mass = _radial_moment(f, spec.q, spec.omega, 2.0 ** (k - 1), 2.0 ** k, quad)
        if not math.isfinite(mass):
            return None
        if mass == 0.0:
            out.append(0.0)
            continue
        vb = _centered_mass(spec.v, 2.0 ** k, quad)
        out.append(math.exp(spec.alpha * spec.p / spec.n * math.log(vb) + spec.p / spec.q * math.log(mass)))
    return np.asarray(out, dtype=float)


@dataclass
class _DyadicLayout:
    """Shell terms on an explicit window plus exact geometric end behaviour."""

    ks: np.ndarray
    terms: np.ndarray
    ratio_below: float  # T_{k-1}/T_k for k below the window (None: zero there)
    ratio_above: float  # T_{k+1}/T_k above the window (None: zero there)


def _layout(spec, f, range_, quad, extra_k=()):
    n, q, p = spec.n, spec.q, spec.p
    g = f.radial_power()
    k_lo, k_hi = range_.k_min, range_.k_max
    if extra_k:
        k_lo, k_hi = min(k_lo, min(extra_k)), max(k_hi, max(extra_k))
    growth = spec.alpha * p * (1.0 + spec.v.gamma / n)
    ratio_below = ratio_above = None
    bottom, top = g.bottom(), g.top()
    if bottom is not None:
        e = q * bottom[1] + spec.omega.gamma + n
        ratio_below = 2.0 ** -(growth + p * e / q)
        k_lo = min(k_lo, int(math.floor(math.log2(g.asymptotic_bottom()))))
    elif not g.is_zero():
        k_lo = min(k_lo, int(math.floor(math.log2(g.pieces[0].lo))) + 1)
    if top is not None:
        e = q * top[1] + spec.omega.gamma + n
        ratio_above = 2.0 ** (growth + p * e / q)
        k_hi = max(k_hi, int(math.ceil(math.log2(g.asymptotic_top()))) + 1)
    elif not g.is_zero():
        k_hi = max(k_hi, int(math.ceil(math.log2(g.pieces[-1].hi))))
    ks = np.arange(k_lo, k_hi + 1)
    terms = _shell_terms(spec, f, ks, quad)
    return _DyadicLayout(ks, terms, ratio_below, ratio_above)


def _herz_norm(spec, f, range_, quad):
    if not _symbolic_power_case(f, spec.v, spec.omega):
        warnings.warn("Herz sum truncated to [k_min, k_max] without a tail estimate", TruncationWarning)
        terms = _shell_terms(spec, f, range(range_.k_min, range_.k_max + 1), quad)
        if terms is None:
            return DIVERGENT
        return float(np.sum(terms)) ** (1.0 / spec.p)
    if f.radial_power().is_zero():
        return 0.0
    lay = _layout(spec, f, range_, quad)
    if lay.terms is None:
        return DIVERGENT
    total = float(np.sum(lay.terms))
    if lay.ratio_below is not None and lay.terms[0] > 0:
        if lay.ratio_below >= TAIL_RATIO_LIMIT:
            return DIVERGENT
        total += lay.terms[0] * lay.ratio_below / (1.0 - lay.ratio_below)
    if lay.ratio_above is not None and lay.terms[-1] > 0:
        if lay.ratio_above >= TAIL_RATIO_LIMIT:
            return DIVERGENT
        total += lay.terms[-1] * lay.ratio_above / (1.0 - lay.ratio_above)
    return total ** (1.0 / spec.p)


def _morrey_herz_norm(spec, f, range_, quad):
    n, p, lam = spec.n, spec.p, spec.lam
    if lam == 0:
        return _herz_norm(spec, f, range_, quad)
    power = _symbolic_power_case(f, spec.v, spec.omega)
    if not power:
        warnings.warn("Morrey-Herz supremum taken over the k0 grid with sums truncated at k_min", TruncationWarning)
        ks = list(range(min(range_.k_min, min(range_.k0_grid)), max(range_.k0_grid) + 1))
        terms = _shell_terms(spec, f, ks, quad)
        if terms is None:
            return DIVERGENT
        partial = np.cumsum(terms)
        best = 0.0
        for k0 in range_.k0_grid:
            vb = _centered_mass(spec.v, 2.0 ** k0, quad)
            best = max(best, vb ** (-lam / n) * partial[k0 - ks[0]] ** (1.0 / p))
        return best
    if f.radial_power().is_zero():
        return 0.0
    lay = _layout(spec, f, range_, quad, extra_k=range_.k0_grid)
    if lay.terms is None:
        return DIVERGENT
    v_rate = lam * (1.0 + spec.v.gamma / n)  # v(B_k0)^(-lam/n) ~ 2^(-k0 v_rate)
    below = 0.0
    best = 0.0
    if lay.ratio_below is not None and lay.terms[0] > 0:
        if lay.ratio_below >= 1.0:
            return DIVERGENT
        below = lay.terms[0] * lay.ratio_below / (1.0 - lay.ratio_below)
        # as k0 -> -inf the quotient behaves like 2^(k0 h)
        h = -math.log2(lay.ratio_below) / p - v_rate
        if h < -1e-12:
            return DIVERGENT
        if abs(h) <= 1e-12:
            k = int(lay.ks[0])
            vb = _centered_mass(spec.v, 2.0 ** k, quad)
            best = vb ** (-lam / n) * (lay.terms[0] / (1.0 - lay.ratio_below)) ** (1.0 / p)
    partial = below + np.cumsum(lay.terms)
    vb = np.array([_centered_mass(spec.v, 2.0 ** int(k), quad) for k in lay.ks])
    best = max(best, float(np.max(vb ** (-lam / n) * partial ** (1.0 / p))))
    if lay.ratio_above is not None and lay.terms[-1] > 0:
        rho = lay.ratio_above
        if rho > 1.0:
            h = math.log2(rho) / p - v_rate
            if h > 1e-12:
                return DIVERGENT
            if abs(h) <= 1e-12:
                # partial sums grow like T_k rho/(rho - 1); the quotient tends to a constant
                k = int(lay.ks[-1])
                limit = vb[-1] ** (-lam / n) * (lay.terms[-1] * rho / (rho - 1.0)) ** (1.0 / p)
                best = max(best, limit)
    return best


def space_norm(spec, f, range_=DEFAULT_RANGE, quad=DEFAULT_QUAD):
    """Norm of ``f`` in the space described by ``spec``; DIVERGENT when infinite.

    Symbolic functions with power weights are handled exactly: end zones where
    f is a single monomial contribute closed-form geometric tails or power-law
    limits.  Other inputs are truncated to ``range_`` with a TruncationWarning.
    """
    if spec.kind == "lebesgue":
        return lebesgue_norm(f, spec.q, spec.omega, quad, range_)
    if spec.kind == "central_morrey":
        return _morrey_norm(spec, f, range_, quad)
    if spec.kind == "herz":
        return _herz_norm(spec, f, range_, quad)
    return _morrey_herz_norm(spec, f, range_, quad)


def norm_is_finite(value):
    return not is_divergent(value) and math.isfinite(value)
