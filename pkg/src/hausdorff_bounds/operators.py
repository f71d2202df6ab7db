"""Matrix families, kernels and pointwise evaluation of multilinear Hausdorff
operators.

For radial inputs and families with |A_i(y) x| = c_i |y|^{e_i} |x| (scalar
diagonal matrices and scaled rotations) on a radial kernel support, the
operator output is again a piecewise power law in t = |x|.  It is obtained by
integrating the product of the composed profiles over r = |y| in closed form;
the integration limits are monomials in t, and between the values of t where
two limits cross the active limits do not change.  Everything else is
integrated numerically.
"""

from dataclasses import dataclass, field
import itertools
import math
import re

import numpy as np
from scipy.stats import qmc

from .errors import DivergentIntegral, SingularMatrix
from .powerlaw import RadialPower
from .quadrature import (
    DEFAULT_QUAD,
    adaptive_gl,
    gauss_legendre,
    integrate_log_radial,
    qmc_mean,
    sphere_area,
    sphere_rule,
)

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_FACTOR = re.compile(rf"^(?:(?P<num>{_NUMBER})|(?P<var>\|y\||y1|t)(?:\^(?P<exp>\(?{_NUMBER}\)?|{_NUMBER}))?)$")


def _parse_product(expr):
    """Parse ``c*var^e`` style products into (coef, variable, exponent)."""
    coef, var, exp = 1.0, "const", 0.0
    text = expr.replace(" ", "")
    if not text:
        raise ValueError("empty expression")
    for part in text.split("*"):
        m = _FACTOR.match(part)
        if m is None:
            raise ValueError(f"cannot parse factor {part!r} in {expr!r}")
        if m.group("num") is not None:
            coef *= float(m.group("num"))
            continue
        name = {"|y|": "norm", "y1": "y1", "t": "y1"}[m.group("var")]
        if var not in ("const", name):
            raise ValueError(f"{expr!r} mixes |y| and y1")
        var = name
        exp += float(m.group("exp").strip("()")) if m.group("exp") else 1.0
    if var == "const":
        exp = 0.0
    return coef, var, exp


def frobenius_norm(matrix):
    """(sum |a_ij|^2)^(1/2); bounds |A x| <= ||A|| |x|."""
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    return float(np.sqrt(np.sum(a * a)))


@dataclass(frozen=True)
class ScalarMap:
    """s(y) = coef * u^exponent with u = |y|, u = y1 (odd extension) or u = 1."""

    coef: float = 1.0
    var: str = "norm"
    exponent: float = 1.0

    @classmethod
    def parse(cls, expr):
        if isinstance(expr, (int, float)):
            return cls(float(expr), "const", 0.0)
        return cls(*_parse_product(str(expr)))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            y = y.reshape(-1, 1)
        if self.var == "const":
            return np.full(y.shape[0], self.coef)
        if self.var == "norm":
            u = np.linalg.norm(y, axis=1)
            with np.errstate(divide="ignore"):
                return self.coef * np.power(u, self.exponent)
        u = y[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.coef * np.sign(u) * np.power(np.abs(u), self.exponent)

    def radial_form(self, n):
        """(c, e) with |s(y)| = c |y|^e, or None when |s| is not radial in R^n."""
        if self.var == "const":
            return abs(self.coef), 0.0
        if self.var == "norm" or n == 1:
            return abs(self.coef), self.exponent
        return None

    def to_json(self):
        if self.var == "const":
            return repr(self.coef)
        name = "|y|" if self.var == "norm" else "y1"
        return f"{self.coef!r}*{name}^{self.exponent!r}"


@dataclass(frozen=True)
class MatrixFamily:
    """y -> A(y): ``diag_scalar`` s(y) I_n, ``rotation`` scale(y) R(angle(y)) in the
    (x1, x2) plane, ``matrix`` a fixed invertible matrix, ``table`` a callable."""

    kind: str
    n: int
    scalar: ScalarMap = ScalarMap(1.0, "const", 0.0)
    angle: ScalarMap = ScalarMap(0.0, "const", 0.0)
    matrix: tuple = ()
    table: object = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("diag_scalar", "rotation", "matrix", "table"):
            raise ValueError(f"unknown matrix family {self.kind!r}")
        if self.kind == "rotation" and self.n < 2:
            raise ValueError("rotation families need n >= 2")
        if self.kind == "matrix":
            a = np.asarray(self.matrix, dtype=float)
            if a.shape != (self.n, self.n):
                raise ValueError("matrix has the wrong shape")
            if abs(np.linalg.det(a)) < 1e-300:
                raise SingularMatrix("fixed matrix is singular")
            object.__setattr__(self, "matrix", tuple(map(tuple, a)))
        if self.kind == "table" and self.table is None:
            raise ValueError("table families need a callable")

    @classmethod
    def diag_scalar(cls, expr, n):
        return cls("diag_scalar", int(n), scalar=ScalarMap.parse(expr))

    @classmethod
    def rotation(cls, angle, n=2, scale=1.0):
        return cls("rotation", int(n), scalar=ScalarMap.parse(scale), angle=ScalarMap.parse(angle))

    @classmethod
    def fixed(cls, matrix):
        a = np.asarray(matrix, dtype=float)
        return cls("matrix", a.shape[0], matrix=a)

    @classmethod
    def from_callable(cls, func, n):
        return cls("table", int(n), table=func)

    @classmethod
    def from_json(cls, data, n):
        kind = data["kind"]
        if kind == "diag_scalar":
            return cls.diag_scalar(data["expr"], n)
        if kind == "rotation":
            return cls.rotation(data.get("angle", 0.0), n, data.get("scale", 1.0))
        if kind == "matrix":
            return cls.fixed(data["matrix"])
        raise ValueError(f"matrix family kind {kind!r} cannot be read from JSON")

    def to_json(self):
        if self.kind == "diag_scalar":
            return {"kind": "diag_scalar", "expr": self.scalar.to_json()}
        if self.kind == "rotation":
            return {"kind": "rotation", "angle": self.angle.to_json(), "scale": self.scalar.to_json()}
        if self.kind == "matrix":
            return {"kind": "matrix", "matrix": [list(r) for r in self.matrix]}
        return {"kind": "table"}

    # matrices ---------------------------------------------------------
    def matrices(self, y):
        """Stack of A(y) for an (N, n) array of points."""
        y = np.asarray(y, dtype=float).reshape(-1, self.n)
        count = y.shape[0]
        if self.kind == "diag_scalar":
            return self.scalar(y)[:, None, None] * np.eye(self.n)[None]
        if self.kind == "rotation":
            th = self.angle(y)
            out = np.tile(np.eye(self.n), (count, 1, 1))
            out[:, 0, 0] = np.cos(th)
            out[:, 0, 1] = -np.sin(th)
            out[:, 1, 0] = np.sin(th)
            out[:, 1, 1] = np.cos(th)
            return self.scalar(y)[:, None, None] * out
        if self.kind == "matrix":
            return np.tile(np.asarray(self.matrix), (count, 1, 1))
        return np.stack([np.asarray(self.table(p), dtype=float) for p in y])

    def apply(self, y, x):
        """A(y) x for every row of y."""
        return np.einsum("kij,j->ki", self.matrices(y), np.asarray(x, dtype=float).reshape(self.n))

    def norms(self, y):
        """(||A(y)||, ||A(y)^-1||, |det A(y)|) with Frobenius norms."""
        y = np.asarray(y, dtype=float).reshape(-1, self.n)
        if self.kind in ("diag_scalar", "rotation"):
            s = np.abs(self.scalar(y))
            root = math.sqrt(self.n)
            with np.errstate(divide="ignore"):
                return root * s, root / s, s ** self.n
        mats = self.matrices(y)
        dets = np.abs(np.linalg.det(mats))
        if np.any(dets <= 1e-300):
            raise SingularMatrix("matrix family is singular at a sample point")
        inv = np.linalg.inv(mats)
        return np.sqrt(np.sum(mats ** 2, axis=(1, 2))), np.sqrt(np.sum(inv ** 2, axis=(1, 2))), dets

    def radial_form(self):
        """(c, e) with |A(y) x| = c |y|^e |x| for all x, or None."""
        if self.kind in ("diag_scalar", "rotation"):
            return self.scalar.radial_form(self.n)
        return None


@dataclass(frozen=True)
class KernelSpec:
    """Kernel coef * |y|^power on a support, read under one of three conventions.

    ``hausdorff_phi``: density Phi(y)/|y|^n.  ``hybrid_phi``: density phi(y).
    ``hardy_cesaro_psi``: density psi(y) on [0, 1]^n.  Supports are
    ``("all",)``, ``("annulus", r0, r1)`` (r0 <= |y| <= r1) and
    ``("cube", lo, hi)`` ([lo, hi]^n).  A ``sampled`` kernel supplies the
    function itself as a callable of (N, n) points.
    """

    convention: str = "hausdorff_phi"
    coef: float = 1.0
    power: float = 0.0
    support: tuple = ("all",)
    sampled: object = field(default=None, compare=False)

    def __post_init__(self):
        if self.convention not in ("hausdorff_phi", "hybrid_phi", "hardy_cesaro_psi"):
            raise ValueError(f"unknown kernel convention {self.convention!r}")
        support = tuple(self.support)
        if self.convention == "hardy_cesaro_psi" and support == ("all",):
            support = ("cube", 0.0, 1.0)
        if support[0] not in ("all", "annulus", "cube"):
            raise ValueError(f"unknown kernel support {support[0]!r}")
        if support[0] != "all" and not support[1] < support[2]:
            raise ValueError("support bounds must be increasing")
        if support[0] == "annulus" and support[1] < 0:
            raise ValueError("annulus radii must be nonnegative")
        if self.convention == "hardy_cesaro_psi" and support != ("cube", 0.0, 1.0):
            raise ValueError("Hardy-Cesaro kernels live on [0, 1]^n")
        object.__setattr__(self, "support", support)

    @classmethod
    def from_json(cls, data):
        convention = data.get("convention", "hausdorff_phi")
        coef, var, exp = _parse_product(str(data.get("expr", "1")))
        if var == "y1":
            raise ValueError("kernel expressions may only use |y|")
        sup = data.get("support", "all")
        if sup == "all" or sup is None:
            support = ("all",)
        elif "annulus" in sup:
            support = ("annulus", float(sup["annulus"][0]), _float_or_inf(sup["annulus"][1]))
        elif "cube" in sup:
            support = ("cube", float(sup["cube"][0]), float(sup["cube"][1]))
        else:
            raise ValueError(f"unknown support {sup!r}")
        return cls(convention, coef, exp, support)

    def to_json(self):
        sup = "all"
        if self.support[0] == "annulus":
            sup = {"annulus": [self.support[1], "inf" if math.isinf(self.support[2]) else self.support[2]]}
        elif self.support[0] == "cube":
            sup = {"cube": [self.support[1], self.support[2]]}
        return {"kind": "closed", "expr": f"{self.coef!r}*|y|^{self.power!r}", "support": sup,
                "convention": self.convention}

    def scaled(self, c):
        return KernelSpec(self.convention, self.coef * c, self.power, self.support, self.sampled)

    def density_power(self, n):
        """Exponent d with density = coef |y|^d on the support."""
        return self.power - n if self.convention == "hausdorff_phi" else self.power

    def density(self, y):
        y = np.asarray(y, dtype=float)
        n = y.shape[1]
        r = np.linalg.norm(y, axis=1)
        inside = self.indicator(y)
        if self.sampled is not None:
            base = np.asarray(self.sampled(y), dtype=float)
            if self.convention == "hausdorff_phi":
                with np.errstate(divide="ignore", invalid="ignore"):
                    base = base / r ** n
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                base = self.coef * np.power(r, self.density_power(n))
        return np.where(inside, base, 0.0)

    def indicator(self, y):
        y = np.asarray(y, dtype=float)
        if self.support[0] == "all":
            return np.ones(y.shape[0], dtype=bool)
        if self.support[0] == "annulus":
            r = np.linalg.norm(y, axis=1)
            return (r >= self.support[1]) & (r <= self.support[2])
        return np.all((y >= self.support[1]) & (y <= self.support[2]), axis=1)

    def radial_segments(self, n):
        """[(angular measure, r_lo, r_hi)] when the support is a union of
        spherical shells in R^n, else None."""
        if self.sampled is not None:
            return None
        kind = self.support[0]
        if kind == "all":
            return [(sphere_area(n), 0.0, math.inf)]
        if kind == "annulus":
            return [(sphere_area(n), self.support[1], self.support[2])]
        if n != 1:
            return None
        lo, hi = self.support[1], self.support[2]
        out = []
        if hi > 0:
            out.append((1.0, max(lo, 0.0), hi))
        if lo < 0:
            out.append((1.0, max(-hi, 0.0), -lo))
        return out


def _float_or_inf(v):
    return math.inf if isinstance(v, str) and v.lower() in ("inf", "infinity") else float(v)


@dataclass(frozen=True)
class OperatorSpec:
    m: int
    n: int
    kernel: KernelSpec
    families: tuple

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(self.families))
        if self.m < 1 or len(self.families) != self.m:
            raise ValueError("need exactly m matrix families")
        if any(f.n != self.n for f in self.families):
            raise ValueError("family dimension differs from n")
        if self.kernel.convention == "hardy_cesaro_psi":
            if any(f.kind != "diag_scalar" for f in self.families):
                raise ValueError("Hardy-Cesaro operators need scalar diagonal families")

    @classmethod
    def from_json(cls, data):
        n = int(data["n"])
        fams = [MatrixFamily.from_json(f, n) for f in data["families"]]
        return cls(int(data.get("m", len(fams))), n, KernelSpec.from_json(data["kernel"]), tuple(fams))

    def to_json(self):
        return {"m": self.m, "n": self.n, "kernel": self.kernel.to_json(),
                "families": [f.to_json() for f in self.families]}

    def with_kernel(self, kernel):
        return OperatorSpec(self.m, self.n, kernel, self.families)

    def radial_data(self):
        """(segments, [(c_i, e_i)]) when the operator maps radial inputs radially
        through a one-dimensional r-integral, else None."""
        segs = self.kernel.radial_segments(self.n)
        forms = [f.radial_form() for f in self.families]
        if segs is None or any(fm is None for fm in forms):
            return None
        return segs, forms

    def line_data(self):
        """(segments, [(c_i, e_i)], d) reducing the operator on radial inputs to
        sum_seg measure * int coef u^d prod f_i(c_i u^{e_i} |x|) du, else None.

        Covers radial kernels and, on a cube with constant density, families
        whose scale depends on y1 only (u = |y1|, cross-section integrated out).
        """
        radial = self.radial_data()
        if radial is not None:
            return radial[0], radial[1], self.kernel.density_power(self.n) + self.n - 1.0
        kern = self.kernel
        if kern.support[0] != "cube" or kern.sampled is not None or kern.density_power(self.n) != 0:
            return None
        forms = []
        for fam in self.families:
            if fam.kind not in ("diag_scalar", "rotation") or fam.scalar.var not in ("y1", "const"):
                return None
            forms.append((abs(fam.scalar.coef), fam.scalar.exponent if fam.scalar.var == "y1" else 0.0))
        lo, hi = kern.support[1], kern.support[2]
        side = (hi - lo) ** (self.n - 1)
        segs = [(side, a, b) for a, b in ((max(lo, 0.0), hi), (max(-hi, 0.0), -lo)) if b > a]
        return segs, forms, 0.0

    def sample_points(self, count=256, seed=0):
        """Deterministic points of the kernel support (used for essential suprema)."""
        n = self.n
        sampler = qmc.Sobol(d=n, scramble=True, seed=seed)
        u = sampler.random_base2(int(round(math.log2(count))))
        kind = self.kernel.support[0]
        if kind == "cube":
            lo, hi = self.kernel.support[1], self.kernel.support[2]
            return lo + (hi - lo) * u
        r_lo, r_hi = (0.0, math.inf) if kind == "all" else self.kernel.support[1:]
        a = math.log2(r_lo) if r_lo > 0 else -20.0
        b = math.log2(r_hi) if math.isfinite(r_hi) else 20.0
        dirs = np.random.default_rng(seed).normal(size=(u.shape[0], n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        return dirs * np.exp2(a + (b - a) * u[:, :1])


def rho_bound(spec, sample=None):
    """ess sup over y and i of ||A_i(y)|| ||A_i(y)^-1|| (exactly n for scalar and rotation families)."""
    best = 0.0
    for fam in spec.families:
        if fam.kind in ("diag_scalar", "rotation"):
            best = max(best, float(fam.n))
            continue
        pts = spec.sample_points() if sample is None else np.asarray(sample, dtype=float).reshape(-1, spec.n)
        if pts.size == 0:
            raise ValueError("sample must be nonempty")
        norm, inv_norm, _ = fam.norms(pts)
        best = max(best, float(np.max(norm * inv_norm)))
    return best


# --------------------------------------------------------------------------
# symbolic evaluation


class NotSymbolic(Exception):
    """The closed-form route does not apply to this operator/input pair."""


def _bound_intervals(piece_lo, piece_hi, c, e):
    """Limits on r (as (kappa, nu) meaning kappa t^nu) for c t r^e in (lo, hi]."""
    if e > 0:
        lower = (0.0, 0.0) if piece_lo == 0 else ((piece_lo / c) ** (1 / e), -1 / e)
        upper = (math.inf, 0.0) if math.isinf(piece_hi) else ((piece_hi / c) ** (1 / e), -1 / e)
    else:
        lower = (0.0, 0.0) if math.isinf(piece_hi) else ((piece_hi / c) ** (1 / e), -1 / e)
        upper = (math.inf, 0.0) if piece_lo == 0 else ((piece_lo / c) ** (1 / e), -1 / e)
    return lower, upper


def _bound_value(b, t):
    kappa, nu = b
    if kappa == 0.0 or math.isinf(kappa):
        return kappa
    log_value = math.log(kappa) + nu * math.log(t)
    if log_value > 709.0:
        return math.inf
    return math.exp(log_value)


def _crossings(bounds):
    out = set()
    finite = [b for b in bounds if 0 < b[0] < math.inf]
    for (k1, v1), (k2, v2) in itertools.combinations(finite, 2):
        if abs(v1 - v2) > 1e-14:
            log_t = math.log(k2 / k1) / (v1 - v2)
            if abs(log_t) < 700.0:  # crossings beyond the double range never matter
                out.add(math.exp(log_t))
    return sorted(t for t in out if 0 < t < math.inf)


def operator_output(spec, functions):
    """The operator applied to symbolic radial inputs, as a RadialPower in |x|.

    Raises NotSymbolic when the operator or inputs fall outside the closed-form
    route, and DivergentIntegral when the defining integral diverges.
    """
    data = spec.line_data()
    if data is None or not all(f.is_symbolic for f in functions):
        raise NotSymbolic("operator or inputs are not radial power laws")
    segments, forms, d = data
    coef = spec.kernel.coef
    profiles = [f.radial_power() for f in functions]
    terms = []
    for measure, r_lo, r_hi in segments:
        for choice in itertools.product(*[p.pieces for p in profiles]):
            lowers = [(r_lo, 0.0)]
            uppers = [(r_hi, 0.0)]
            t_lo, t_hi = 0.0, math.inf  # constant families only restrict t = |x|
            factors = [(coef * measure, d, 0.0)]  # (coef, power of r, power of t)
            for piece, (c, e) in zip(choice, forms):
                if e == 0.0:
                    t_lo, t_hi = max(t_lo, piece.lo / c), min(t_hi, piece.hi / c)
                else:
                    lo_b, hi_b = _bound_intervals(piece.lo, piece.hi, c, e)
                    lowers.append(lo_b)
                    uppers.append(hi_b)
                factors = [(a0 * a * c ** p, pr + e * p, pt + p) for a0, pr, pt in factors for a, p in piece.terms]
            if not t_hi > t_lo:
                continue
            for a, p, t0, t1 in _integrate_between(factors, lowers, uppers):
                lo, hi = max(t0, t_lo), min(t1, t_hi)
                if hi > lo:
                    terms.append((a, p, lo, hi))
    return RadialPower.from_terms(terms)


def _integrate_between(factors, lowers, uppers):
    """Terms (coef, power, t_lo, t_hi) of t -> int_{max lowers}^{min uppers} sum a r^P t^Q dr."""
    cuts = _crossings(lowers + uppers)
    edges = [0.0] + cuts + [math.inf]
    out = []
    for t0, t1 in zip(edges[:-1], edges[1:]):
        if t0 == 0.0:
            rep = t1 / 2.0 if math.isfinite(t1) else 1.0
        elif math.isinf(t1):
            rep = 2.0 * t0
        else:
            rep = math.exp(0.5 * (math.log(t0) + math.log(t1)))
        lo = max(lowers, key=lambda b: _bound_value(b, rep))
        hi = min(uppers, key=lambda b: _bound_value(b, rep))
        if not _bound_value(hi, rep) > _bound_value(lo, rep):
            continue
        for a, P, Q in factors:
            k = P + 1.0
            if abs(k) < 1e-12:
                raise NotSymbolic("logarithmic r-integral")
            if math.isinf(hi[0]):
                if k >= 0:
                    raise DivergentIntegral("kernel integral diverges at |y| -> infinity")
            else:
                out.append((a * hi[0] ** k / k, Q + hi[1] * k, t0, t1))
            if lo[0] == 0.0:
                if k <= 0:
                    raise DivergentIntegral("kernel integral diverges at |y| -> 0")
            else:
                out.append((-a * lo[0] ** k / k, Q + lo[1] * k, t0, t1))
    return out


# --------------------------------------------------------------------------
# numerical evaluation


def _radial_numeric(spec, functions, t, quad):
    segments, forms, d = spec.line_data()
    pts = []
    for f, (c, e) in zip(functions, forms):
        if f.is_symbolic and e != 0:
            pts.extend((b / (c * t)) ** (1.0 / e) for b in f.radial_power().breakpoints())

    def h(r):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = spec.kernel.coef * np.power(r, d)
            for f, (c, e) in zip(functions, forms):
                out = out * f.radial_values(c * np.power(r, e) * t)
        return np.nan_to_num(out, nan=0.0, posinf=0.0, neginf=0.0)

    total, err = 0.0, 0.0
    for measure, r_lo, r_hi in segments:
        inner = [p for p in pts if r_lo < p < r_hi]
        res = integrate_log_radial(h, r_lo, r_hi, quad, inner, strict=False)
        if not math.isfinite(res.value):
            raise DivergentIntegral("kernel integral diverges")
        total += measure * res.value
        err += measure * res.error
    return total, err


def _integrand_points(spec, functions, x):
    def g(y):
        y = np.asarray(y, dtype=float).reshape(-1, spec.n)
        out = spec.kernel.density(y)
        for f, fam in zip(functions, spec.families):
            out = out * f(fam.apply(y, x))
        return np.nan_to_num(out, nan=0.0, posinf=0.0, neginf=0.0)

    return g


def _general_numeric(spec, functions, x, quad):
    return integrate_over_support(spec, _integrand_points(spec, functions, x), quad)


def integrate_over_support(spec, g, quad=DEFAULT_QUAD):
    """(value, error) of the integral of g over the kernel support.

    ``g`` maps an (N, n) array of points to N values.  Shells and the whole
    space use polar coordinates (log-radial panels times an angular rule);
    cubes use split Gauss-Legendre in R^1, graded tensor panels in R^2 and
    randomised Sobol points beyond.
    """
    n = spec.n
    kind = spec.kernel.support[0]
    if kind in ("all", "annulus"):
        r_lo, r_hi = (0.0, math.inf) if kind == "all" else spec.kernel.support[1:]
        dirs, wts = sphere_rule(n, quad.seed)

        def h(r):
            y = (r[:, None, None] * dirs[None]).reshape(-1, n)
            vals = np.asarray(g(y), dtype=float).reshape(r.size, -1)
            return (vals @ wts) * np.power(r, n - 1.0)

        res = integrate_log_radial(h, r_lo, r_hi, quad, strict=False)
        return res.value, res.error
    lo, hi = spec.kernel.support[1], spec.kernel.support[2]
    if n == 1:
        total, err = 0.0, 0.0
        for a, b in ((lo, min(hi, 0.0)), (max(lo, 0.0), hi)):
            if b > a:
                res = adaptive_gl(lambda s: g(s.reshape(-1, 1)), a, b, quad, strict=False)
                total, err = total + res.value, err + res.error
        return total, err
    if n == 2:
        nodes, weights = _graded_rule(lo, hi)
        yy = np.stack(np.meshgrid(nodes, nodes, indexing="ij"), axis=-1).reshape(-1, 2)
        ww = np.outer(weights, weights).ravel()
        return float(np.sum(g(yy) * ww)), math.nan

    def points(seed):
        sampler = qmc.Sobol(d=n, scramble=True, seed=seed)
        return lo + (hi - lo) * sampler.random_base2(14)

    mean, se = qmc_mean(g, points, seed=quad.seed)
    vol = (hi - lo) ** n
    return mean * vol, se * vol


def _graded_rule(lo, hi, k=16, levels=40):
    """Gauss-Legendre panels on [lo, hi] refined geometrically toward 0 when 0 is inside."""
    edges = {lo, hi}
    if lo <= 0 <= hi:
        edges.add(0.0)
        for j in range(levels):
            for side in (hi, lo):
                if side != 0:
                    edges.add(side * 2.0 ** -j)
    else:
        edges.update(np.linspace(lo, hi, 9).tolist())
    edges = sorted(edges)
    x, w = gauss_legendre(k)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (a + b) + 0.5 * (b - a) * x)
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def apply_operator(spec, functions, x, quad=DEFAULT_QUAD, method="auto", return_error=False):
    """Value of the multilinear operator at the point x.

    ``method="auto"`` uses the closed-form route when available and falls back
    to quadrature; ``"quadrature"`` forces the numerical route.
    """
    functions = list(functions)
    if len(functions) != spec.m:
        raise ValueError("need one input function per matrix family")
    x = np.asarray(x, dtype=float).reshape(spec.n)
    t = float(np.linalg.norm(x))
    radial = spec.line_data() is not None and all(f.is_radial for f in functions)
    if method == "auto" and radial and t > 0:
        try:
            value = float(operator_output(spec, functions)(np.array([t]))[0])
            return (value, 0.0) if return_error else value
        except NotSymbolic:
            pass
    if radial and t > 0:
        value, err = _radial_numeric(spec, functions, t, quad)
    else:
        value, err = _general_numeric(spec, functions, x, quad)
    return (value, err) if return_error else value


def apply_hardy_1d(f, x, quad=DEFAULT_QUAD):
    """(1/x) int_0^x f(t) dt."""
    if not x > 0:
        raise ValueError("x must be positive")
    if f.is_symbolic:
        return f.radial_power().integrate(0.0, 0.0, x) / x
    res = integrate_log_radial(lambda r: f.radial_values(r), 0.0, x, quad, strict=False)
    if not math.isfinite(res.value):
        raise DivergentIntegral("f is not integrable near 0")
    return res.value / x


def apply_hausdorff_1d(kernel, f, x, quad=DEFAULT_QUAD):
    """int_0^inf Phi(t)/t f(x/t) dt for x > 0 and a kernel on the half-line.

    This is the operator with the family A(t) = 1/t read through the
    substitution y = t; ``kernel`` gives Phi(t) = coef t^power on its support.
    """
    if not x > 0:
        raise ValueError("x must be positive")
    sup = kernel.support
    lo, hi = (0.0, math.inf) if sup[0] == "all" else (max(sup[1], 0.0), sup[2])
    pts = []
    if f.is_symbolic:
        pts = [x / b for b in f.radial_power().breakpoints()]

    def h(t):
        with np.errstate(divide="ignore", invalid="ignore"):
            return kernel.coef * np.power(t, kernel.power - 1.0) * f.radial_values(x / t)

    res = integrate_log_radial(h, lo, hi, quad, pts, strict=False)
    if not math.isfinite(res.value):
        raise DivergentIntegral("Hausdorff integral diverges")
    return res.value
