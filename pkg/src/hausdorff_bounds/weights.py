"""Weight functions, ball masses, Muckenhoupt characteristics and reverse
Hölder constants.

Power weights |x|^gamma are handled analytically wherever possible: the mass
of a centred ball is closed form, integrals over off-centre balls reduce to a
one-dimensional integral over spheres |x| = rho weighted by the fraction of
each sphere inside the ball, and divergence is always decided from exponents.
"""

from dataclasses import dataclass, field
import csv
import math

import numpy as np
from scipy.special import betainc

from .errors import DIVERGENT, UNBOUNDED, DivergentMass, is_divergent
from .powerlaw import RadialPower
from .quadrature import (
    DEFAULT_QUAD,
    adaptive_gl,
    ball_points,
    ball_volume,
    integrate_log_radial,
    qmc_mean,
    sphere_area,
)

ESSINF_SAMPLES = 4096


@dataclass(frozen=True)
class Weight:
    """Nonnegative weight on R^n: a power |x|^gamma or a sampled evaluator.

    A sampled evaluator maps an (N, n) array of points to N values, or an
    array of radii to values when ``radial`` is true.
    """

    kind: str = "power"
    gamma: float = 0.0
    n: int = 1
    evaluator: object = field(default=None, compare=False)
    radial: bool = True

    def __post_init__(self):
        if self.kind not in ("power", "sampled"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("dimension must be a positive integer")
        if self.kind == "sampled" and self.evaluator is None:
            raise ValueError("sampled weights need an evaluator")

    @classmethod
    def power(cls, gamma, n=1):
        return cls("power", float(gamma), int(n))

    @classmethod
    def sampled(cls, func, n=1, radial=False):
        return cls("sampled", 0.0, int(n), func, radial)

    @classmethod
    def from_table(cls, path, n=1):
        """Radial weight from a CSV table with columns ``r`` and ``value`` (linear interpolation)."""
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        r = np.array([float(row["r"]) for row in rows])
        v = np.array([float(row["value"]) for row in rows])
        order = np.argsort(r)
        r, v = r[order], v[order]

        def profile(rad):
            return np.interp(rad, r, v)

        return cls("sampled", 0.0, int(n), profile, True)

    @property
    def is_power(self):
        return self.kind == "power"

    def profile(self, r):
        """Radial profile; only available for power and radial sampled weights."""
        r = np.asarray(r, dtype=float)
        if self.is_power:
            with np.errstate(divide="ignore"):
                return np.power(r, self.gamma)
        if not self.radial:
            raise ValueError("weight is not radial")
        return np.asarray(self.evaluator(r), dtype=float)

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        if self.n == 1 and pts.ndim <= 1:
            pts = pts.reshape(-1, 1)
        if self.is_power or self.radial:
            return self.profile(np.linalg.norm(pts, axis=-1))
        return np.asarray(self.evaluator(pts), dtype=float)

    def power_profile(self):
        """The weight as a RadialPower (power weights only)."""
        return RadialPower.monomial(1.0, self.gamma)


@dataclass(frozen=True)
class BallGrid:
    centers: tuple
    radii: tuple

    def __post_init__(self):
        if not self.centers or not self.radii:
            raise ValueError("ball grid must be nonempty")
        radii = tuple(float(r) for r in self.radii)
        if any(r <= 0 for r in radii):
            raise ValueError("radii must be positive")
        if any(b <= a for a, b in zip(radii[:-1], radii[1:])):
            raise ValueError("radii must be sorted ascending")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "centers", tuple(tuple(float(x) for x in np.ravel(c)) for c in self.centers))

    @classmethod
    def default(cls, n=1, seed=0, n_random=8):
        """Origin plus ``n_random`` seeded off-centre points; radii 2^-20 ... 2^20."""
        rng = np.random.default_rng(seed)
        centers = [tuple([0.0] * n)] + [tuple(rng.normal(size=n)) for _ in range(n_random)]
        return cls(tuple(centers), tuple(2.0 ** k for k in range(-20, 21)))

    @classmethod
    def single(cls, center, radius):
        return cls((tuple(np.ravel(center)),), (float(radius),))

    def balls(self):
        for c in self.centers:
            for r in self.radii:
                yield np.asarray(c), r


@dataclass(frozen=True)
class MuckenhouptParams:
    """Exponents of the Muckenhoupt-type estimates; critical indices may be UNBOUNDED."""

    xi: float = 1.0
    eta: float = 1.0
    delta1: float = 2.0
    delta2: float = 2.0
    r_omega: object = UNBOUNDED
    r_v: object = UNBOUNDED

    def __post_init__(self):
        if self.xi < 1 or self.eta < 1:
            raise ValueError("xi and eta must be >= 1")
        if self.delta1 <= 1 or self.delta2 <= 1:
            raise ValueError("delta1 and delta2 must exceed 1")
        for r in (self.r_omega, self.r_v):
            if r is not UNBOUNDED and not r > 1:
                raise ValueError("critical indices must exceed 1")

    @staticmethod
    def conjugate(r):
        """Hölder conjugate r' = r/(r-1); taken as 1 when r is unbounded."""
        if r is UNBOUNDED:
            return 1.0
        return r / (r - 1.0)


# --------------------------------------------------------------------------
# integrals of radial functions over arbitrary balls


def cap_fraction(n, rho, d, radius):
    """Fraction of the sphere |x| = rho lying in B(c, radius) with |c| = d (n >= 2)."""
    rho = np.asarray(rho, dtype=float)
    # 1 - cos(angle) written as a product, which stays accurate when the ball
    # is tiny compared with its distance to the origin
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = (radius - rho + d) * (radius + rho - d) / (2.0 * rho * d)
    gap = np.clip(np.nan_to_num(gap, nan=0.0), 0.0, 2.0)
    inc = betainc((n - 1) / 2.0, 0.5, np.clip(gap * (2.0 - gap), 0.0, 1.0))
    return np.where(gap <= 1.0, 0.5 * inc, 1.0 - 0.5 * inc)


def ball_integral(n, center, radius, profile, q=1.0, s=0.0, quad=DEFAULT_QUAD):
    """int over B(center, radius) of |g(|x|)|^q |x|^s dx for a RadialPower g.

    The part of the ball inside the centred ball B(0, radius - |center|) is
    closed form; the remaining shells carry the sphere-cap fraction and are
    integrated numerically in rho.
    """
    d = float(np.linalg.norm(np.ravel(center)))
    area = sphere_area(n)
    inner = max(radius - d, 0.0)
    total = 0.0
    if inner > 0:
        total += area * profile.abs_moment(q, s + n - 1.0, 0.0, inner, quad)
    if d == 0.0 or not math.isfinite(total):
        return total
    lo, hi = abs(radius - d), radius + d
    if n == 1:
        # one of the two points +-rho lies in the interval for rho in (lo, hi)
        return total + profile.abs_moment(q, s, lo, hi, quad)

    def integrand(rho):
        vals = np.abs(profile(rho)) ** q * np.power(rho, s + n - 1.0)
        return area * vals * cap_fraction(n, rho, d, radius)

    pts = [p for p in profile.breakpoints() if lo < p < hi]
    if lo > 0:
        total += adaptive_gl(integrand, lo, hi, quad, pts).value
    else:
        total += integrate_log_radial(integrand, 0.0, hi, quad, pts).value
    return total


def ball_integral_callable(n, center, radius, h, quad=DEFAULT_QUAD):
    """int over B(center, radius) of h(|x|) dx for a vectorised radial function h."""
    d = float(np.linalg.norm(np.ravel(center)))
    area = sphere_area(n)
    inner = max(radius - d, 0.0)
    total = 0.0
    if inner > 0:
        total += area * integrate_log_radial(lambda r: h(r) * np.power(r, n - 1.0), 0.0, inner, quad).value
    if d == 0.0:
        return total
    lo, hi = abs(radius - d), radius + d
    if n == 1:
        return total + adaptive_gl(h, lo, hi, quad).value if lo > 0 else total + integrate_log_radial(h, 0.0, hi, quad).value

    def integrand(rho):
        return area * h(rho) * np.power(rho, n - 1.0) * cap_fraction(n, rho, d, radius)

    if lo > 0:
        return total + adaptive_gl(integrand, lo, hi, quad).value
    return total + integrate_log_radial(integrand, 0.0, hi, quad).value


def _contains_origin(center, radius):
    return float(np.linalg.norm(np.ravel(center))) <= radius


def _power_ball_integral(n, center, radius, exponent, quad):
    return ball_integral(n, center, radius, RadialPower.monomial(1.0, exponent), 1.0, 0.0, quad)


def _sampled_mean(w, center, radius, transform, quad):
    """Mean of transform(w) over a ball for a sampled weight (QMC when not radial)."""
    n = w.n
    vol = ball_volume(n, radius)
    if w.radial:
        return ball_integral_callable(n, center, radius, lambda r: transform(w.profile(r)), quad) / vol
    if n == 1:
        c = float(np.ravel(center)[0])
        return adaptive_gl(lambda x: transform(w(x.reshape(-1, 1))), c - radius, c + radius, quad, [0.0]).value / vol
    mean, _ = qmc_mean(
        lambda pts: transform(w(pts)),
        lambda sd: ball_points(n, center, radius, 4096, sd),
        seed=quad.seed,
    )
    return mean


# --------------------------------------------------------------------------
# public operations


def ball_mass(w, center, radius, quad=DEFAULT_QUAD, method="auto"):
    """Weighted measure w(B(center, radius)).

    Power weights centred at the origin use |S_{n-1}| R^{n+gamma}/(n+gamma);
    ``method="quadrature"`` forces the numerical route for cross-checks.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    center = np.zeros(w.n) if center is None else np.asarray(center, dtype=float).reshape(w.n)
    if w.is_power:
        if w.gamma <= -w.n and _contains_origin(center, radius):
            raise DivergentMass(f"|x|^{w.gamma} is not integrable near 0 in dimension {w.n}")
        d = float(np.linalg.norm(center))
        if method == "quadrature":
            return ball_integral_callable(w.n, center, radius, w.profile, quad)
        if d == 0.0:
            return sphere_area(w.n) * radius ** (w.n + w.gamma) / (w.n + w.gamma)
        return _power_ball_integral(w.n, center, radius, w.gamma, quad)
    return _sampled_mean(w, center, radius, lambda v: v, quad) * ball_volume(w.n, radius)


def _power_means(w, center, radius, exponents, quad):
    """Ball means of |x|^e for each exponent, on the ball rescaled to radius 1."""
    c = np.asarray(center, dtype=float) / radius
    vol = ball_volume(w.n, 1.0)
    return [_power_ball_integral(w.n, c, 1.0, e, quad) / vol for e in exponents]


def ap_characteristic(w, xi, grid, quad=DEFAULT_QUAD):
    """Largest A_xi quotient over the balls of ``grid``, or DIVERGENT.

    For xi = 1 the essential infimum is estimated by the minimum over 4096
    low-discrepancy points of each ball, which makes the result a lower-bound
    estimate of the A_1 quotient.
    """
    if xi < 1:
        raise ValueError("xi must be >= 1")
    best = 0.0
    for center, radius in grid.balls():
        if w.is_power:
            has_origin = _contains_origin(center, radius)
            if w.gamma <= -w.n and has_origin:
                return DIVERGENT
            if xi == 1.0:
                if w.gamma > 0 and has_origin:
                    return DIVERGENT
                (mean,) = _power_means(w, center, radius, [w.gamma], quad)
                pts = ball_points(w.n, np.asarray(center) / radius, 1.0, ESSINF_SAMPLES, quad.seed)
                low = float(np.min(w(pts)))
                value = mean / low
            else:
                dual = -w.gamma / (xi - 1.0)
                if dual <= -w.n and has_origin:
                    return DIVERGENT
                mean, dual_mean = _power_means(w, center, radius, [w.gamma, dual], quad)
                value = mean * dual_mean ** (xi - 1.0)
        else:
            mean = _sampled_mean(w, center, radius, lambda v: v, quad)
            if xi == 1.0:
                pts = ball_points(w.n, center, radius, ESSINF_SAMPLES, quad.seed)
                value = mean / float(np.min(w(pts)))
            else:
                dual_mean = _sampled_mean(w, center, radius, lambda v: np.power(v, -1.0 / (xi - 1.0)), quad)
                value = mean * dual_mean ** (xi - 1.0)
        best = max(best, value)
    return best


def rh_constant(w, r, grid, quad=DEFAULT_QUAD):
    """Largest reverse Hölder quotient (mean w^r)^(1/r) / mean w over ``grid``, or DIVERGENT."""
    if not r > 1:
        raise ValueError("r must exceed 1")
    best = 0.0
    for center, radius in grid.balls():
        if w.is_power:
            has_origin = _contains_origin(center, radius)
            if (w.gamma <= -w.n or r * w.gamma <= -w.n) and has_origin:
                return DIVERGENT
            mean, mean_r = _power_means(w, center, radius, [w.gamma, r * w.gamma], quad)
        else:
            mean = _sampled_mean(w, center, radius, lambda v: v, quad)
            mean_r = _sampled_mean(w, center, radius, lambda v: np.power(v, r), quad)
        best = max(best, mean_r ** (1.0 / r) / mean)
    return best


def critical_index_estimate(w, r_grid=None, grid=None, quad=DEFAULT_QUAD, resolution=0.05, analytic=True, blowup=1e6):
    """Critical reverse Hölder index sup{r > 1 : w in RH_r}, or UNBOUNDED.

    Power weights use the exact value (n/|gamma| for gamma < 0) unless
    ``analytic`` is false; the numerical route scans ``r_grid`` for the first
    r whose constant is DIVERGENT (or exceeds ``blowup`` for sampled weights)
    and bisects the bracket down to ``resolution``.  The largest r found
    finite is returned.
    """
    if w.is_power and analytic:
        return UNBOUNDED if w.gamma >= 0 else w.n / abs(w.gamma)
    if r_grid is None:
        r_grid = np.round(np.arange(1.1, 8.0 + 1e-9, 0.1), 10)
    r_grid = [float(r) for r in r_grid]
    if any(b <= a for a, b in zip(r_grid[:-1], r_grid[1:])):
        raise ValueError("r_grid must be sorted ascending")
    if grid is None:
        grid = BallGrid.single(np.zeros(w.n), 1.0)

    def finite(r):
        value = rh_constant(w, r, grid, quad)
        return not is_divergent(value) and value < blowup

    last_ok = None
    for r in r_grid:
        if finite(r):
            last_ok = r
            continue
        if last_ok is None:
            return r_grid[0]
        lo, hi = last_ok, r
        while hi - lo > resolution:
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if finite(mid) else (lo, mid)
        return lo
    return UNBOUNDED


def power_weight_in_ap(gamma, n, xi):
    """Exact A_xi membership of |x|^gamma on R^n."""
    if xi == 1.0:
        return -n < gamma <= 0
    return -n < gamma < n * (xi - 1.0)
