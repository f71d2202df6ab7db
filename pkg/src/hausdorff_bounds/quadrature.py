"""Quadrature building blocks: adaptive Gauss-Legendre panels, log-radial
integration, angular rules and low-discrepancy ball samples."""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.stats import norm as normal_dist
from scipy.stats import qmc

from .errors import QuadratureFailure

LN2 = math.log(2.0)
# Radial integrals are truncated to [2^-60, 2^60]; the ends are closed with a
# local power-law extrapolation.
LOG2_R_MIN = -60.0
LOG2_R_MAX = 60.0


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_refinement: int = 20
    seed: int = 0
    nodes: int = 16

    def with_tol(self, rel_tol):
        return QuadratureSpec(rel_tol, self.abs_tol, self.max_refinement, self.seed, self.nodes)


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    converged: bool


def sphere_area(n):
    """Surface measure |S_{n-1}| of the unit sphere in R^n (2 when n = 1)."""
    return 2.0 * math.pi ** (n / 2.0) / float(gamma_fn(n / 2.0))


def ball_volume(n, radius=1.0):
    return sphere_area(n) * radius ** n / n


@lru_cache(maxsize=None)
def gauss_legendre(k):
    x, w = np.polynomial.legendre.leggauss(k)
    return x, w


def _panel_values(func, lo, hi, k):
    x, w = gauss_legendre(k)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(func(pts.ravel()), dtype=float).reshape(pts.shape)
    return (vals @ w) * half


def adaptive_gl(func, a, b, quad=DEFAULT_QUAD, points=(), initial_width=None, strict=True):
    """Integrate a vectorised ``func`` over [a, b] with bisecting Gauss-Legendre panels.

    ``points`` are interior breakpoints (jumps, kinks) that become panel edges.
    A panel is accepted when the one-panel and two-half-panel estimates agree
    to the panel's share of ``max(abs_tol, rel_tol * |I|)``; refinement also
    stops once the summed error estimate is within half that budget.
    """
    if not b > a:
        return QuadResult(0.0, 0.0, True)
    edges = [a] + sorted(p for p in set(points) if a < p < b) + [b]
    if initial_width is not None:
        refined = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            count = max(1, int(math.ceil((hi - lo) / initial_width - 1e-9)))
            refined.extend(np.linspace(lo, hi, count + 1)[:-1].tolist())
        edges = refined + [b]
    lo = np.asarray(edges[:-1], dtype=float)
    hi = np.asarray(edges[1:], dtype=float)
    k = quad.nodes
    coarse = _panel_values(func, lo, hi, k)
    scale = max(float(np.sum(np.abs(coarse))), 0.0)
    width = b - a
    total, total_err = 0.0, 0.0
    converged = True
    for depth in range(quad.max_refinement + 1):
        mid = 0.5 * (lo + hi)
        left = _panel_values(func, lo, mid, k)
        right = _panel_values(func, mid, hi, k)
        fine = left + right
        err = np.abs(fine - coarse)
        scale = max(scale, abs(total) + float(np.sum(np.abs(fine))))
        budget = max(quad.abs_tol, quad.rel_tol * scale)
        tol = budget * (hi - lo) / width
        ok = err <= tol
        if total_err + float(np.sum(err)) <= 0.5 * budget:
            # the remaining panels are already accurate enough as a whole
            ok = np.ones_like(ok)
        elif depth == quad.max_refinement or lo.size > 200000:
            ok = np.ones_like(ok)
            if total_err + float(np.sum(err)) > budget:
                converged = False
        total += float(np.sum(fine[ok]))
        total_err += float(np.sum(err[ok]))
        if np.all(ok):
            break
        bad = ~ok
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
    if not np.isfinite(total):
        converged = False
    if strict and not converged:
        raise QuadratureFailure(
            f"quadrature on [{a:.6g}, {b:.6g}] did not converge (estimate {total:.6g}, error {total_err:.3g})",
            value=total,
            error=total_err,
        )
    return QuadResult(total, total_err, converged)


def _end_correction(h, r_end, r_next, toward_zero):
    """Closed-form extrapolation of a power-like integrand beyond a truncation point."""
    h_end = float(h(np.array([r_end]))[0])
    if h_end == 0.0 or not np.isfinite(h_end):
        return 0.0
    h_next = float(h(np.array([r_next]))[0])
    if h_next == 0.0 or np.sign(h_next) != np.sign(h_end):
        return 0.0
    slope = math.log(abs(h_next / h_end)) / math.log(r_next / r_end)
    if toward_zero:
        if slope <= -1.0:
            return math.copysign(math.inf, h_end)
        return h_end * r_end / (slope + 1.0)
    if slope >= -1.0:
        return math.copysign(math.inf, h_end)
    return -h_end * r_end / (slope + 1.0)


def integrate_log_radial(h, lo, hi, quad=DEFAULT_QUAD, points=(), strict=True, extrapolate=True):
    """Integrate ``h(r) dr`` over [lo, hi] (0 <= lo < hi <= inf) in the variable u = log2 r.

    The range is truncated to [2^-60, 2^60]; when the integrand reaches a
    truncation point its tail is closed by a local power-law extrapolation.
    """
    if not hi > lo:
        return QuadResult(0.0, 0.0, True)
    u_lo = math.log2(lo) if lo > 0 else -math.inf
    u_hi = math.log2(hi) if math.isfinite(hi) else math.inf
    a = max(u_lo, LOG2_R_MIN)
    b = min(u_hi, LOG2_R_MAX)
    if not b > a:
        return QuadResult(0.0, 0.0, True)

    def g(u):
        r = np.exp2(u)
        return np.asarray(h(r), dtype=float) * r * LN2

    upoints = [math.log2(p) for p in points if p > 0 and math.isfinite(p)]
    res = adaptive_gl(g, a, b, quad, upoints, initial_width=1.0, strict=strict)
    value, err = res.value, res.error
    if extrapolate:
        if u_lo < LOG2_R_MIN:
            value += _end_correction(h, 2.0 ** a, 2.0 ** (a + 0.5), True)
        if u_hi > LOG2_R_MAX:
            value += _end_correction(h, 2.0 ** b, 2.0 ** (b - 0.5), False)
    return QuadResult(value, err, res.converged and math.isfinite(value))


@lru_cache(maxsize=None)
def sphere_rule(n, seed=0):
    """Directions and weights integrating functions on S_{n-1} (weights sum to |S_{n-1}|).

    Exact (two points) for n = 1, trapezoid for n = 2, Gauss-Legendre x trapezoid
    for n = 3, scrambled Sobol directions for n > 3.
    """
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        m = 64
        phi = (np.arange(m) + 0.5) * 2.0 * math.pi / m
        dirs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        return dirs, np.full(m, 2.0 * math.pi / m)
    if n == 3:
        x, w = gauss_legendre(24)
        m = 48
        phi = (np.arange(m) + 0.5) * 2.0 * math.pi / m
        ct = np.repeat(x, m)
        st = np.sqrt(1.0 - ct ** 2)
        ph = np.tile(phi, x.size)
        dirs = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=1)
        weights = np.repeat(w, m) * (2.0 * math.pi / m)
        return dirs, weights
    sampler = qmc.Sobol(d=n, scramble=True, seed=seed)
    u = sampler.random_base2(12)
    z = normal_dist.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
    dirs = z / np.linalg.norm(z, axis=1, keepdims=True)
    return dirs, np.full(dirs.shape[0], sphere_area(n) / dirs.shape[0])


def ball_points(n, center, radius, count=4096, seed=0):
    """Deterministic low-discrepancy points filling the ball B(center, radius)."""
    center = np.asarray(center, dtype=float).reshape(n)
    m = int(round(math.log2(count)))
    sampler = qmc.Sobol(d=n + 1, scramble=True, seed=seed)
    u = sampler.random_base2(m)
    z = normal_dist.ppf(np.clip(u[:, :n], 1e-12, 1.0 - 1e-12))
    dirs = z / np.maximum(np.linalg.norm(z, axis=1, keepdims=True), 1e-300)
    rad = radius * u[:, n] ** (1.0 / n)
    return center[None, :] + dirs * rad[:, None]


def qmc_mean(func, points_fn, replicas=8, seed=0):
    """Mean of ``func`` over randomised QMC point sets, with its standard error."""
    means = []
    for j in range(replicas):
        pts = points_fn(seed + j)
        means.append(float(np.mean(func(pts))))
    means = np.asarray(means)
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
