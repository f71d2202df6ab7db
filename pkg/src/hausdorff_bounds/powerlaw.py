"""Exact algebra for radial profiles that are piecewise sums of powers.

A profile is g(r) = sum_j c_j r^{p_j} on finitely many intervals (lo, hi] of
(0, inf).  Products, dilations and compositions with monomials stay in this
class, and integrals of g(r) r^s are closed form term by term.  Integrals of
|g|^q with several terms on one interval use log-variable Gauss-Legendre
panels, with the infinite ends closed analytically from the dominant term.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DivergentIntegral
from .quadrature import DEFAULT_QUAD, adaptive_gl

POWER_TOL = 1e-12
# Relative size below which a subdominant term no longer changes |g|^q.
_NEGLIGIBLE = 1e-17
_MAX_LOG_SPAN = 4000.0


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    terms: tuple  # ((coef, power), ...) sorted by power

    def __call__(self, r):
        out = np.zeros_like(r, dtype=float)
        for c, p in self.terms:
            out = out + c * np.power(r, p)
        return out


def merge_terms(terms):
    """Combine equal powers and drop terms that cancel."""
    terms = sorted((float(p), float(c)) for c, p in terms if c != 0.0)
    merged = []
    for p, c in terms:
        if merged and abs(merged[-1][0] - p) <= POWER_TOL * max(1.0, abs(p)):
            p0, c0, size = merged[-1]
            merged[-1] = (p0, c0 + c, max(size, abs(c)))
        else:
            merged.append((p, c, abs(c)))
    return tuple((c, p) for p, c, size in merged if abs(c) > 1e-14 * size)


def _pow(x, e):
    try:
        return math.pow(x, e)
    except OverflowError:
        return math.inf


def monomial_integral(coef, exponent, a, b):
    """Closed form of coef * int_a^b r^(exponent - 1) dr, 0 <= a < b <= inf."""
    if not b > a or coef == 0.0:
        return 0.0
    if abs(exponent) < 1e-14:
        if a == 0.0 or math.isinf(b):
            raise DivergentIntegral("logarithmic divergence")
        return coef * math.log(b / a)
    if a == 0.0 and exponent < 0:
        raise DivergentIntegral(f"r^{exponent - 1:.6g} is not integrable at 0")
    if math.isinf(b) and exponent > 0:
        raise DivergentIntegral(f"r^{exponent - 1:.6g} is not integrable at infinity")
    upper = 0.0 if math.isinf(b) else _pow(b, exponent)
    lower = 0.0 if a == 0.0 else _pow(a, exponent)
    return coef * (upper - lower) / exponent


def _log_abs_sum(coefs, powers, u):
    """log |sum_j c_j e^{p_j u}| evaluated stably for an array u."""
    a = np.log(np.abs(coefs))[:, None] + powers[:, None] * u[None, :]
    m = np.max(a, axis=0)
    s = np.sum(np.sign(coefs)[:, None] * np.exp(a - m[None, :]), axis=0)
    with np.errstate(divide="ignore"):
        return m + np.log(np.abs(s))


class RadialPower:
    """Piecewise power-law radial profile."""

    def __init__(self, pieces=()):
        self.pieces = tuple(pieces)

    # construction -----------------------------------------------------
    @classmethod
    def from_terms(cls, terms):
        """Build from (coef, power, lo, hi) tuples meaning coef * r^power on (lo, hi]."""
        terms = [(float(c), float(p), float(lo), float(hi)) for c, p, lo, hi in terms if c != 0.0 and hi > lo]
        if not terms:
            return cls(())
        bps = sorted({t[2] for t in terms} | {t[3] for t in terms})
        pieces = []
        for a, b in zip(bps[:-1], bps[1:]):
            merged = merge_terms([(c, p) for c, p, lo, hi in terms if lo <= a and hi >= b])
            if not merged:
                continue
            if pieces and pieces[-1].hi == a and pieces[-1].terms == merged:
                pieces[-1] = Piece(pieces[-1].lo, b, merged)
            else:
                pieces.append(Piece(a, b, merged))
        return cls(pieces)

    @classmethod
    def monomial(cls, coef, power, lo=0.0, hi=math.inf):
        return cls.from_terms([(coef, power, lo, hi)])

    def as_terms(self):
        return [(c, p, pc.lo, pc.hi) for pc in self.pieces for c, p in pc.terms]

    # evaluation -------------------------------------------------------
    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for pc in self.pieces:
                mask = (r > pc.lo) & (r <= pc.hi)
                if pc.lo == 0.0:
                    mask |= r == 0.0
                if np.any(mask):
                    out[mask] = pc(r[mask])
        return out

    def is_zero(self):
        return not self.pieces

    def breakpoints(self):
        pts = set()
        for pc in self.pieces:
            pts.add(pc.lo)
            pts.add(pc.hi)
        return sorted(p for p in pts if 0.0 < p < math.inf)

    def powers(self):
        return sorted({p for pc in self.pieces for c, p in pc.terms})

    # algebra ----------------------------------------------------------
    def scale(self, c):
        if c == 0.0:
            return RadialPower(())
        return RadialPower(Piece(pc.lo, pc.hi, tuple((c * a, p) for a, p in pc.terms)) for pc in self.pieces)

    def __add__(self, other):
        return RadialPower.from_terms(self.as_terms() + other.as_terms())

    def __mul__(self, other):
        terms = []
        for a in self.pieces:
            for b in other.pieces:
                lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
                if hi > lo:
                    terms.extend((c1 * c2, p1 + p2, lo, hi) for c1, p1 in a.terms for c2, p2 in b.terms)
        return RadialPower.from_terms(terms)

    def dilate(self, c):
        """Profile of r -> g(c r) for c > 0."""
        return self.compose_monomial(c, 1.0)

    def compose_monomial(self, c, e):
        """Profile of r -> g(c r^e) for c > 0."""
        if c <= 0:
            raise ValueError("composition needs a positive coefficient")
        if e == 0.0:
            value = float(self(np.array([c]))[0])
            return RadialPower.monomial(value, 0.0) if value != 0.0 else RadialPower(())
        terms = []
        for pc in self.pieces:
            b_lo = 0.0 if pc.lo == 0.0 else (pc.lo / c) ** (1.0 / e)
            b_hi = math.inf if math.isinf(pc.hi) else (pc.hi / c) ** (1.0 / e)
            if e < 0:
                b_lo = math.inf if pc.lo == 0.0 else b_lo
                b_hi = 0.0 if math.isinf(pc.hi) else b_hi
                b_lo, b_hi = b_hi, b_lo
            for a, p in pc.terms:
                terms.append((a * c ** p, e * p, b_lo, b_hi))
        return RadialPower.from_terms(terms)

    # asymptotics ------------------------------------------------------
    def top(self):
        """Dominant (coef, power) as r -> inf, or None for bounded support."""
        if not self.pieces or not math.isinf(self.pieces[-1].hi):
            return None
        return self.pieces[-1].terms[-1]

    def bottom(self):
        """Dominant (coef, power) as r -> 0, or None when g vanishes near 0."""
        if not self.pieces or self.pieces[0].lo != 0.0:
            return None
        return self.pieces[0].terms[0]

    def asymptotic_top(self):
        """Radius beyond which g equals its dominant term up to relative 1e-17."""
        if self.top() is None:
            return self.pieces[-1].hi if self.pieces else 0.0
        pc = self.pieces[-1]
        return max(pc.lo, math.exp(_switch_log(pc.terms, top=True, anchor=math.log(max(pc.lo, 1e-300)))))

    def asymptotic_bottom(self):
        """Radius below which g equals its dominant term up to relative 1e-17."""
        if self.bottom() is None:
            return self.pieces[0].lo if self.pieces else math.inf
        pc = self.pieces[0]
        anchor = math.log(pc.hi) if math.isfinite(pc.hi) else 0.0
        return min(pc.hi, math.exp(_switch_log(pc.terms, top=False, anchor=anchor)))

    # integrals --------------------------------------------------------
    def integrate(self, s=0.0, lo=0.0, hi=math.inf):
        """Signed integral of g(r) r^s over (lo, hi], term by term in closed form."""
        total = 0.0
        for pc in self.pieces:
            a, b = max(lo, pc.lo), min(hi, pc.hi)
            if b > a:
                for c, p in pc.terms:
                    total += monomial_integral(c, p + s + 1.0, a, b)
        return total

    def abs_moment(self, q, s=0.0, lo=0.0, hi=math.inf, quad=DEFAULT_QUAD):
        """int_lo^hi |g(r)|^q r^s dr; returns inf when the integral diverges."""
        total = 0.0
        for pc in self.pieces:
            a, b = max(lo, pc.lo), min(hi, pc.hi)
            if not b > a:
                continue
            try:
                total += _piece_abs_moment(pc.terms, q, s, a, b, quad)
            except DivergentIntegral:
                return math.inf
        return total

    def __repr__(self):
        parts = []
        for pc in self.pieces:
            body = " + ".join(f"{c:.6g} r^{p:.6g}" for c, p in pc.terms)
            parts.append(f"({pc.lo:.6g}, {pc.hi:.6g}]: {body}")
        return "RadialPower[" + "; ".join(parts) + "]"


def _switch_log(terms, top, anchor):
    """log radius past which the dominant term swamps the others."""
    if len(terms) == 1:
        return anchor
    dom_c, dom_p = terms[-1] if top else terms[0]
    bound = -math.inf if top else math.inf
    for c, p in terms:
        if p == dom_p:
            continue
        gap = abs(dom_p - p)
        lead = math.log(len(terms) * abs(c / dom_c) / _NEGLIGIBLE) / gap
        bound = max(bound, lead) if top else min(bound, -lead)
    if top:
        return min(max(bound, anchor), anchor + _MAX_LOG_SPAN)
    return max(min(bound, anchor), anchor - _MAX_LOG_SPAN)


def _piece_abs_moment(terms, q, s, a, b, quad):
    if len(terms) == 1:
        c, p = terms[0]
        return monomial_integral(abs(c) ** q, q * p + s + 1.0, a, b)
    coefs = np.array([c for c, p in terms])
    powers = np.array([p for c, p in terms])
    total = 0.0
    la = math.log(a) if a > 0 else None
    lb = math.log(b) if math.isfinite(b) else None
    if la is None:
        c0, p0 = terms[0]
        t0 = _switch_log(terms, top=False, anchor=lb if lb is not None else 0.0)
        total += monomial_integral(abs(c0) ** q, q * p0 + s + 1.0, 0.0, math.exp(t0))
        la = t0
    if lb is None:
        c1, p1 = terms[-1]
        t1 = max(_switch_log(terms, top=True, anchor=la), la)
        total += monomial_integral(abs(c1) ** q, q * p1 + s + 1.0, math.exp(t1), math.inf)
        lb = t1
    if lb > la:

        def integrand(u):
            return np.exp(q * _log_abs_sum(coefs, powers, u) + (s + 1.0) * u)

        total += adaptive_gl(integrand, la, lb, quad, initial_width=math.log(2.0)).value
    return total
