"""Sector coordinate, exact sector membership and Fourier detection of sectors.

A canonical generator s has coordinate W(s) = log|s1/s2| / (2 log eps) in
(-1/2, 1/2].  The sector S(eta1, eta2) is the set of s with W(s) in
(eta1/2, eta2/2].  Its indicator twisted by e(tau W) is expanded in the
Fourier series sum_n a_n e(n W), and the truncation error is controlled by
T_Z(W) = min(log Z, 1/(Z |W - eta1/2|) + 1/(Z |W - eta2/2|)), where |.| is
the distance to the nearest integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .ideals import ideal_table
from .quad_field import FieldCtx, QuadInt, ZeroElement, exact_sign

__all__ = [
    "SectorSpec",
    "parse_rational",
    "w_coordinate",
    "in_sector",
    "in_sector_array",
    "fourier_coeff",
    "fourier_coeffs",
    "truncated_indicator",
    "indicator",
    "t_error",
    "sigma_sum",
]

_W_DIGITS = 34


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse "p/q" or an integer into an exact Fraction."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    text = text.strip()
    if not text or any(c not in "+-0123456789/" for c in text):
        raise ValueError(f"not a rational p/q: {text!r}")
    return Fraction(text)


@dataclass(frozen=True)
class SectorSpec:
    eta1: Fraction
    eta2: Fraction

    def __post_init__(self):
        e1, e2 = parse_rational(self.eta1), parse_rational(self.eta2)
        if not (-1 <= e1 < e2 <= 1):
            raise ValueError(f"need -1 <= eta1 < eta2 <= 1, got ({e1}, {e2})")
        object.__setattr__(self, "eta1", e1)
        object.__setattr__(self, "eta2", e2)

    @property
    def eta(self) -> Fraction:
        return self.eta2 - self.eta1

    @property
    def bounds(self) -> tuple[float, float]:
        """Endpoints (eta1/2, eta2/2) of the W-interval."""
        return float(self.eta1) / 2, float(self.eta2) / 2

    @property
    def is_full(self) -> bool:
        return self.eta1 == -1 and self.eta2 == 1

    def __str__(self):
        return f"({self.eta1}, {self.eta2})"


def _ratio_sign(s: QuadInt, eta: Fraction, ctx: FieldCtx) -> int:
    """Sign of |s1/s2| - eps^eta, decided in integer arithmetic.

    |s1/s2| = s1^2 / |N(s)|, so with eta = p/q we compare s1^(2q) eps^(-p)
    against |N|^q after moving the negative power of eps to the other side.
    """
    p, q = eta.numerator, eta.denominator
    lhs = s ** (2 * q)
    rhs = QuadInt(s.abs_norm() ** q, 0, ctx.d)
    if p < 0:
        lhs = lhs * ctx.eps ** (-p)
    elif p > 0:
        rhs = rhs * ctx.eps ** p
    return exact_sign(lhs - rhs)


def w_coordinate(s: QuadInt, ctx: FieldCtx) -> float:
    """W(s) evaluated with 34 significant digits and rounded once to a float.

    The cancelling embedding is recovered as |N| / |other|.  W = 1/2 is
    returned exactly when |s1/s2| = eps holds in integer arithmetic.
    """
    if not s:
        raise ZeroElement("W is undefined at 0")
    if _ratio_sign(s, Fraction(1), ctx) == 0:
        return 0.5
    if _ratio_sign(s, Fraction(-1), ctx) == 0:
        return -0.5
    with mpmath.workdps(_W_DIGITS):
        rd = mpmath.sqrt(s.d)
        n = mpmath.mpf(s.abs_norm())
        big = abs(s.u) + abs(s.v) * rd
        s1 = big if s.u * s.v >= 0 else n / big
        e = ctx.eps
        log_eps = mpmath.log(e.u + e.v * rd)
        return float((2 * mpmath.log(s1) - mpmath.log(n)) / (2 * log_eps))


def in_sector(s: QuadInt, spec: SectorSpec, ctx: FieldCtx) -> bool:
    """W(s) in (eta1/2, eta2/2], decided exactly."""
    return _ratio_sign(s, spec.eta1, ctx) > 0 and _ratio_sign(s, spec.eta2, ctx) <= 0


def in_sector_array(u: np.ndarray, v: np.ndarray, w: np.ndarray, spec: SectorSpec, ctx: FieldCtx, tol: float = 1e-9) -> np.ndarray:
    """Float test on W with an exact recheck of points within tol of an endpoint."""
    lo, hi = spec.bounds
    out = (w > lo) & (w <= hi)
    near = np.nonzero((np.abs(w - lo) <= tol) | (np.abs(w - hi) <= tol))[0]
    for i in near:
        out[i] = in_sector(QuadInt(int(u[i]), int(v[i]), ctx.d), spec, ctx)
    return out


def fourier_coeff(n: int, tau: float, spec: SectorSpec) -> complex:
    """a_n = integral over (eta1/2, eta2/2] of e((tau - n) z) dz."""
    return complex(fourier_coeffs(np.array([n]), tau, spec)[0])


def fourier_coeffs(ns: np.ndarray, tau: float, spec: SectorSpec) -> np.ndarray:
    # with k = tau - n, a_n = e(k * mid) * sin(pi k len) / (pi k), written through sinc
    # so that k -> 0 needs no special case
    lo, hi = spec.bounds
    k = float(tau) - np.asarray(ns, dtype=np.float64)
    length, mid = hi - lo, (hi + lo) / 2
    return length * np.sinc(k * length) * np.exp(2j * np.pi * k * mid)


def indicator(W: np.ndarray | float, tau: float, spec: SectorSpec) -> np.ndarray:
    """The 1-periodic function e(tau W) on (eta1/2, eta2/2], 0 elsewhere in (-1/2, 1/2]."""
    lo, hi = spec.bounds
    W = np.asarray(W, dtype=np.float64)
    return np.where((W > lo) & (W <= hi), np.exp(2j * np.pi * float(tau) * W), 0)


def truncated_indicator(W: np.ndarray | float, Z: int, tau: float, spec: SectorSpec, chunk: int = 4096) -> np.ndarray:
    """Partial Fourier sum sum_{|n| <= Z} a_n e(n W)."""
    ns = np.arange(-Z, Z + 1)
    a = fourier_coeffs(ns, tau, spec)
    W = np.atleast_1d(np.asarray(W, dtype=np.float64))
    out = np.empty(W.shape, dtype=np.complex128)
    for i in range(0, len(W), chunk):
        out[i:i + chunk] = np.exp(2j * np.pi * np.outer(W[i:i + chunk], ns)) @ a
    return out


def _dist_to_int(x: np.ndarray) -> np.ndarray:
    return np.abs(x - np.round(x))


def t_error(W: np.ndarray | float, Z: int, spec: SectorSpec) -> np.ndarray:
    """T_Z(W) for the two sector endpoints; log Z at an endpoint."""
    lo, hi = spec.bounds
    W = np.asarray(W, dtype=np.float64)
    with np.errstate(divide="ignore"):
        tail = 1.0 / (Z * _dist_to_int(W - lo)) + 1.0 / (Z * _dist_to_int(W - hi))
    return np.minimum(math.log(Z), tail)


def sigma_sum(x: int, Z: int, ctx: FieldCtx, spec: SectorSpec) -> float:
    """Sum of T_Z(W(s)) over canonical generators s with N(s) <= x."""
    if x < 2:
        raise ValueError("x must be at least 2")
    tab = ideal_table(int(x), ctx)
    return float(np.sum(t_error(tab.w, Z, spec)))
