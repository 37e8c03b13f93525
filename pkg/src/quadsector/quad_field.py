"""Exact arithmetic in Z[sqrt(d)] for real quadratic fields of class number one.

Supported fields have squarefree d = 2, 3 mod 4, so the ring of integers has
the basis {1, sqrt(d)} and every element is a pair of Python integers.  All
comparisons of embedding values are reduced to signs of numbers p + q*sqrt(d)
with integer p, q, which are decided without floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "FieldError",
    "NotSquarefree",
    "UnsupportedResidueClass",
    "ClassNumberNotOne",
    "ZeroElement",
    "QuadInt",
    "FieldCtx",
    "CLASS_NUMBER_ONE",
    "make_field",
    "fundamental_unit",
    "exact_sign",
    "canonical_generator",
    "is_canonical",
    "in_fundamental_domain",
    "norm_bounds_hold",
    "class_number_is_one",
    "raw_w",
    "w_array",
]


class FieldError(ValueError):
    """Base class for rejected field parameters."""


class NotSquarefree(FieldError):
    pass


class UnsupportedResidueClass(FieldError):
    pass


class ClassNumberNotOne(FieldError):
    pass


class ZeroElement(ValueError):
    pass


# squarefree d <= 200 with d = 2, 3 mod 4 and h(Q(sqrt d)) = 1;
# tests re-derive this list with class_number_is_one().
CLASS_NUMBER_ONE = (
    2, 3, 6, 7, 11, 14, 19, 22, 23, 31, 38, 43, 46, 47, 59, 62, 67, 71, 83,
    86, 94, 103, 107, 118, 127, 131, 134, 139, 151, 158, 163, 166, 167, 179,
    191, 199,
)


@dataclass(frozen=True, order=True)
class QuadInt:
    """The element u + v*sqrt(d) of Z[sqrt(d)]."""

    u: int
    v: int
    d: int = field(default=2, compare=True)

    def _coerce(self, other) -> "QuadInt":
        if isinstance(other, QuadInt):
            if other.d != self.d:
                raise ValueError(f"mixed fields: d={self.d} and d={other.d}")
            return other
        if isinstance(other, (int, np.integer)):
            return QuadInt(int(other), 0, self.d)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadInt(self.u + o.u, self.v + o.v, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadInt(self.u - o.u, self.v - o.v, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadInt(
            self.u * o.u + self.d * self.v * o.v,
            self.u * o.v + self.v * o.u,
            self.d,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return QuadInt(-self.u, -self.v, self.d)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers only exist for units; use FieldCtx.unit_power")
        result = QuadInt(1, 0, self.d)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __bool__(self):
        return self.u != 0 or self.v != 0

    def conj(self) -> "QuadInt":
        return QuadInt(self.u, -self.v, self.d)

    def norm(self) -> int:
        """Signed field norm u^2 - d v^2."""
        return self.u * self.u - self.d * self.v * self.v

    def abs_norm(self) -> int:
        return abs(self.norm())

    def sigma1(self) -> float:
        return self.u + self.v * math.sqrt(self.d)

    def sigma2(self) -> float:
        return self.u - self.v * math.sqrt(self.d)

    def is_rational(self) -> bool:
        return self.v == 0

    def divides(self, other: "QuadInt") -> bool:
        """True iff other / self lies in Z[sqrt(d)]."""
        if not self:
            raise ZeroElement("division by zero element")
        n = self.norm()
        t = other * self.conj()
        return t.u % n == 0 and t.v % n == 0

    def exact_div(self, other: "QuadInt") -> "QuadInt":
        """Return self / other, which must be integral."""
        n = other.norm()
        t = self * other.conj()
        if t.u % n or t.v % n:
            raise ValueError(f"{other} does not divide {self}")
        return QuadInt(t.u // n, t.v // n, self.d)

    def __str__(self):
        u, v = self.u, self.v
        if v == 0:
            return str(u)
        root = f"√{self.d}"
        if v == 1:
            vs = root
        elif v == -1:
            vs = "-" + root
        else:
            vs = f"{v}{root}"
        if u == 0:
            return vs
        return f"{u}{'+' if v > 0 else ''}{vs}"


def exact_sign(a: QuadInt) -> int:
    """Sign of sigma1(a) = u + v*sqrt(d), decided in integers."""
    u, v = a.u, a.v
    if u >= 0 and v >= 0:
        return 1 if (u or v) else 0
    if u <= 0 and v <= 0:
        return -1
    # opposite signs: |u| vs |v| sqrt(d)
    c = u * u - a.d * v * v
    if c == 0:
        return 0
    return (1 if u > 0 else -1) if c > 0 else (1 if v > 0 else -1)


def _sign_pq(p: int, q: int, d: int) -> int:
    return exact_sign(QuadInt(p, q, d))


def _is_squarefree(n: int) -> bool:
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


@lru_cache(maxsize=None)
def fundamental_unit(d: int) -> QuadInt:
    """Smallest unit > 1 of Z[sqrt(d)], from the continued fraction of sqrt(d)."""
    _check_d(d)
    a0 = math.isqrt(d)
    m, q, a = 0, 1, a0
    p_prev, p = 1, a0
    r_prev, r = 0, 1
    while p * p - d * r * r not in (1, -1):
        m = a * q - m
        q = (d - m * m) // q
        a = (a0 + m) // q
        p_prev, p = p, a * p + p_prev
        r_prev, r = r, a * r + r_prev
    return QuadInt(p, r, d)


def _check_d(d: int) -> None:
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise FieldError(f"d must be an integer >= 2, got {d!r}")
    d = int(d)
    if math.isqrt(d) ** 2 == d or not _is_squarefree(d):
        raise NotSquarefree(f"d={d} is not squarefree")
    if d % 4 == 1:
        raise UnsupportedResidueClass(
            f"d={d} is 1 mod 4; only d = 2, 3 mod 4 (ring basis 1, sqrt(d)) is supported"
        )


def _find_norm_element(p: int, d: int, eps_float: float) -> QuadInt | None:
    """Some element of norm +-p, searching the fundamental-domain box, or None."""
    vmax = math.isqrt(int(eps_float * p / d) + 1) + 2
    v = np.arange(vmax + 1, dtype=np.int64)
    dv2 = d * v * v
    for sgn in (1, -1):
        t = dv2 + sgn * p
        ok = t >= 0
        r = np.floor(np.sqrt(np.where(ok, t, 0).astype(np.float64))).astype(np.int64)
        for adj in (-1, 0, 1):
            rr = r + adj
            hit = np.nonzero(ok & (rr >= 0) & (rr * rr == t))[0]
            if hit.size:
                i = int(hit[0])
                return QuadInt(int(rr[i]), int(v[i]), d)
    return None


def class_number_is_one(d: int) -> bool:
    """Brute-force Minkowski check: every prime of norm <= sqrt(d) is principal.

    The discriminant is 4d, so the Minkowski bound is sqrt(4d)/2 = sqrt(d).
    Inert primes are generated by rational integers; a split or ramified
    prime p is principal iff some element has norm +-p.
    """
    _check_d(d)
    from sympy import primerange

    eps = fundamental_unit(d)
    eps_f = eps.sigma1()
    for p in primerange(2, math.isqrt(d) + 1):
        if p != 2 and d % p and pow(d, (p - 1) // 2, p) == p - 1:
            continue
        if _find_norm_element(int(p), d, eps_f) is None:
            return False
    return True


@dataclass(frozen=True)
class FieldCtx:
    """The field Q(sqrt d): fundamental unit and cached derived constants."""

    d: int
    eps: QuadInt
    log_eps: float
    disc: int
    class_number_one: bool = True

    @property
    def eps_inv(self) -> QuadInt:
        # eps^{-1} = N(eps) * conj(eps)
        n = self.eps.norm()
        return QuadInt(n * self.eps.u, -n * self.eps.v, self.d)

    @property
    def eps_float(self) -> float:
        return self.eps.sigma1()

    def unit_power(self, k: int) -> QuadInt:
        return _unit_power(self.d, k)

    def elem(self, u: int, v: int = 0) -> QuadInt:
        return QuadInt(u, v, self.d)

    def __str__(self):
        return f"Q(√{self.d})"


@lru_cache(maxsize=4096)
def _unit_power(d: int, k: int) -> QuadInt:
    eps = fundamental_unit(d)
    if k >= 0:
        return eps ** k
    n = eps.norm()
    inv = QuadInt(n * eps.u, -n * eps.v, d)
    return inv ** (-k)


def make_field(d: int, allow_bruteforce: bool = True) -> FieldCtx:
    """Build the context for Q(sqrt d), rejecting unsupported d."""
    _check_d(d)
    d = int(d)
    if d <= 200:
        if d not in CLASS_NUMBER_ONE:
            raise ClassNumberNotOne(f"Q(√{d}) does not have class number one")
    elif not (allow_bruteforce and class_number_is_one(d)):
        raise ClassNumberNotOne(f"Q(√{d}) does not have class number one (Minkowski check)")
    eps = fundamental_unit(d)
    return FieldCtx(d=d, eps=eps, log_eps=_log_sigma1(eps), disc=4 * d)


def _log_sum(u: int, v: int, d: int) -> float:
    """log(|u| + |v| sqrt d) for arbitrarily large integers."""
    u, v = abs(u), abs(v)
    shift = max(u.bit_length(), v.bit_length()) - 900
    if shift > 0:
        u >>= shift
        v >>= shift
        return math.log(u + v * math.sqrt(d)) + shift * math.log(2.0)
    return math.log(u + v * math.sqrt(d))


def _log_sigma1(a: QuadInt) -> float:
    return _log_sum(a.u, a.v, a.d) if a.u * a.v >= 0 else math.log(a.abs_norm()) - _log_sum(a.u, a.v, a.d)


def raw_w(a: QuadInt, log_eps: float) -> float:
    """log|sigma1(a)/sigma2(a)| / (2 log eps) for any nonzero a, without cancellation."""
    if not a:
        raise ZeroElement("W is undefined at 0")
    log_n = math.log(a.abs_norm())
    ls = _log_sum(a.u, a.v, a.d)
    log_s1 = ls if a.u * a.v >= 0 else log_n - ls
    return (2.0 * log_s1 - log_n) / (2.0 * log_eps)


def w_array(u: np.ndarray, v: np.ndarray, d: int, log_eps: float) -> np.ndarray:
    """Vectorized raw_w for int64 coordinates."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    n = np.abs(u * u - d * v * v).astype(np.float64)
    ls = np.log(np.abs(u).astype(np.float64) + np.abs(v).astype(np.float64) * math.sqrt(d))
    log_n = np.log(n)
    log_s1 = np.where(u * v >= 0, ls, log_n - ls)
    return (2.0 * log_s1 - log_n) / (2.0 * log_eps)


def _abs_s1_le(x: QuadInt, y: QuadInt) -> int:
    """Sign of |sigma1(x)| - |sigma1(y)| (exact)."""
    return exact_sign(x * x - y * y)


def _upper_ok(b: QuadInt, ctx: FieldCtx) -> bool:
    # |sigma1(b)| <= eps |sigma2(b)| = |sigma1(eps * conj b)|
    return _abs_s1_le(b, ctx.eps * b.conj()) <= 0


def _lower_ok(b: QuadInt, ctx: FieldCtx) -> bool:
    # eps^{-1} |sigma2(b)| < |sigma1(b)|  <=>  |sigma1(conj b)| < |sigma1(eps b)|
    return _abs_s1_le(b.conj(), ctx.eps * b) < 0


def in_fundamental_domain(b: QuadInt, ctx: FieldCtx) -> bool:
    """eps^-1 |s2(b)| < |s1(b)| <= eps |s2(b)|, ignoring the sign."""
    return bool(b) and _upper_ok(b, ctx) and _lower_ok(b, ctx)


def is_canonical(b: QuadInt, ctx: FieldCtx) -> bool:
    """Fundamental-domain test with positive first embedding."""
    return bool(b) and exact_sign(b) > 0 and _upper_ok(b, ctx) and _lower_ok(b, ctx)


def canonical_generator(a: QuadInt, ctx: FieldCtx) -> QuadInt:
    """The generator b of (a) with eps^-1|s2(b)| < |s1(b)| <= eps|s2(b)| and s1(b) > 0."""
    if not a:
        raise ZeroElement("the zero ideal has no canonical generator")
    k = -int(round(raw_w(a, ctx.log_eps)))
    b = a * ctx.unit_power(k) if k else a
    while True:
        if not _upper_ok(b, ctx):
            b = b * ctx.eps_inv
        elif not _lower_ok(b, ctx):
            b = b * ctx.eps
        else:
            break
    return b if exact_sign(b) > 0 else -b


def norm_bounds_hold(b: QuadInt, ctx: FieldCtx) -> bool:
    """eps^-1 N <= sigma_i(b)^2 <= eps N for i = 1, 2, decided exactly."""
    n = b.abs_norm()
    eps = ctx.eps
    for s in (b, b.conj()):
        sq = s * s
        # sigma1(s)^2 <= eps * N  and  sigma1(s)^2 * eps >= N
        if exact_sign(sq - eps * n) > 0:
            return False
        if exact_sign(sq * eps - n) < 0:
            return False
    return True
