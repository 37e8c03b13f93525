"""Integral ideals as canonical generators.

With class number one every ideal is principal, so an ideal is stored as the
unique generator in the fundamental domain with positive first embedding.
Two enumeration routes are provided and must agree: a multiplicative sieve
built from prime ideals (``enumerate_ideals``) and a vectorized lattice scan
(``ideal_table``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterator

import numpy as np
from sympy import factorint, isprime, primerange

from .quad_field import (
    FieldCtx,
    QuadInt,
    _find_norm_element,
    canonical_generator,
    exact_sign,
    is_canonical,
    w_array,
)

__all__ = [
    "NotPrime",
    "Ideal",
    "Split",
    "Inert",
    "Ramified",
    "IdealFactorization",
    "splitting_type",
    "prime_ideals_up_to",
    "enumerate_ideals",
    "IdealEnumeration",
    "ideal_table",
    "IdealTable",
    "PrimePowerTable",
    "prime_power_table",
    "factor_ideal",
    "von_mangoldt",
    "moebius",
    "euler_phi",
    "tau_div",
    "coprime",
    "divisors",
    "ideal_mul",
]


class NotPrime(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Ideal:
    """Nonzero ideal of Z[sqrt d], keyed by (norm, canonical generator)."""

    norm: int
    gen: QuadInt

    @classmethod
    def of(cls, a: QuadInt, ctx: FieldCtx) -> "Ideal":
        g = canonical_generator(a, ctx)
        return cls(g.abs_norm(), g)

    @classmethod
    def unit(cls, ctx: FieldCtx) -> "Ideal":
        return cls(1, QuadInt(1, 0, ctx.d))

    def __str__(self):
        return f"({self.gen})"


def ideal_mul(a: Ideal, b: Ideal, ctx: FieldCtx) -> Ideal:
    return Ideal.of(a.gen * b.gen, ctx)


@dataclass(frozen=True)
class Split:
    p: int
    pi: Ideal
    pibar: Ideal


@dataclass(frozen=True)
class Inert:
    p: int
    ideal: Ideal


@dataclass(frozen=True)
class Ramified:
    p: int
    pi: Ideal


@lru_cache(maxsize=None)
def splitting_type(p: int, ctx: FieldCtx) -> Split | Inert | Ramified:
    """Decomposition of the rational prime p in Z[sqrt d]."""
    p = int(p)
    if not isprime(p):
        raise NotPrime(f"{p} is not prime")
    d = ctx.d
    if p == 2 or d % p == 0:
        g = _find_norm_element(p, d, ctx.eps_float)
        return Ramified(p, Ideal.of(g, ctx))
    if pow(d, (p - 1) // 2, p) == p - 1:
        return Inert(p, Ideal(p * p, QuadInt(p, 0, d)))
    g = _find_norm_element(p, d, ctx.eps_float)
    if g is None:
        raise RuntimeError(f"no element of norm ±{p} in Q(√{d}); class number is not one")
    a, b = sorted((Ideal.of(g, ctx), Ideal.of(g.conj(), ctx)))
    return Split(p, a, b)


def splitting_character(p: int, d: int) -> int:
    """Kronecker symbol (4d / p): +1 split, -1 inert, 0 ramified."""
    if p == 2 or d % p == 0:
        return 0
    return 1 if pow(d, (p - 1) // 2, p) == 1 else -1


def _prime_ideals_over(p: int, ctx: FieldCtx) -> list[Ideal]:
    st = splitting_type(p, ctx)
    if isinstance(st, Split):
        return [st.pi, st.pibar]
    if isinstance(st, Inert):
        return [st.ideal]
    return [st.pi]


def _sqrt_mod_prime(a: int, p: int) -> int:
    """Tonelli-Shanks square root of a quadratic residue modulo an odd prime."""
    a %= p
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def _split_generators(ps: np.ndarray, ctx: FieldCtx) -> list[QuadInt]:
    """One element of norm +-p for each split prime p, found for all p at once.

    The prime (p, sqrt(d) - r) with r^2 = d mod p contains u + v sqrt(d) iff
    u = r v mod p.  Its canonical generator has |u| <= sqrt(eps p) < p/2 for
    p > 4 eps, so for each v the centred residue is the only candidate.
    """
    d = ctx.d
    roots = np.array([_sqrt_mod_prime(d, int(p)) for p in ps], dtype=np.int64)
    found_u = np.zeros(len(ps), dtype=np.int64)
    found_v = np.zeros(len(ps), dtype=np.int64)
    todo = np.arange(len(ps))
    vmax = math.isqrt(int(ctx.eps_float * int(ps.max()) / d) + 1) + 2
    for v in range(1, vmax + 1):
        if not todo.size:
            break
        p = ps[todo]
        u = (roots[todo] * v) % p
        u = np.where(2 * u > p, u - p, u)
        hit = np.abs(u * u - d * v * v) == p
        found_u[todo[hit]] = u[hit]
        found_v[todo[hit]] = v
        todo = todo[~hit]
    if todo.size:
        raise RuntimeError(f"no generator found for split primes {ps[todo][:5]}")
    return [QuadInt(int(a), int(b), d) for a, b in zip(found_u, found_v)]


def prime_ideals_up_to(X: int, ctx: FieldCtx) -> list[Ideal]:
    """All prime ideals of norm <= X, sorted by (norm, generator)."""
    X = int(X)
    out = []
    large_split = []
    for p in primerange(2, X + 1):
        p = int(p)
        kind = splitting_character(p, ctx.d)
        if kind == -1:
            if p * p <= X:
                out.append(Ideal(p * p, QuadInt(p, 0, ctx.d)))
        elif kind == 1 and p > 4 * ctx.eps_float + 4:
            large_split.append(p)
        else:
            out.extend(_prime_ideals_over(p, ctx))
    if large_split:
        for g in _split_generators(np.array(large_split, dtype=np.int64), ctx):
            out.append(Ideal.of(g, ctx))
            out.append(Ideal.of(g.conj(), ctx))
    out.sort()
    return out


@dataclass
class IdealFactorization:
    """Prime ideals with multiplicities, ordered by (norm, generator)."""

    factors: list[tuple[Ideal, int]]

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)

    def prod(self, ctx: FieldCtx) -> Ideal:
        g = QuadInt(1, 0, ctx.d)
        for P, e in self.factors:
            g = g * P.gen ** e
        return Ideal.of(g, ctx)


@lru_cache(maxsize=200_000)
def factor_ideal(a: Ideal, ctx: FieldCtx) -> IdealFactorization:
    """Factor through the rational factorization of N(a) and divisibility tests."""
    out = []
    g = a.gen
    for p, e in sorted(factorint(a.norm).items()):
        st = splitting_type(int(p), ctx)
        if isinstance(st, Inert):
            out.append((st.ideal, e // 2))
        elif isinstance(st, Ramified):
            out.append((st.pi, e))
        else:
            i, h = 0, g
            while i < e and st.pi.gen.divides(h):
                h = h.exact_div(st.pi.gen)
                i += 1
            if i:
                out.append((st.pi, i))
            if e - i:
                out.append((st.pibar, e - i))
    out.sort()
    return IdealFactorization(out)


def von_mangoldt(a: Ideal, ctx: FieldCtx) -> float:
    f = factor_ideal(a, ctx)
    return math.log(f.factors[0][0].norm) if len(f) == 1 else 0.0


def moebius(a: Ideal, ctx: FieldCtx) -> int:
    f = factor_ideal(a, ctx)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(a: Ideal, ctx: FieldCtx) -> int:
    r = 1
    for P, e in factor_ideal(a, ctx):
        r *= P.norm ** (e - 1) * (P.norm - 1)
    return r


def tau_div(a: Ideal, ctx: FieldCtx) -> int:
    r = 1
    for _, e in factor_ideal(a, ctx):
        r *= e + 1
    return r


def coprime(a: Ideal | QuadInt, q: Ideal, ctx: FieldCtx) -> bool:
    """No prime ideal divides both."""
    g = a.gen if isinstance(a, Ideal) else a
    if not g:
        return q.norm == 1
    return not any(P.gen.divides(g) for P, _ in factor_ideal(q, ctx))


def divisors(a: Ideal, ctx: FieldCtx) -> list[Ideal]:
    f = factor_ideal(a, ctx).factors
    out = []
    for exps in product(*(range(e + 1) for _, e in f)):
        g = QuadInt(1, 0, ctx.d)
        for (P, _), k in zip(f, exps):
            if k:
                g = g * P.gen ** k
        out.append(Ideal.of(g, ctx))
    out.sort()
    return out


@dataclass
class IdealEnumeration:
    """Counts c(n) of ideals of norm n (index 0 unused) and the sorted ideals."""

    X: int
    counts: np.ndarray
    ideals: list[Ideal]

    def __iter__(self) -> Iterator[Ideal]:
        return iter(self.ideals)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _norm_count_sieve(X: int, ctx: FieldCtx) -> np.ndarray:
    """c(n) = sum_{m | n} chi_D(m), chi_D the splitting character, via a sieve."""
    chi = np.zeros(X + 1, dtype=np.int64)
    chi[1] = 1
    # completely multiplicative: fill through smallest prime factors
    spf = np.zeros(X + 1, dtype=np.int64)
    for p in primerange(2, X + 1):
        p = int(p)
        block = spf[p::p]
        block[block == 0] = p
    chi_p = {}
    for n in range(2, X + 1):
        p = int(spf[n])
        if p not in chi_p:
            chi_p[p] = splitting_character(p, ctx.d)
        chi[n] = chi_p[p] * chi[n // p]
    counts = np.zeros(X + 1, dtype=np.int64)
    for m in range(1, X + 1):
        if chi[m]:
            counts[m::m] += chi[m]
    counts[0] = 0
    return counts


@lru_cache(maxsize=16)
def enumerate_ideals(X: int, ctx: FieldCtx) -> IdealEnumeration:
    """All ideals of norm <= X as products of prime ideals."""
    X = int(X)
    primes = prime_ideals_up_to(X, ctx)
    one = QuadInt(1, 0, ctx.d)
    found: list[Ideal] = [Ideal(1, one)]

    def walk(start: int, g: QuadInt, n: int):
        for i in range(start, len(primes)):
            P = primes[i]
            if n * P.norm > X:
                break
            h, m = g, n
            while m * P.norm <= X:
                h = canonical_generator(h * P.gen, ctx)
                m *= P.norm
                found.append(Ideal(m, h))
                walk(i + 1, h, m)

    walk(0, one, 1)
    found.sort()
    counts = _norm_count_sieve(X, ctx)
    return IdealEnumeration(X, counts, found)


@dataclass(frozen=True)
class IdealTable:
    """Canonical generators of all ideals with norm <= X as parallel arrays."""

    X: int
    u: np.ndarray
    v: np.ndarray
    norm: np.ndarray
    w: np.ndarray

    def __len__(self):
        return len(self.u)

    def ideals(self, ctx: FieldCtx) -> list[Ideal]:
        return [Ideal(int(n), QuadInt(int(a), int(b), ctx.d)) for a, b, n in zip(self.u, self.v, self.norm)]


def _snap_boundary(u, v, w, ctx: FieldCtx, tol: float = 1e-9):
    """Decide fundamental-domain membership exactly near W = +-1/2."""
    keep = (w > -0.5 + tol) & (w <= 0.5 - tol)
    near = np.nonzero((np.abs(w - 0.5) <= tol) | (np.abs(w + 0.5) <= tol))[0]
    w = w.copy()
    for i in near:
        b = QuadInt(int(u[i]), int(v[i]), ctx.d)
        if is_canonical(b, ctx):
            keep[i] = True
            if w[i] > 0 and exact_sign(b * b - ctx.eps * b.abs_norm()) == 0:
                w[i] = 0.5
    return keep, w


def lattice_scan(X: int, ctx: FieldCtx) -> IdealTable:
    """Brute-force scan of the box |sigma_i| <= sqrt(eps X) for canonical generators."""
    d = ctx.d
    sd = math.sqrt(d)
    B = math.sqrt(ctx.eps_float * X) * (1 + 1e-12) + 1
    vmax = int(B / sd) + 1
    vs = np.arange(-vmax, vmax + 1, dtype=np.int64)
    # sigma1 = u + v sd in (0, B], sigma2 = u - v sd in [-B, B]
    lo = np.maximum(np.floor(-vs * sd), np.floor(-B + vs * sd)).astype(np.int64)
    hi = np.minimum(np.ceil(B - vs * sd), np.ceil(B + vs * sd)).astype(np.int64)
    lens = np.maximum(hi - lo + 1, 0)
    rows = np.repeat(vs, lens)
    starts = np.repeat(lo, lens)
    offs = np.arange(lens.sum(), dtype=np.int64) - np.repeat(np.cumsum(lens) - lens, lens)
    u = starts + offs
    v = rows
    n = np.abs(u * u - d * v * v)
    pos = ((u >= 0) & (v >= 0) | (u > 0) & (v < 0) & (u * u > d * v * v) | (u < 0) & (v > 0) & (d * v * v > u * u))
    m = pos & (n >= 1) & (n <= X)
    u, v, n = u[m], v[m], n[m]
    w = w_array(u, v, d, ctx.log_eps)
    keep, w = _snap_boundary(u, v, w, ctx)
    u, v, n, w = u[keep], v[keep], n[keep], w[keep]
    order = np.lexsort((v, u, n))
    return IdealTable(int(X), u[order], v[order], n[order], w[order])


@lru_cache(maxsize=8)
def ideal_table(X: int, ctx: FieldCtx) -> IdealTable:
    return lattice_scan(int(X), ctx)


@dataclass(frozen=True)
class PrimePowerTable:
    """Canonical generators of prime-power ideals of norm <= X with Lambda values."""

    X: int
    u: np.ndarray
    v: np.ndarray
    norm: np.ndarray
    lam: np.ndarray
    w: np.ndarray

    def __len__(self):
        return len(self.u)

    def below(self, y: int) -> "PrimePowerTable":
        k = int(np.searchsorted(self.norm, y, side="right"))
        return PrimePowerTable(int(y), self.u[:k], self.v[:k], self.norm[:k], self.lam[:k], self.w[:k])


@lru_cache(maxsize=8)
def prime_power_table(X: int, ctx: FieldCtx) -> PrimePowerTable:
    X = int(X)
    rows = []
    for P in prime_ideals_up_to(X, ctx):
        lam = math.log(P.norm)
        g, n = P.gen, P.norm
        while n <= X:
            rows.append((n, g.u, g.v, lam))
            g = canonical_generator(g * P.gen, ctx)
            n *= P.norm
    rows.sort()
    if rows:
        n, u, v, lam = (np.array(c) for c in zip(*rows))
    else:
        n = u = v = np.zeros(0, dtype=np.int64)
        lam = np.zeros(0)
    u, v, n = u.astype(np.int64), v.astype(np.int64), n.astype(np.int64)
    w = w_array(u, v, ctx.d, ctx.log_eps)
    _, w = _snap_boundary(u, v, w, ctx)
    return PrimePowerTable(X, u, v, n, lam.astype(np.float64), w)
