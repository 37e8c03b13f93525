"""Vaughan's identity over ideals and the type I / type II sums built from it.

Divisor sums are computed on exponent vectors of the prime factorization, so
no ideal products are formed.  The type sums only depend on the norms of the
ideals involved, so they are evaluated on per-norm character sums:
g(m) = sum over N(r) = m of chi(r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .characters import HeckeChar, hecke_values
from .ideals import Ideal, factor_ideal, ideal_table, prime_power_table
from .quad_field import FieldCtx, QuadInt

__all__ = [
    "PreconditionUViolated",
    "ParamDomain",
    "VaughanParams",
    "vaughan_terms",
    "h_weight",
    "h_weights",
    "TypeIResult",
    "TypeIIResult",
    "type_I",
    "type_II",
    "dyadic_windows",
    "lambda_split",
]


class PreconditionUViolated(ValueError):
    pass


class ParamDomain(ValueError):
    pass


@dataclass(frozen=True)
class VaughanParams:
    x: int
    U: float
    V: float

    @classmethod
    def default(cls, x: int, P: float) -> "VaughanParams":
        """U = V = x^(2/5) P^(-3/5), clipped below at 1."""
        u = max(1.0, x ** 0.4 * P ** -0.6)
        return cls(int(x), u, u)


def _divisor_data(n: Ideal, ctx: FieldCtx):
    """For each divisor exponent vector: (exps, norm, mu, Lambda)."""
    facs = factor_ideal(n, ctx).factors
    ps = [P.norm for P, _ in facs]
    out = []
    for t in product(*(range(e + 1) for _, e in facs)):
        nz = [i for i, k in enumerate(t) if k]
        norm = math.prod(p ** k for p, k in zip(ps, t))
        mu = 0 if any(k > 1 for k in t) else (-1) ** len(nz)
        lam = math.log(ps[nz[0]]) if len(nz) == 1 else 0.0
        out.append((t, norm, mu, lam))
    return out, [e for _, e in facs]


def _h_from(exps: tuple[int, ...], divs, V: float) -> int:
    """H of the divisor with exponent vector exps."""
    return sum(mu for t, norm, mu, _ in divs if mu and norm <= V and all(a <= b for a, b in zip(t, exps)))


def vaughan_terms(n: Ideal, U: float, V: float, ctx: FieldCtx) -> tuple[float, float, float]:
    """(a1, a2, a3) with a1 + a2 + a3 = Lambda(n) whenever N(n) > U."""
    if n.norm <= U:
        raise PreconditionUViolated(f"N(n) = {n.norm} <= U = {U}")
    divs, top = _divisor_data(n, ctx)
    norm_of = {t: nm for t, nm, _, _ in divs}
    log_n = math.log(n.norm)
    a1 = a2 = a3 = 0.0
    for t, norm, mu, lam in divs:
        co = tuple(e - k for e, k in zip(top, t))
        if lam and norm <= U:
            a1 -= lam * _h_from(co, divs, V)
        if mu and norm <= V:
            a2 += mu * (log_n - math.log(norm))
        if lam and norm > U and norm_of[co] > 1:
            a3 -= lam * _h_from(co, divs, V)
    return a1, a2, a3


def h_weight(r: Ideal, V: float, ctx: FieldCtx) -> int:
    """H(r) = sum of mu(d) over divisors d of r with N(d) <= V."""
    divs, top = _divisor_data(r, ctx)
    return _h_from(tuple(top), divs, V)


def h_weights(ideals: Sequence[Ideal], V: float, ctx: FieldCtx) -> np.ndarray:
    return np.array([h_weight(r, V, ctx) for r in ideals], dtype=np.int64)


def _family_args(family, P, N):
    members = list(getattr(family, "members", family))
    P = getattr(family, "P", P if P is not None else 1.0)
    N = getattr(family, "N", N if N is not None else 0)
    return members, float(P), int(N)


def _norm_sums(h: HeckeChar, tab, weights: np.ndarray | None, size: int) -> np.ndarray:
    vals = hecke_values(h, tab.u, tab.v, tab.w)
    if weights is not None:
        vals = vals * weights
    return np.bincount(tab.norm, vals.real, minlength=size) + 1j * np.bincount(tab.norm, vals.imag, minlength=size)


@dataclass(frozen=True)
class TypeIResult:
    value: float
    shape: float

    @property
    def ratio(self) -> float:
        return self.value / self.shape


def type_I(x: int, U: float, V: float, family, ctx: FieldCtx, P: float | None = None, N: int | None = None) -> TypeIResult:
    """(log x) sum_chi sum_{N(t) <= UV} max_{w <= x/N(t)} |sum_{U/N(t) < N(r) <= w} chi(r)|.

    The ideals t enter only through their norms, weighted by the number of
    ideals of each norm.  The shape is x^(1/3) P^(7/3) (N+1) (UV)^(2/3) log^3 x.
    """
    if U * V > x:
        raise ParamDomain(f"UV = {U * V} exceeds x = {x}")
    members, P, N = _family_args(family, P, N)
    shape = x ** (1 / 3) * P ** (7 / 3) * (N + 1) * (U * V) ** (2 / 3) * math.log(x) ** 3
    if not members:
        return TypeIResult(0.0, shape)
    tab = ideal_table(int(x), ctx)
    counts = np.bincount(tab.norm, minlength=x + 1)
    ts = [n for n in range(1, int(U * V) + 1) if counts[n]]
    total = 0.0
    for h in members:
        C = np.cumsum(_norm_sums(h, tab, None, x + 1))
        for n in ts:
            lo, hi = int(U // n), x // n
            seg = C[lo:hi + 1] - C[lo]
            total += counts[n] * float(np.abs(seg).max())
    return TypeIResult(math.log(x) * total, shape)


def dyadic_windows(x: int, U: float, V: float) -> list[int]:
    """Powers M = 2^j whose windows (max(U, M), 2M] tile (U, x/V]."""
    out, M = [], 1
    while M <= x / V:
        if 2 * M > U:
            out.append(M)
        M *= 2
    return out


@dataclass(frozen=True)
class TypeIIResult:
    value: float
    pieces: dict[int, float]
    shape: float
    piece_shapes: dict[int, float] = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.value / self.shape

    @property
    def piece_ratios(self) -> dict[int, float]:
        return {M: self.pieces[M] / self.piece_shapes[M] for M in self.pieces}


def _bilinear_by_norm(B: np.ndarray, C: np.ndarray, x: int) -> np.ndarray:
    """D[k] = sum_{ij = k} B[i] C[j] for k <= x."""
    D = np.zeros(x + 1, dtype=np.complex128)
    for i in np.nonzero(B)[0]:
        jmax = x // i
        if jmax < 1:
            break
        D[i * np.arange(1, jmax + 1)] += B[i] * C[1:jmax + 1]
    return D


def _type_II_inputs(x: int, U: float, V: float, ctx: FieldCtx):
    pp = prime_power_table(int(x), ctx)
    pp = pp.below(int(x // V))
    m_mask = pp.norm > U
    rtab = ideal_table(int(x), ctx)
    rmax = int(x // max(U, 1))
    k = int(np.searchsorted(rtab.norm, rmax, side="right"))
    r_sel = np.nonzero(rtab.norm[:k] > V)[0]
    ideals = [Ideal(int(rtab.norm[i]), _gen(rtab, i, ctx)) for i in r_sel]
    H = h_weights(ideals, V, ctx).astype(np.float64)
    return pp, m_mask, rtab, r_sel, H


def _gen(tab, i, ctx):
    return QuadInt(int(tab.u[i]), int(tab.v[i]), ctx.d)


class _Sub:
    def __init__(self, tab, sel):
        self.u, self.v, self.w, self.norm = tab.u[sel], tab.v[sel], tab.w[sel], tab.norm[sel]


def type_II(x: int, U: float, V: float, family, ctx: FieldCtx, P: float | None = None, N: int | None = None) -> TypeIIResult:
    """sum_chi max_{y <= x} |sum_{N(m) > U, N(r) > V, N(mr) <= y} Lambda(m) H(r) chi(mr)|.

    Also returns the dyadic pieces T_II(M) with m restricted to
    (max(U, M), 2M].  Shapes are the constant-free right-hand sides of the
    piece bound and of the summed bound.
    """
    if U * V > x:
        raise ParamDomain(f"UV = {U * V} exceeds x = {x}")
    members, P, N = _family_args(family, P, N)
    Nt = N + 1
    lx, lp = math.log(x), math.log(2 * P)
    shape = (x + x * P ** (4 / 3) * Nt ** 0.5 * (U ** (-1 / 3) + V ** (-1 / 3)) + x ** (2 / 3) * P ** (8 / 3) * Nt) * lx ** 7
    windows = dyadic_windows(x, U, V)
    piece_shapes = {
        M: (x + x ** (2 / 3) * M ** (1 / 3) * P ** (4 / 3) * Nt ** 0.5 * lp + x * M ** (-1 / 3) * P ** (4 / 3) * Nt ** 0.5 * lp + x ** (2 / 3) * P ** (8 / 3) * Nt * lp ** 2) * lx ** 4
        for M in windows
    }
    if not members:
        return TypeIIResult(0.0, {M: 0.0 for M in windows}, shape, piece_shapes)
    pp, m_mask, rtab, r_sel, H = _type_II_inputs(x, U, V, ctx)
    msub, rsub = _Sub(pp, m_mask), _Sub(rtab, r_sel)
    lam = pp.lam[m_mask]
    size = x + 1
    total = 0.0
    pieces = {M: 0.0 for M in windows}
    for h in members:
        B = _norm_sums(h, msub, lam, size)
        C = _norm_sums(h, rsub, H, size)
        total += float(np.abs(np.cumsum(_bilinear_by_norm(B, C, x))).max())
        idx = np.arange(size)
        for M in windows:
            Bm = np.where((idx > max(U, M)) & (idx <= 2 * M), B, 0)
            pieces[M] += float(np.abs(np.cumsum(_bilinear_by_norm(Bm, C, x))).max())
    return TypeIIResult(total, pieces, shape, piece_shapes)


def lambda_split(y: int, U: float, V: float, h: HeckeChar, ctx: FieldCtx) -> dict[str, complex]:
    """Both sides of sum_{N(n) <= y} Lambda(n) chi(n) = sum_{N(n) <= U} Lambda chi + S1 + S2 + S3.

    S_i = sum over U < N(n) <= y of chi(n) a_i(n).  The bilinear form of S3
    (minus the unwindowed type II inner sum at y) is returned as well.
    """
    tab = ideal_table(int(y), ctx)
    vals = hecke_values(h, tab.u, tab.v, tab.w)
    S = [0j, 0j, 0j]
    for i in np.nonzero(tab.norm > U)[0]:
        if vals[i] == 0:
            continue
        a = vaughan_terms(Ideal(int(tab.norm[i]), _gen(tab, i, ctx)), U, V, ctx)
        for k in range(3):
            S[k] += vals[i] * a[k]
    pp = prime_power_table(int(y), ctx)
    pvals = hecke_values(h, pp.u, pp.v, pp.w) * pp.lam
    lhs = complex(pvals.sum())
    boundary = complex(pvals[pp.norm <= U].sum())
    s3_bilinear = 0j
    if U * V <= y:
        ppm, m_mask, rtab, r_sel, H = _type_II_inputs(y, U, V, ctx)
        B = _norm_sums(h, _Sub(ppm, m_mask), ppm.lam[m_mask], y + 1)
        C = _norm_sums(h, _Sub(rtab, r_sel), H, y + 1)
        s3_bilinear = -complex(_bilinear_by_norm(B, C, y).sum())
    return {"lhs": lhs, "boundary": boundary, "S1": S[0], "S2": S[1], "S3": S[2], "S3_bilinear": s3_bilinear}
