"""Dirichlet characters modulo an ideal and their Hecke extensions.

Residues modulo q = (g) are indexed through the Hermite basis {(A, 0), (B, C)}
of the lattice g*Z[sqrt d] inside Z^2, so that u + v sqrt(d) has index
v' * A + u' with 0 <= u' < A, 0 <= v' < C.  The unit group (O/q)* is split
into prime-power components by CRT, and each component is put in Smith form.
Characters keep exact phases: chi(a) = e(c(a) / L) with L the group exponent.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product

import numpy as np
from sympy import Matrix, ZZ, cyclotomic_poly, symbols, Poly
from sympy.matrices.normalforms import smith_normal_decomp

from .ideals import Ideal, divisors, factor_ideal
from .quad_field import FieldCtx, QuadInt, raw_w

__all__ = [
    "RESIDUE_CAP",
    "ModulusTooLarge",
    "ResidueLattice",
    "ResidueGroup",
    "residue_group",
    "DirichletChar",
    "characters_mod",
    "conductor",
    "is_primitive",
    "tau_chi",
    "HeckeChar",
    "hecke_char",
    "hecke_product",
    "eval_hecke",
    "hecke_values",
    "xi_power",
    "orthogonality_holds",
]

RESIDUE_CAP = 10**5


class ModulusTooLarge(ValueError):
    pass


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        t = a // b
        a, b = b, a - t * b
        x0, x1 = x1, x0 - t * x1
        y0, y1 = y1, y0 - t * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class ResidueLattice:
    """Hermite basis {(A, 0), (B, C)} of the ideal inside Z^2 = {u + v sqrt d}."""

    A: int
    B: int
    C: int
    d: int

    @classmethod
    def of(cls, q: Ideal, ctx: FieldCtx) -> "ResidueLattice":
        g1, g2 = q.gen.u, q.gen.v
        # rows (g1, g2) and (d g2, g1) span the ideal
        C, x, y = _ext_gcd(g2, g1)
        B = x * g1 + y * ctx.d * g2
        A = q.norm // C
        return cls(A, B % A, C, ctx.d)

    @property
    def size(self) -> int:
        return self.A * self.C

    def index(self, a: QuadInt) -> int:
        t = a.v // self.C
        return (a.v - t * self.C) * self.A + (a.u - t * self.B) % self.A

    def index_array(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        t = v // self.C
        return (v - t * self.C) * self.A + (u - t * self.B) % self.A

    def rep(self, i: int) -> QuadInt:
        return QuadInt(i % self.A, i // self.A, self.d)

    def rep_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        i = np.arange(self.size, dtype=np.int64)
        return i % self.A, i // self.A

    def mul_perm(self, g: QuadInt) -> np.ndarray:
        """Index of rep_i * g for every residue i."""
        u, v = self.rep_arrays()
        return self.index_array(u * g.u + self.d * v * g.v, u * g.v + v * g.u)


@dataclass(eq=False)
class ResidueGroup:
    """(O/q)* as a product of cyclic groups with a full discrete-log table."""

    modulus: Ideal
    lattice: ResidueLattice
    orders: tuple[int, ...]
    generator_index: tuple[int, ...]
    dlog: np.ndarray  # (N(q), r), -1 on non-units
    unit_mask: np.ndarray
    components: tuple[tuple[Ideal, int], ...] = field(default=())

    @property
    def phi(self) -> int:
        return int(self.unit_mask.sum())

    @property
    def exponent(self) -> int:
        return math.lcm(*self.orders) if self.orders else 1

    @property
    def representatives(self) -> list[QuadInt]:
        return [self.lattice.rep(i) for i in range(self.lattice.size)]

    @property
    def unit_generators(self) -> list[tuple[QuadInt, int]]:
        return [(self.lattice.rep(i), m) for i, m in zip(self.generator_index, self.orders)]

    def index(self, a: QuadInt) -> int:
        return self.lattice.index(a)

    def log(self, a: QuadInt) -> tuple[int, ...] | None:
        i = self.index(a)
        if not self.unit_mask[i]:
            return None
        return tuple(int(x) for x in self.dlog[i])


def _cyclic_decomposition(lat: ResidueLattice, members: np.ndarray, candidates: list[int], one: int):
    """Smith-form decomposition of the subgroup spanned by `members` (a boolean mask).

    Builds a polycyclic series from the candidates, then diagonalizes the
    relation matrix.  Returns (orders, generator indices, dlog rows for all
    residues; -1 outside the subgroup).
    """
    N = lat.size
    target = int(members.sum())
    in_h = np.zeros(N, dtype=bool)
    in_h[one] = True
    exps = np.zeros((N, 0), dtype=np.int64)
    gens: list[int] = []
    rel: list[list[int]] = []
    count = 1
    for g in candidates:
        if count == target:
            break
        if in_h[g]:
            continue
        perm = lat.mul_perm(lat.rep(g))
        x, m = g, 1
        while not in_h[x]:
            x = perm[x]
            m += 1
        k = len(gens)
        exps = np.hstack([exps, np.zeros((N, 1), dtype=np.int64)])
        base = np.nonzero(in_h)[0]
        cur = base
        for j in range(1, m):
            cur = perm[cur]
            exps[cur] = exps[base]
            exps[cur, k] = j
            in_h[cur] = True
        count *= m
        rel.append([-int(e) for e in exps[x, :k]] + [m])
        gens.append(g)
    if count != target:
        raise RuntimeError("unit group enumeration incomplete")
    k = len(gens)
    if k == 0:
        return (), (), np.where(in_h[:, None], 0, -1)[:, :0]
    R = Matrix([row + [0] * (k - len(row)) for row in rel])
    D, _, T = smith_normal_decomp(R, domain=ZZ)
    diag = [int(D[i, i]) for i in range(k)]
    for j in range(k):
        if diag[j] < 0:
            diag[j] = -diag[j]
            T[:, j] = -T[:, j]
    Tinv = T.inv()
    keep = [j for j in range(k) if diag[j] > 1]
    Tn = np.array(T.tolist(), dtype=object)
    logs = (exps.astype(object) @ Tn)[:, keep]
    orders = tuple(diag[j] for j in keep)
    logs = np.array([[int(x) % m for x, m in zip(row, orders)] for row in logs], dtype=np.int64).reshape(N, len(keep))
    logs[~in_h] = -1
    new_gens = []
    for j in keep:
        # the element whose exponent vector is row j of T^-1
        want = [int(Tinv[j, c]) for c in range(k)]
        idx = one
        for c, e in enumerate(want):
            perm = lat.mul_perm(lat.rep(gens[c]))
            for _ in range(e % _element_order(perm, gens[c], one)):
                idx = perm[idx]
        new_gens.append(int(idx))
    return orders, tuple(new_gens), logs


def _element_order(perm: np.ndarray, g: int, one: int) -> int:
    x, m = g, 1
    while x != one:
        x = perm[x]
        m += 1
    return m


@lru_cache(maxsize=512)
def residue_group(q: Ideal, ctx: FieldCtx) -> ResidueGroup:
    """Structure of (O/q)* with generators, orders and discrete logs."""
    if q.norm > RESIDUE_CAP:
        raise ModulusTooLarge(f"N(q) = {q.norm} exceeds the cap {RESIDUE_CAP}")
    lat = ResidueLattice.of(q, ctx)
    N = lat.size
    ru, rv = lat.rep_arrays()
    one = lat.index(QuadInt(1, 0, ctx.d))
    facs = factor_ideal(q, ctx).factors
    unit = np.ones(N, dtype=bool)
    for P, _ in facs:
        unit &= ResidueLattice.of(P, ctx).index_array(ru, rv) != 0
    comps = []
    for P, e in facs:
        qi = Ideal.of(P.gen ** e, ctx)
        li = ResidueLattice.of(qi, ctx)
        comps.append((P, e, li, li.index_array(ru, rv), li.index(QuadInt(1, 0, ctx.d))))
    orders: list[int] = []
    gens: list[int] = []
    blocks = []
    for i, (_, _, li, idx_i, one_i) in enumerate(comps):
        mask = unit.copy()
        for j, (_, _, _, idx_j, one_j) in enumerate(comps):
            if j != i:
                mask &= idx_j == one_j
        lookup = np.full(li.size, -1, dtype=np.int64)
        lookup[idx_i[mask]] = np.nonzero(mask)[0]
        cands = []
        for w in (ctx.eps, QuadInt(-1, 0, ctx.d)):
            c = int(lookup[li.index(w)])
            if c >= 0:
                cands.append(c)
        cands += [int(k) for k in np.nonzero(mask)[0]]
        o, g, logs = _cyclic_decomposition(lat, mask, cands, one)
        orders += o
        gens += g
        rows = np.full((N, len(o)), -1, dtype=np.int64)
        rows[unit] = logs[lookup[idx_i[unit]]]
        blocks.append(rows)
    dlog = np.hstack(blocks) if blocks else np.zeros((N, 0), dtype=np.int64)
    return ResidueGroup(q, lat, tuple(orders), tuple(gens), dlog, unit, tuple((P, e) for P, e, *_ in comps))


@dataclass(frozen=True, eq=False)
class DirichletChar:
    """chi(g_i) = e(phases[i] / orders[i]) on the Smith generators of (O/q)*."""

    group: ResidueGroup
    phases: tuple[int, ...]

    @property
    def modulus(self) -> Ideal:
        return self.group.modulus

    @property
    def order_exponent(self) -> int:
        return self.group.exponent

    def __eq__(self, other):
        return isinstance(other, DirichletChar) and (self.modulus, self.phases) == (other.modulus, other.phases)

    def __hash__(self):
        return hash((self.modulus, self.phases))

    def __repr__(self):
        return f"DirichletChar(mod {self.modulus}, phases={self.phases})"

    @cached_property
    def phase_table(self) -> np.ndarray:
        """c(a) mod L for each residue index; -1 on non-units."""
        G = self.group
        L = G.exponent
        if not G.orders:
            return np.where(G.unit_mask, 0, -1).astype(np.int64)
        w = np.array([k * (L // m) for k, m in zip(self.phases, G.orders)], dtype=np.int64)
        c = (G.dlog @ w) % L
        return np.where(G.unit_mask, c, -1)

    @property
    def is_principal(self) -> bool:
        return not any(self.phases)

    def phase(self, a: QuadInt) -> Fraction | None:
        c = int(self.phase_table[self.group.index(a)])
        return None if c < 0 else Fraction(c, self.group.exponent)

    def __call__(self, a: QuadInt) -> complex:
        f = self.phase(a)
        return 0j if f is None else cmath.exp(2j * math.pi * f)

    def values(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        c = self.phase_table[self.group.lattice.index_array(u, v)]
        out = np.exp(2j * np.pi * c / self.group.exponent)
        out[c < 0] = 0
        return out

    def conj(self) -> "DirichletChar":
        return DirichletChar(self.group, tuple((-k) % m for k, m in zip(self.phases, self.group.orders)))


def characters_mod(q: Ideal, ctx: FieldCtx) -> list[DirichletChar]:
    G = residue_group(q, ctx)
    return [DirichletChar(G, ph) for ph in product(*(range(m) for m in G.orders))]


def conductor(chi: DirichletChar, ctx: FieldCtx) -> Ideal:
    """Smallest divisor q1 of the modulus with chi trivial on units congruent to 1 mod q1."""
    G = chi.group
    ru, rv = G.lattice.rep_arrays()
    table = chi.phase_table
    for q1 in sorted(divisors(chi.modulus, ctx)):
        lat1 = ResidueLattice.of(q1, ctx)
        kernel = G.unit_mask & (lat1.index_array(ru, rv) == lat1.index(QuadInt(1, 0, ctx.d)))
        if not table[kernel].any():
            return q1
    return chi.modulus


def is_primitive(chi: DirichletChar, ctx: FieldCtx) -> bool:
    return conductor(chi, ctx) == chi.modulus


def tau_chi(chi: DirichletChar, ctx: FieldCtx) -> Fraction:
    """arg(chi(eps)) / 2pi normalized into (-1/2, 1/2]."""
    t = chi.phase(ctx.eps)
    return t - 1 if t > Fraction(1, 2) else t


@dataclass(frozen=True)
class HeckeChar:
    """chi_H((s)) = chi(s) * sgn(sigma1 s)^u1 * |sigma1/sigma2 (s)|^{iv} * xi(s)^twist_n."""

    chi: DirichletChar
    twist_n: int
    tau: Fraction
    rho: Fraction
    u1: int
    u2: int
    v: float

    @property
    def modulus(self) -> Ideal:
        return self.chi.modulus

    @property
    def frequency(self) -> float:
        """Coefficient f with chi_H((s)) = chi(s) e(f W(s)) for sigma1(s) > 0."""
        return self.twist_n + float(self.rho)

    @property
    def is_principal(self) -> bool:
        return self.chi.is_principal and self.twist_n == 0

    def infinite_part(self, a: QuadInt, ctx: FieldCtx) -> complex:
        s1 = 1 if a.sigma1() > 0 else -1
        s2 = 1 if a.sigma2() > 0 else -1
        log_ratio = 2 * ctx.log_eps * raw_w(a, ctx.log_eps)
        return s1 ** self.u1 * s2 ** self.u2 * cmath.exp(1j * self.v * log_ratio)

    def requirement_residuals(self, ctx: FieldCtx) -> tuple[float, float]:
        """|chi chi_inf (eps) - 1| and |chi chi_inf (-1) - 1|."""
        m1 = QuadInt(-1, 0, ctx.d)
        return (
            abs(self.chi(ctx.eps) * self.infinite_part(ctx.eps, ctx) - 1),
            abs(self.chi(m1) * self.infinite_part(m1, ctx) - 1),
        )

    def __repr__(self):
        return f"HeckeChar(mod {self.modulus}, phases={self.chi.phases}, n={self.twist_n}, tau={self.tau})"


def hecke_char(chi: DirichletChar, n: int, ctx: FieldCtx) -> HeckeChar:
    """Base infinite part with m = 0, u2 = 0, u1 from chi(-1), twisted by xi^n."""
    tau = tau_chi(chi, ctx)
    rho = -tau
    sign = chi.phase(QuadInt(-1, 0, ctx.d))
    u1 = 0 if sign == 0 else 1
    v = math.pi * float(rho) / ctx.log_eps
    return HeckeChar(chi, int(n), tau, rho, u1, 0, v)


def hecke_product(h1: HeckeChar, h2: HeckeChar, ctx: FieldCtx) -> HeckeChar:
    """h1 * conj(h2) as a Hecke character modulo q1 q2."""
    q = Ideal.of(h1.modulus.gen * h2.modulus.gen, ctx)
    G = residue_group(q, ctx)
    phases = []
    for (g, m) in G.unit_generators:
        f = (h1.chi.phase(g) - h2.chi.phase(g)) % 1
        k = f * m
        assert k.denominator == 1
        phases.append(int(k))
    chi = DirichletChar(G, tuple(phases))
    base = hecke_char(chi, 0, ctx)
    # keep the archimedean frequency (n1 - tau1) - (n2 - tau2) while tau wraps
    shift = (h1.twist_n - h1.tau) - (h2.twist_n - h2.tau) + base.tau
    return hecke_char(chi, int(shift), ctx)


def eval_hecke(h: HeckeChar, a: Ideal | QuadInt, ctx: FieldCtx) -> complex:
    """Value on the ideal generated by a; any generator gives the same result."""
    g = a.gen if isinstance(a, Ideal) else a
    c = h.chi(g)
    if c == 0:
        return 0j
    return c * h.infinite_part(g, ctx) * cmath.exp(2j * math.pi * h.twist_n * raw_w(g, ctx.log_eps))


def hecke_values(h: HeckeChar, u: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Vectorized values on canonical generators (sigma1 > 0) with coordinates W."""
    return h.chi.values(u, v) * np.exp(2j * np.pi * h.frequency * w)


def xi_power(n: int, a: Ideal | QuadInt, ctx: FieldCtx) -> complex:
    g = a.gen if isinstance(a, Ideal) else a
    return cmath.exp(2j * math.pi * n * raw_w(g, ctx.log_eps))


@lru_cache(maxsize=None)
def _cyclotomic_reduction(L: int) -> np.ndarray:
    """Row k holds the coefficients of x^k mod Phi_L (degree < phi(L))."""
    x = symbols("x")
    phi = [int(c) for c in reversed(Poly(cyclotomic_poly(L, x), x).all_coeffs())]
    deg = len(phi) - 1
    rows = np.zeros((L, deg), dtype=np.int64)
    cur = np.zeros(deg, dtype=np.int64)
    cur[0] = 1
    for k in range(L):
        rows[k] = cur
        top = cur[-1]
        cur = np.concatenate([[0], cur[:-1]]) - top * np.array(phi[:-1], dtype=np.int64)
    return rows


def orthogonality_holds(q: Ideal, ctx: FieldCtx) -> bool:
    """sum_chi chi(a) conj(chi(b)) = phi(q) [a = b] for all units a, b, exactly.

    Each sum is a multiset of L-th roots of unity; it is reduced to the power
    basis of Q(zeta_L) so that the comparison is over integers.
    """
    G = residue_group(q, ctx)
    chars = characters_mod(q, ctx)
    L = G.exponent
    units = np.nonzero(G.unit_mask)[0]
    P = np.stack([c.phase_table[units] for c in chars], axis=1)  # (phi, #chars)
    red = _cyclotomic_reduction(L).astype(np.float64)
    phi = len(units)
    expect_eq = np.zeros(red.shape[1])
    expect_eq[0] = phi
    for i in range(phi):
        diff = (P[i][None, :] - P) % L
        counts = np.zeros((phi, L), dtype=np.float64)
        np.add.at(counts, (np.repeat(np.arange(phi), P.shape[1]), diff.ravel()), 1)
        s = counts @ red
        want = np.zeros_like(s)
        want[i] = expect_eq
        if not np.array_equal(s, want):
            return False
    return True
