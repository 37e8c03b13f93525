"""Prime ideal counting in sectors and arithmetic progressions.

All sums run over canonical generators of prime-power ideals, so each ideal
is counted once.  The step functions in y are evaluated at every distinct
prime-power norm, which makes the maxima over y <= x exact.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .characters import DirichletChar, HeckeChar, ResidueLattice, hecke_char, hecke_values, residue_group, tau_chi
from .ideals import Ideal, coprime, euler_phi, ideal_table, prime_power_table
from .quad_field import FieldCtx, QuadInt
from .sectors import SectorSpec, fourier_coeffs, in_sector_array, t_error

__all__ = [
    "NotCoprime",
    "Normalization",
    "ROUTE_BUDGET_CONSTANT",
    "RouteValue",
    "psi_K",
    "psi_S",
    "psi_chi",
    "main_term",
    "error_terms",
    "error_tilde_by_characters",
    "BVRow",
    "BVReport",
    "bv_lhs",
    "siegel_walfisz_decay",
]

# pointwise |F(W) - S_Z(W)| <= 2 T_Z(W) for the truncated sector indicator
ROUTE_BUDGET_CONSTANT = 2.0


class NotCoprime(ValueError):
    pass


class Normalization(str, Enum):
    PAPER_ETA = "paper"
    HALF_ETA = "half"

    def coefficient(self, spec: SectorSpec) -> float:
        return float(spec.eta) if self is Normalization.PAPER_ETA else float(spec.eta) / 2


def _sector_mask(tab, spec: SectorSpec, ctx: FieldCtx) -> np.ndarray:
    if spec.is_full:
        return np.ones(len(tab), dtype=bool)
    return in_sector_array(tab.u, tab.v, tab.w, spec, ctx)


def _residues(tab, q: Ideal, ctx: FieldCtx) -> tuple[np.ndarray, np.ndarray]:
    """Residue index of each generator modulo q and the coprimality mask."""
    G = residue_group(q, ctx)
    idx = G.lattice.index_array(tab.u, tab.v)
    return idx, G.unit_mask[idx]


def _check_coprime(a: QuadInt, q: Ideal, ctx: FieldCtx) -> None:
    if not coprime(a, q, ctx):
        raise NotCoprime(f"{a} is not coprime to {q}")


def psi_K(x: int, ctx: FieldCtx) -> float:
    """Sum of Lambda over all ideals of norm <= x."""
    return float(prime_power_table(int(x), ctx).lam.sum())


def psi_S(x: int, q: Ideal, a: QuadInt, spec: SectorSpec, ctx: FieldCtx) -> float:
    _check_coprime(a, q, ctx)
    tab = prime_power_table(int(x), ctx)
    idx, _ = _residues(tab, q, ctx)
    mask = _sector_mask(tab, spec, ctx) & (idx == ResidueLattice.of(q, ctx).index(a))
    return float(tab.lam[mask].sum())


@dataclass(frozen=True)
class RouteValue:
    value: complex
    budget: float = 0.0


def psi_chi(y: int, chi: DirichletChar, spec: SectorSpec, ctx: FieldCtx, route: str = "element", Z: int = 1000) -> RouteValue:
    """psi_S(y, chi) by direct summation or through Hecke characters xi^n chi_H.

    The Hecke route sums a_n(tau) over |n| <= Z and returns the error budget
    ROUTE_BUDGET_CONSTANT * sum Lambda(s) T_Z(W(s)).
    """
    tab = prime_power_table(int(y), ctx)
    if route == "element":
        vals = chi.values(tab.u, tab.v) * tab.lam
        return RouteValue(complex(vals[_sector_mask(tab, spec, ctx)].sum()))
    if route != "hecke":
        raise ValueError(f"unknown route {route!r}")
    if Z < 2:
        raise ValueError("Z must be at least 2")
    h0 = hecke_char(chi, 0, ctx)
    base = hecke_values(h0, tab.u, tab.v, tab.w) * tab.lam
    ns = np.arange(-Z, Z + 1)
    inner = np.zeros(len(ns), dtype=np.complex128)
    for i in range(0, len(base), 2048):
        w = tab.w[i:i + 2048]
        inner += np.exp(2j * np.pi * np.outer(ns, w)) @ base[i:i + 2048]
    value = complex(fourier_coeffs(ns, float(h0.tau), spec) @ inner)
    budget = ROUTE_BUDGET_CONSTANT * float(np.sum(tab.lam * t_error(tab.w, Z, spec)))
    return RouteValue(value, budget)


def main_term(x: int, q: Ideal, spec: SectorSpec, ctx: FieldCtx, normalization: Normalization | str = Normalization.HALF_ETA) -> float:
    """(c / phi(q)) * sum of Lambda(s) over all s coprime to q, c = eta or eta/2."""
    norm = Normalization(normalization)
    tab = prime_power_table(int(x), ctx)
    _, cop = _residues(tab, q, ctx)
    return norm.coefficient(spec) * float(tab.lam[cop].sum()) / euler_phi(q, ctx)


def error_terms(x: int, q: Ideal, a: QuadInt, spec: SectorSpec, ctx: FieldCtx, normalization: Normalization | str = Normalization.HALF_ETA) -> tuple[float, float]:
    """(E_S, E~_S): psi_S minus the main term and minus the sector average."""
    _check_coprime(a, q, ctx)
    tab = prime_power_table(int(x), ctx)
    _, cop = _residues(tab, q, ctx)
    psi = psi_S(x, q, a, spec, ctx)
    sector_avg = float(tab.lam[cop & _sector_mask(tab, spec, ctx)].sum()) / euler_phi(q, ctx)
    return psi - main_term(x, q, spec, ctx, normalization), psi - sector_avg


def error_tilde_by_characters(x: int, q: Ideal, a: QuadInt, spec: SectorSpec, ctx: FieldCtx) -> float:
    """(1/phi(q)) sum over nonprincipal chi of conj(chi(a)) psi_S(x, chi)."""
    from .characters import characters_mod

    total = 0j
    chars = characters_mod(q, ctx)
    for chi in chars[1:]:
        total += np.conj(chi(a)) * psi_chi(x, chi, spec, ctx).value
    return float(total.real) / len(chars)


@dataclass(frozen=True)
class BVRow:
    modulus: Ideal
    phi: int
    argmax: dict[str, QuadInt]
    max_e: dict[str, float]
    max_e_tilde: float


@dataclass
class BVReport:
    x: int
    Q: int
    spec: SectorSpec
    rows: list[BVRow] = field(default_factory=list)

    def total(self, normalization: Normalization | str = Normalization.HALF_ETA) -> float:
        key = Normalization(normalization).value
        return float(sum(r.max_e[key] for r in self.rows))

    @property
    def total_tilde(self) -> float:
        return float(sum(r.max_e_tilde for r in self.rows))

    def ratio(self, normalization: Normalization | str = Normalization.HALF_ETA) -> float:
        return self.total(normalization) / self.x


def _block_ends(norms: np.ndarray) -> np.ndarray:
    """Last index of each run of equal norms."""
    if not len(norms):
        return np.zeros(0, dtype=np.int64)
    return np.append(np.nonzero(np.diff(norms))[0], len(norms) - 1)


def _bv_row(q: Ideal, tab, sector: np.ndarray, ctx: FieldCtx, spec: SectorSpec) -> BVRow:
    G = residue_group(q, ctx)
    idx, cop = _residues(tab, q, ctx)
    phi = G.phi
    ends = _block_ends(tab.norm)
    lam_cop = np.where(cop, tab.lam, 0.0)
    lam_sec = np.where(sector, tab.lam, 0.0)
    sector_avg = np.cumsum(lam_sec * cop)[ends] / phi
    mains = {n.value: n.coefficient(spec) * np.cumsum(lam_cop)[ends] / phi for n in Normalization}
    best = {n.value: (-1.0, None) for n in Normalization}
    best_tilde = 0.0
    for r in np.nonzero(G.unit_mask)[0]:
        psi = np.cumsum(np.where(idx == r, lam_sec, 0.0))[ends]
        # y below the smallest norm gives psi = main = 0
        for key, m in mains.items():
            e = float(np.abs(psi - m).max()) if len(ends) else 0.0
            if e > best[key][0]:
                best[key] = (e, G.lattice.rep(int(r)))
        if len(ends):
            best_tilde = max(best_tilde, float(np.abs(psi - sector_avg).max()))
    return BVRow(q, phi, {k: v[1] for k, v in best.items()}, {k: v[0] for k, v in best.items()}, best_tilde)


def bv_lhs(x: int, Q: int, spec: SectorSpec, ctx: FieldCtx, threads: int = 1) -> BVReport:
    """Sum over N(q) <= Q of max_a max_{y <= x} |E_S(y; q, a)| for both normalizations."""
    if Q > x:
        raise ValueError("need Q <= x")
    tab = prime_power_table(int(x), ctx)
    sector = _sector_mask(tab, spec, ctx)
    moduli = ideal_table(int(Q), ctx).ideals(ctx)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(lambda q: _bv_row(q, tab, sector, ctx, spec), moduli))
    else:
        rows = [_bv_row(q, tab, sector, ctx, spec) for q in moduli]
    return BVReport(int(x), int(Q), spec, rows)


def siegel_walfisz_decay(h: HeckeChar, xs: list[int], ctx: FieldCtx) -> list[tuple[int, float]]:
    """|sum_{N(s) <= x} chi_H(s) Lambda(s)| / x for each x."""
    tab = prime_power_table(int(max(xs)), ctx)
    partial = np.cumsum(hecke_values(h, tab.u, tab.v, tab.w) * tab.lam)
    out = []
    for x in xs:
        k = int(np.searchsorted(tab.norm, x, side="right"))
        out.append((int(x), float(abs(partial[k - 1]) / x) if k else 0.0))
    return out
