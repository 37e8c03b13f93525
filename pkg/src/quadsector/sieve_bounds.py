"""Character sums, character families, the Bessel-inequality large sieve and
the smoothed step function.

Every asymptotic bound is reported as a pair (exact left side, constant-free
shape of the right side) together with their ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import sici

from .characters import (
    RESIDUE_CAP,
    HeckeChar,
    characters_mod,
    conductor,
    hecke_char,
    hecke_product,
    hecke_values,
    residue_group,
    tau_chi,
)
from .ideals import Ideal, ideal_table
from .quad_field import FieldCtx

__all__ = [
    "CapExceeded",
    "PrincipalCharacter",
    "DimensionMismatch",
    "EqualArguments",
    "FAMILY_CAP",
    "CharFamily",
    "family_build",
    "charsum",
    "landau_ratio",
    "landau_table",
    "bessel_check",
    "LargeSieveResult",
    "large_sieve_ratio",
    "family_matrix",
    "gram_row_sums",
    "products_nonprincipal",
    "fit_exponent",
    "smoothed_step",
]

FAMILY_CAP = 10**4


class CapExceeded(ValueError):
    pass


class PrincipalCharacter(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class EqualArguments(ValueError):
    pass


@dataclass(frozen=True)
class CharFamily:
    """Primitive characters mod q with P < N(q) <= 2P, twisted by xi^n for N <= |n| <= 2N."""

    P: float
    N: int
    members: tuple[HeckeChar, ...]

    @property
    def tilde_N(self) -> int:
        return self.N + 1

    @property
    def size_ratio(self) -> float:
        """#members / (P^2 (N + 1))."""
        return len(self.members) / (self.P ** 2 * self.tilde_N)

    def __len__(self):
        return len(self.members)


def _twists(N: int) -> list[int]:
    return sorted({s * n for n in range(N, 2 * N + 1) for s in (1, -1)})


def family_build(P: float, N: int, ctx: FieldCtx) -> CharFamily:
    if 2 * P > FAMILY_CAP or 2 * P > RESIDUE_CAP:
        raise CapExceeded(f"2P = {2 * P} exceeds the family cap {FAMILY_CAP}")
    moduli = [q for q in ideal_table(int(2 * P), ctx).ideals(ctx) if q.norm > P]
    members = []
    for q in moduli:
        for chi in characters_mod(q, ctx):
            if conductor(chi, ctx) != q:
                continue
            members.extend(hecke_char(chi, n, ctx) for n in _twists(N))
    return CharFamily(float(P), int(N), tuple(members))


def charsum(h: HeckeChar, X: int, ctx: FieldCtx) -> complex:
    """Sum of chi_H over all ideals of norm <= X."""
    tab = ideal_table(int(X), ctx)
    return complex(hecke_values(h, tab.u, tab.v, tab.w).sum())


def _landau_shape(q_norm: int, X: float) -> float:
    return q_norm ** (1 / 3) * X ** (1 / 3) * math.log(2 * q_norm) ** 2


def landau_ratio(h: HeckeChar, X: int, ctx: FieldCtx) -> float:
    """|charsum| / (N(q)^(1/3) X^(1/3) log^2(2 N(q)))."""
    if h.is_principal:
        raise PrincipalCharacter("the sum over a principal character grows linearly")
    return abs(charsum(h, X, ctx)) / _landau_shape(h.modulus.norm, X)


def landau_table(moduli: Sequence[Ideal], twists: Sequence[int], Xs: Sequence[int], ctx: FieldCtx) -> list[dict]:
    """|charsum(X)| for every nonprincipal Hecke character chi xi^n mod q.

    Characters sharing a modulus and the value of tau are evaluated together:
    the ideals are bucketed by (residue class, X-grid cell) once per frequency
    n - tau, and each character then needs only a dot product over residues.
    """
    Xs = sorted(int(X) for X in Xs)
    tab = ideal_table(Xs[-1], ctx)
    cell = np.searchsorted(np.array(Xs), tab.norm, side="left")
    rows = []
    twist_phase = {n: np.exp(2j * np.pi * n * tab.w) for n in twists}
    tau_phase: dict = {}
    for q in moduli:
        G = residue_group(q, ctx)
        res = G.lattice.index_array(tab.u, tab.v)
        size = G.lattice.size
        key = cell * size + res
        by_tau: dict = {}
        for chi in characters_mod(q, ctx):
            by_tau.setdefault(tau_chi(chi, ctx), []).append(chi)
        for tau, chars in by_tau.items():
            if tau not in tau_phase:
                tau_phase[tau] = np.exp(-2j * np.pi * float(tau) * tab.w)
            for n in twists:
                e = twist_phase[n] * tau_phase[tau]
                sums = np.bincount(key, e.real, minlength=len(Xs) * size) + 1j * np.bincount(key, e.imag, minlength=len(Xs) * size)
                sums = np.cumsum(sums.reshape(len(Xs), size), axis=0)
                for chi in chars:
                    if chi.is_principal and n == 0:
                        continue
                    vals = np.exp(2j * np.pi * chi.phase_table / G.exponent)
                    vals[chi.phase_table < 0] = 0
                    totals = sums @ vals
                    for X, s in zip(Xs, totals):
                        rows.append({
                            "modulus": q, "phases": chi.phases, "n": n, "X": X,
                            "abs_sum": float(abs(s)), "ratio": float(abs(s) / _landau_shape(q.norm, X)),
                        })
    return rows


def bessel_check(v: np.ndarray, phis: Sequence[np.ndarray]) -> tuple[float, float]:
    """(sum_r |(v, phi_r)|^2, ||v||^2 max_r sum_s |(phi_r, phi_s)|) with (x, y) = sum x conj(y)."""
    v = np.asarray(v, dtype=np.complex128)
    M = np.asarray(phis, dtype=np.complex128)
    if M.ndim != 2 or M.shape[1] != v.shape[0]:
        raise DimensionMismatch(f"vector of length {v.shape[0]} against vectors of shape {M.shape}")
    lhs = float(np.sum(np.abs(M.conj() @ v) ** 2))
    gram = np.abs(M.conj() @ M.T)
    rhs = float(np.vdot(v, v).real * gram.sum(axis=1).max())
    return lhs, rhs


@dataclass(frozen=True)
class LargeSieveResult:
    lhs: float
    bessel: float
    rhs_shape: float
    conjectural_shape: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs_shape

    @property
    def conjectural_ratio(self) -> float:
        return self.lhs / self.conjectural_shape


def _coeff_vector(coeffs, tab, ctx) -> np.ndarray:
    if isinstance(coeffs, Mapping):
        pos = {(int(u), int(v)): i for i, (u, v) in enumerate(zip(tab.u, tab.v))}
        a = np.zeros(len(tab), dtype=np.complex128)
        for I, c in coeffs.items():
            a[pos[(I.gen.u, I.gen.v)]] = c
        return a
    a = np.asarray(coeffs, dtype=np.complex128)
    if a.shape != (len(tab),):
        raise DimensionMismatch(f"expected {len(tab)} coefficients, got {a.shape}")
    return a


def large_sieve_ratio(
    fam: CharFamily,
    K: int,
    coeffs,
    ctx: FieldCtx,
    matrix: np.ndarray | None = None,
    gram_rowsums: np.ndarray | None = None,
) -> LargeSieveResult:
    """Left side sum_chi |sum a_k chi(k)|^2 against the Bessel bound and the shapes.

    coeffs is a mapping Ideal -> complex or an array aligned with
    ideal_table(K).  The character matrix and its Gram row sums can be passed
    in to reuse them across coefficient draws.
    """
    tab = ideal_table(int(K), ctx)
    a = _coeff_vector(coeffs, tab, ctx)
    norm2 = float(np.vdot(a, a).real)
    lp = math.log(2 * fam.P)
    shape = (K + fam.P ** (8 / 3) * fam.tilde_N * K ** (1 / 3) * lp ** 2) * norm2
    conj_shape = (K + fam.P ** 2 * fam.tilde_N) * norm2
    if not fam.members:
        return LargeSieveResult(0.0, 0.0, shape, conj_shape)
    Phi = family_matrix(fam, K, ctx) if matrix is None else matrix
    lhs = float(np.sum(np.abs(Phi @ a) ** 2))
    if gram_rowsums is None:
        gram_rowsums = gram_row_sums(Phi)
    return LargeSieveResult(lhs, norm2 * float(gram_rowsums.max()), shape, conj_shape)


def family_matrix(fam: CharFamily, K: int, ctx: FieldCtx) -> np.ndarray:
    """Rows chi(k) over the ideals k of norm <= K."""
    tab = ideal_table(int(K), ctx)
    return np.stack([hecke_values(h, tab.u, tab.v, tab.w) for h in fam.members])


def gram_row_sums(Phi: np.ndarray) -> np.ndarray:
    """sum_s |sum_k chi_r conj(chi_s)(k)| for each r."""
    return np.abs(Phi @ Phi.conj().T).sum(axis=1)


def products_nonprincipal(fam: CharFamily, ctx: FieldCtx, limit: int | None = None) -> bool:
    """chi conj(chi') is a nonprincipal Hecke character mod q q' for distinct members."""
    ms = fam.members if limit is None else fam.members[:limit]
    for i, h1 in enumerate(ms):
        for h2 in ms[i + 1:]:
            p = hecke_product(h1, h2, ctx)
            if conductor(p.chi, ctx).norm == 1 and p.twist_n == 0:
                return False
    return True


def fit_exponent(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def smoothed_step(alpha: float, beta: float, T: float) -> float:
    """(1/pi) (Si(T(beta + alpha)) + Si(T(beta - alpha))), approximately [alpha < beta]."""
    if alpha <= 0 or beta <= 0 or T < 1:
        raise ValueError("need alpha, beta > 0 and T >= 1")
    if alpha == beta:
        raise EqualArguments("alpha and beta must differ")
    si_plus, _ = sici(T * (beta + alpha))
    si_minus, _ = sici(T * (beta - alpha))
    return float((si_plus + si_minus) / math.pi)
