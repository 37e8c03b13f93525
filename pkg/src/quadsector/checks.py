"""Desk-scale property suites.

Each suite returns a CheckResult with the measured quantities.  With
``inject=True`` a suite deliberately breaks one ingredient (a sign, an
exponent or a conjugation) and is expected to fail; this is the negative
control used by ``quadsector checks --expect-fail``.

The grid constants below were fixed before the suites were run.  Ratio
suites assert that the maximum over the grid stays below them and report
the measured maximum.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .characters import characters_mod, eval_hecke, hecke_char, orthogonality_holds, residue_group
from .decompositions import vaughan_terms
from .ideals import Ideal, enumerate_ideals, ideal_table, lattice_scan, von_mangoldt
from .prime_counts import Normalization, bv_lhs, psi_chi, psi_K, psi_S
from .quad_field import (
    QuadInt,
    canonical_generator,
    exact_sign,
    in_fundamental_domain,
    make_field,
    norm_bounds_hold,
    w_array,
)
from .sectors import SectorSpec, sigma_sum
from .sieve_bounds import family_build, family_matrix, gram_row_sums, landau_table, large_sieve_ratio

__all__ = ["CheckResult", "SUITES", "run_suite", "GRID_CONSTANTS"]

GRID_CONSTANTS = {
    "landau": 10.0,
    "large_sieve": 10.0,
    "sigma": 10.0,
    "nonprincipal_growth": 1e-2,
}


@dataclass
class CheckResult:
    name: str
    criterion: int
    passed: bool
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        items = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{status}] criterion {self.criterion:2d} {self.name}: {items}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def check_vaughan(seed: int = 0, inject: bool = False, X: int = 10**4) -> CheckResult:
    rng = random.Random(seed)
    worst, count = 0.0, 0
    for d in (2, 3):
        ctx = make_field(d)
        for n in enumerate_ideals(X, ctx):
            if n.norm == 1:
                continue
            lam = von_mangoldt(n, ctx)
            for _ in range(10):
                U = rng.uniform(1.0, n.norm) * (1 - 1e-12)
                V = rng.uniform(1.0, 2.0 * n.norm)
                a1, a2, a3 = vaughan_terms(n, U, V, ctx)
                total = a1 + a2 - a3 if inject else a1 + a2 + a3
                worst = max(worst, abs(total - lam))
                count += 1
    return CheckResult("vaughan identity", 1, worst <= 1e-9, {"cases": count, "max_abs_error": worst})


def _domain_points(X: int, ctx) -> list[QuadInt]:
    """All lattice points with 1 <= |N| <= X in the fundamental domain (either sign)."""
    d = ctx.d
    B = math.sqrt(ctx.eps_float * X) * 1.01 + 2
    vmax = int(B / math.sqrt(d)) + 1
    out = []
    for v in range(-vmax, vmax + 1):
        vs = v * math.sqrt(d)
        lo, hi = int(math.floor(-B - vs)), int(math.ceil(B - vs))
        u = np.arange(lo, hi + 1, dtype=np.int64)
        n = np.abs(u * u - d * v * v)
        u = u[(n >= 1) & (n <= X)]
        if not len(u):
            continue
        w = w_array(u, np.full(len(u), v), d, ctx.log_eps)
        for uu in u[np.abs(w) <= 0.5 + 1e-6]:
            b = QuadInt(int(uu), v, d)
            if in_fundamental_domain(b, ctx):
                out.append(b)
    return out


def check_domain(seed: int = 0, inject: bool = False, X: int = 10**4) -> CheckResult:
    ok = True
    measured = {}
    for d in (2, 3, 6, 7):
        ctx = make_field(d)
        pts = _domain_points(X, ctx)
        pos = [b for b in pts if b.sigma1() > 0]
        ideals = {I.gen for I in enumerate_ideals(X, ctx)}
        pairs_ok = len(pts) == 2 * len(pos) and {-b for b in pos} == {b for b in pts if b.sigma1() < 0}
        one_each = len(pos) == len(ideals) and {canonical_generator(b, ctx) for b in pos} == ideals == set(pos)
        if inject:
            bounds_ok = all(_norm_bounds_flipped(b, ctx) for b in pos)
        else:
            bounds_ok = all(norm_bounds_hold(b, ctx) for b in pos)
        measured[f"d{d}_ideals"] = len(ideals)
        ok &= pairs_ok and one_each and bounds_ok
    return CheckResult("fundamental domain", 2, ok, measured)


def _norm_bounds_flipped(b: QuadInt, ctx) -> bool:
    n = b.abs_norm()
    # lower bound with eps^(+1/2) in place of eps^(-1/2)
    return all(exact_sign(s * s - ctx.eps * n) >= 0 for s in (b, b.conj()))


def check_orthogonality(seed: int = 0, inject: bool = False, max_norm: int = 200) -> CheckResult:
    ctx = make_field(2)
    moduli = ideal_table(max_norm, ctx).ideals(ctx)
    bad = 0
    for q in moduli:
        if inject:
            chars = characters_mod(q, ctx)
            G = residue_group(q, ctx)
            a = G.lattice.rep(int(np.nonzero(G.unit_mask)[0][-1]))
            s = sum(c(a) * c(a) for c in chars)
            bad += abs(s - (len(chars) if G.phi else 0)) > 1e-9 or G.phi == 1
        else:
            bad += not orthogonality_holds(q, ctx)
    return CheckResult("character orthogonality", 3, bad == 0, {"moduli": len(moduli), "failures": int(bad)})


def check_hecke(seed: int = 0, inject: bool = False, max_norm: int = 100, twists: int = 2) -> CheckResult:
    ctx = make_field(2)
    rng = random.Random(seed)
    chars = []
    for q in ideal_table(max_norm, ctx).ideals(ctx):
        for chi in characters_mod(q, ctx):
            for n in range(-twists, twists + 1):
                chars.append(hecke_char(chi, n, ctx))
    worst_req = 0.0
    for h in chars:
        if inject:
            h = type(h)(h.chi, h.twist_n, h.tau, h.rho, 1 - h.u1, h.u2, h.v)
        worst_req = max(worst_req, *h.requirement_residuals(ctx))
    tab = ideal_table(10**4, ctx)
    worst_inv = 0.0
    for _ in range(1000):
        h = rng.choice(chars)
        i = rng.randrange(len(tab))
        g = QuadInt(int(tab.u[i]), int(tab.v[i]), ctx.d)
        unit = ctx.unit_power(rng.randint(-10, 10)) * rng.choice((1, -1))
        worst_inv = max(worst_inv, abs(eval_hecke(h, g * unit, ctx) - eval_hecke(h, g, ctx)))
    ok = worst_req <= 1e-10 and worst_inv <= 1e-9
    return CheckResult("Hecke consistency", 4, ok, {"characters": len(chars), "max_requirement": worst_req, "max_invariance": worst_inv})


def check_routes(seed: int = 0, inject: bool = False, Z: int = 1000) -> CheckResult:
    ctx = make_field(2)
    spec = SectorSpec(-1, 0)
    q = Ideal.of(QuadInt(3, 0, 2), ctx)
    worst = 0.0
    ok = True
    for y in (10**3, 10**4):
        for chi in characters_mod(q, ctx):
            e = psi_chi(y, chi, spec, ctx, "element")
            h = psi_chi(y, chi, spec, ctx, "hecke", Z)
            budget = h.budget / y if inject else h.budget
            gap = abs(e.value - h.value)
            ok &= gap <= budget
            worst = max(worst, gap / h.budget)
    return CheckResult("route equivalence", 5, ok, {"max_gap_over_budget": worst})


def check_density(seed: int = 0, inject: bool = False, x: int = 10**6) -> CheckResult:
    ctx = make_field(2)
    spec = SectorSpec(-1, 0)
    q = Ideal.of(QuadInt(3, 0, 2), ctx)
    G = residue_group(q, ctx)
    total = psi_K(x, ctx)
    # the density predicted by the normalization in use must be eta/2
    norm = Normalization.PAPER_ETA if inject else Normalization.HALF_ETA
    scale = float(spec.eta) / 2 / norm.coefficient(spec)
    ratios = [psi_S(x, q, G.lattice.rep(int(i)), spec, ctx) * G.phi / total * scale for i in np.nonzero(G.unit_mask)[0]]
    ok = all(0.45 <= r <= 0.55 for r in ratios)
    return CheckResult("sector density", 6, ok, {"min": min(ratios), "max": max(ratios)})


def check_bv_decay(seed: int = 0, inject: bool = False, xs=(10**4, 10**5, 10**6), Q: int = 20) -> CheckResult:
    ctx = make_field(2)
    spec = SectorSpec(-1, 0)
    ratios = []
    for x in xs:
        r = bv_lhs(x, Q, spec, ctx)
        ratios.append(r.total(Normalization.HALF_ETA) * (x if inject else 1.0 / x))
    ok = all(b < a for a, b in zip(ratios, ratios[1:]))
    return CheckResult("BV decay", 7, ok, {"LHS_over_x": ratios})


def check_large_sieve(seed: int = 0, inject: bool = False, K: int = 1000, draws: int = 100) -> CheckResult:
    ctx = make_field(2)
    rng = np.random.default_rng(seed)
    worst_ratio, bessel_ok = 0.0, True
    for P in (4, 8, 16):
        for N in (0, 1):
            fam = family_build(P, N, ctx)
            Phi = family_matrix(fam, K, ctx)
            rows = gram_row_sums(Phi)
            for _ in range(draws):
                a = rng.choice([-1.0, 1.0], Phi.shape[1])
                r = large_sieve_ratio(fam, K, a, ctx, matrix=Phi, gram_rowsums=rows)
                # injected: ||a||^2 replaced by ||a||^-2 in the Bessel bound
                bessel = r.bessel / float(a @ a) ** 2 if inject else r.bessel
                bessel_ok &= r.lhs <= bessel
                worst_ratio = max(worst_ratio, r.ratio)
    ok = bessel_ok and worst_ratio <= GRID_CONSTANTS["large_sieve"]
    return CheckResult("large sieve", 8, ok, {"bessel_holds": bessel_ok, "max_ratio": worst_ratio, "grid_constant": GRID_CONSTANTS["large_sieve"]})


def check_landau(seed: int = 0, inject: bool = False, Xs=(10**2, 10**3, 10**4, 10**5), max_norm: int = 100) -> CheckResult:
    ctx = make_field(2)
    rows = landau_table(ideal_table(max_norm, ctx).ideals(ctx), range(-4, 5), Xs, ctx)
    if inject:
        ratios = [r["ratio"] * r["X"] ** (2 / 3) for r in rows]
    else:
        ratios = [r["ratio"] for r in rows]
    top = max(Xs)
    growth = max(r["abs_sum"] for r in rows if r["X"] == top) / top
    ok = max(ratios) <= GRID_CONSTANTS["landau"] and growth <= GRID_CONSTANTS["nonprincipal_growth"]
    return CheckResult("Landau ratios", 9, ok, {"characters": len(rows) // len(Xs), "max_ratio": max(ratios), "max_sum_over_X": growth})


def check_sigma(seed: int = 0, inject: bool = False, xs=(10**3, 10**4, 10**5, 10**6)) -> CheckResult:
    ctx = make_field(2)
    spec = SectorSpec(Fraction(-1, 2), Fraction(1, 2))
    expo = -0.6 if inject else 0.6
    ratios = [sigma_sum(x, x, ctx, spec) / x ** expo for x in xs]
    return CheckResult("sigma growth", 10, max(ratios) <= GRID_CONSTANTS["sigma"], {"sigma_over_x06": ratios})


def check_enumeration(seed: int = 0, inject: bool = False, X: int = 10**4) -> CheckResult:
    ok = True
    for d in (2, 3, 6, 7):
        ctx = make_field(d)
        enum = enumerate_ideals(X, ctx)
        scan = lattice_scan(X, ctx)
        scan_counts = np.bincount(scan.norm, minlength=X + 1)
        counts = enum.counts
        if inject:
            counts = counts.copy()
            counts[2::2] = -counts[2::2]
        same_gens = [I.gen for I in enum] == [QuadInt(int(u), int(v), d) for u, v in zip(scan.u, scan.v)]
        ok &= bool(np.array_equal(counts, scan_counts)) and same_gens
    return CheckResult("enumeration cross-check", 11, ok, {"X": X})


SUITES: dict[str, Callable[..., CheckResult]] = {
    "vaughan": check_vaughan,
    "domain": check_domain,
    "orthogonality": check_orthogonality,
    "hecke": check_hecke,
    "routes": check_routes,
    "density": check_density,
    "bv-decay": check_bv_decay,
    "large-sieve": check_large_sieve,
    "landau": check_landau,
    "sigma": check_sigma,
    "enumeration": check_enumeration,
}


def run_suite(name: str, seed: int = 0, inject: bool = False) -> CheckResult:
    t = time.perf_counter()
    res = SUITES[name](seed=seed, inject=inject)
    res.seconds = time.perf_counter() - t
    return res
