import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quadsector.characters import characters_mod, eval_hecke, hecke_char
from quadsector.ideals import Ideal, divisors, euler_phi, ideal_table, moebius
from quadsector.quad_field import QuadInt
from quadsector.sieve_bounds import (
    CapExceeded,
    CharFamily,
    DimensionMismatch,
    EqualArguments,
    PrincipalCharacter,
    bessel_check,
    charsum,
    family_build,
    fit_exponent,
    landau_ratio,
    landau_table,
    large_sieve_ratio,
    products_nonprincipal,
    smoothed_step,
)


def E(u, v=0):
    return QuadInt(u, v, 2)


def primitive_count(q, ctx):
    """Number of primitive characters mod q by Moebius inversion of phi."""
    return sum(moebius(Ideal.of(q.gen.exact_div(D.gen), ctx), ctx) * euler_phi(D, ctx) for D in divisors(q, ctx))


@pytest.mark.parametrize("P,sizes", [(4, (12, 48)), (8, (11, 44)), (16, (171, 684))])
def test_family_sizes(k2, P, sizes):
    expected = sum(primitive_count(q, k2) for q in ideal_table(2 * P, k2).ideals(k2) if q.norm > P)
    assert expected == sizes[0]
    for N, size in zip((0, 1), sizes):
        fam = family_build(P, N, k2)
        assert len(fam) == size
        assert all(P < h.modulus.norm <= 2 * P for h in fam.members)
        assert {h.twist_n for h in fam.members} == ({0} if N == 0 else {-2, -1, 1, 2})


def test_family_edges(k2):
    assert len(family_build(0.4, 0, k2)) == 0
    with pytest.raises(CapExceeded):
        family_build(6000, 0, k2)


def test_products_nonprincipal(k2):
    assert products_nonprincipal(family_build(4, 1, k2), k2)


def test_charsum_frozen(k2):
    h0 = hecke_char(characters_mod(Ideal.unit(k2), k2)[0], 0, k2)
    assert charsum(h0, 10, k2) == pytest.approx(7)
    with pytest.raises(PrincipalCharacter):
        landau_ratio(h0, 100, k2)
    h = hecke_char(characters_mod(Ideal.of(E(3), k2), k2)[1], 0, k2)
    sums = [abs(charsum(h, X, k2)) for X in (10**2, 10**3, 10**4, 10**5)]
    assert max(sums) < 20
    assert sums[-1] / 10**5 < 1e-3


def test_landau_table_matches_charsum(k2):
    q = Ideal.of(E(-1, 2), k2)
    rows = landau_table([q], [-1, 0, 2], [50, 500, 3000], k2)
    by_key = {(r["phases"], r["n"], r["X"]): r for r in rows}
    for chi in characters_mod(q, k2):
        for n in (-1, 0, 2):
            h = hecke_char(chi, n, k2)
            for X in (50, 500, 3000):
                if h.is_principal:
                    assert (chi.phases, n, X) not in by_key
                    continue
                r = by_key[(chi.phases, n, X)]
                assert r["abs_sum"] == pytest.approx(abs(charsum(h, X, k2)), abs=1e-9)
                assert r["ratio"] == pytest.approx(landau_ratio(h, X, k2), abs=1e-12)


def test_bessel_frozen():
    rng = np.random.default_rng(0)
    Qm, _ = np.linalg.qr(rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    lhs, rhs = bessel_check(v, Qm.T[:5])
    assert lhs == pytest.approx(np.sum(np.abs(Qm.T[:5].conj() @ v) ** 2))
    assert lhs <= rhs + 1e-12 and rhs == pytest.approx(np.vdot(v, v).real)
    phi = rng.normal(size=6) + 1j * rng.normal(size=6)
    lhs, rhs = bessel_check(phi, [phi])
    n2 = np.vdot(phi, phi).real
    assert lhs == pytest.approx(n2 ** 2) and rhs == pytest.approx(n2 ** 2)
    with pytest.raises(DimensionMismatch):
        bessel_check(np.ones(3), [np.ones(4)])


@given(st.integers(1, 50), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_bessel_random(dim, count, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    phis = rng.normal(size=(count, dim)) + 1j * rng.normal(size=(count, dim))
    lhs, rhs = bessel_check(v, phis)
    assert lhs <= rhs * (1 + 1e-12)


def test_large_sieve_singleton(k2):
    h = hecke_char(characters_mod(Ideal.of(E(3), k2), k2)[1], 0, k2)
    fam = CharFamily(4.5, 0, (h,))
    r = large_sieve_ratio(fam, 100, {Ideal.unit(k2): 1.0}, k2)
    assert r.lhs == pytest.approx(1.0)
    assert r.lhs <= r.rhs_shape and r.lhs <= r.bessel


def test_large_sieve_lhs_brute(k2):
    fam = family_build(4, 0, k2)
    K = 200
    ideals = ideal_table(K, k2).ideals(k2)
    rng = np.random.default_rng(1)
    a = rng.normal(size=len(ideals)) + 1j * rng.normal(size=len(ideals))
    brute = sum(abs(sum(c * eval_hecke(h, I, k2) for c, I in zip(a, ideals))) ** 2 for h in fam.members)
    r = large_sieve_ratio(fam, K, a, k2)
    assert r.lhs == pytest.approx(brute, rel=1e-10)
    assert r.lhs <= r.bessel
    with pytest.raises(DimensionMismatch):
        large_sieve_ratio(fam, K, a[:-1], k2)


def test_fit_exponent():
    xs = [10, 100, 1000]
    assert fit_exponent(xs, [3 * x ** 0.6 for x in xs]) == pytest.approx(0.6)


def test_smoothed_step_frozen():
    assert smoothed_step(1, 2, 1e6) == pytest.approx(1, abs=1e-5)
    assert abs(smoothed_step(2, 1, 1e3)) <= 4 / 1e3
    with pytest.raises(EqualArguments):
        smoothed_step(1, 1, 10)
    with pytest.raises(ValueError):
        smoothed_step(-1, 1, 10)


@given(st.floats(0.01, 100), st.floats(0.01, 100), st.floats(1, 1e5))
def test_smoothed_step_bounds(alpha, beta, T):
    if alpha == beta:
        return
    val = smoothed_step(alpha, beta, T)
    assert -0.2 <= val <= 1.2
    target = 1.0 if alpha < beta else 0.0
    assert abs(val - target) <= 4 / (T * abs(beta - alpha))
