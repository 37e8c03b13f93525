import math
from fractions import Fraction

import numpy as np
import pytest

from oracles import congruent
from quadsector.characters import characters_mod, hecke_char
from quadsector.ideals import Ideal, prime_power_table
from quadsector.prime_counts import (
    NotCoprime,
    Normalization,
    bv_lhs,
    error_terms,
    error_tilde_by_characters,
    main_term,
    psi_chi,
    psi_K,
    psi_S,
    siegel_walfisz_decay,
)
from quadsector.quad_field import QuadInt
from quadsector.sectors import SectorSpec

FULL = SectorSpec(-1, 1)
LOWER = SectorSpec(-1, 0)
PSI10 = 3 * math.log(2) + 2 * math.log(7) + math.log(9)


def E(u, v=0):
    return QuadInt(u, v, 2)


def test_psi_frozen(k2):
    assert psi_S(10, Ideal.unit(k2), E(1), FULL, k2) == pytest.approx(PSI10, rel=1e-14)
    assert psi_K(10, k2) == pytest.approx(PSI10, rel=1e-14)


def test_psi_residue_class(k2):
    q3 = Ideal.of(E(3), k2)
    pp = prime_power_table(10, k2)
    expected = sum(l for u, v, l in zip(pp.u, pp.v, pp.lam) if congruent(E(int(u), int(v)), E(1), E(3)))
    assert psi_S(10, q3, E(1), FULL, k2) == pytest.approx(expected)
    # (3) itself is never counted
    assert all(psi_S(10, q3, a, FULL, k2) < PSI10 - math.log(9) + 1e-9 for a in (E(1), E(2), E(1, 1)))


def test_thin_sector_is_empty(k2):
    assert psi_S(10, Ideal.unit(k2), E(1), SectorSpec(0, Fraction(1, 1000)), k2) == 0


def test_not_coprime(k2):
    q3 = Ideal.of(E(3), k2)
    with pytest.raises(NotCoprime):
        psi_S(100, q3, E(3, 3), FULL, k2)
    with pytest.raises(NotCoprime):
        error_terms(100, q3, E(0, 3), FULL, k2)


def test_psi_chi_principal(k2):
    chi0 = characters_mod(Ideal.unit(k2), k2)[0]
    assert psi_chi(5000, chi0, FULL, k2).value == pytest.approx(psi_K(5000, k2))


def test_routes_agree_small(k2):
    q3 = Ideal.of(E(3), k2)
    for chi in characters_mod(q3, k2):
        a = psi_chi(400, chi, LOWER, k2, "element")
        b = psi_chi(400, chi, LOWER, k2, "hecke", Z=400)
        assert abs(a.value - b.value) <= b.budget


def test_normalizations(k2):
    q = Ideal.of(E(-1, 2), k2)
    half = main_term(10**4, q, LOWER, k2, Normalization.HALF_ETA)
    assert main_term(10**4, q, LOWER, k2, "paper") == pytest.approx(2 * half)


def test_tilde_by_characters(k2):
    q = Ideal.of(E(-1, 2), k2)
    for a in (E(1), E(2), E(1, 1)):
        _, tilde = error_terms(3000, q, a, LOWER, k2)
        assert error_tilde_by_characters(3000, q, a, LOWER, k2) == pytest.approx(tilde, abs=1e-8)


def test_bv_trivial_modulus(k2):
    rep = bv_lhs(10**4, 1, LOWER, k2)
    assert [r.modulus for r in rep.rows] == [Ideal.unit(k2)]
    assert rep.ratio(Normalization.HALF_ETA) < 0.1
    assert rep.ratio(Normalization.PAPER_ETA) > 0.4


def test_bv_rows_against_pointwise_maxima(k2):
    x, Q = 250, 8
    rep = bv_lhs(x, Q, LOWER, k2)
    for row in rep.rows:
        from quadsector.characters import residue_group

        G = residue_group(row.modulus, k2)
        units = [G.lattice.rep(int(i)) for i in np.nonzero(G.unit_mask)[0]]
        best = 0.0
        for a in units:
            for y in range(1, x + 1):
                best = max(best, abs(error_terms(y, row.modulus, a, LOWER, k2)[0]))
        assert row.max_e["half"] == pytest.approx(best, abs=1e-9)


def test_bv_thread_independence(k2):
    one = bv_lhs(20000, 15, LOWER, k2, threads=1)
    many = bv_lhs(20000, 15, LOWER, k2, threads=3)
    assert one.rows == many.rows


def test_siegel_walfisz(k2):
    chi0 = characters_mod(Ideal.unit(k2), k2)[0]
    xs = [10**4, 10**5]
    ratios = [r for _, r in siegel_walfisz_decay(hecke_char(chi0, 0, k2), xs, k2)]
    assert all(0.9 < r < 1.1 for r in ratios)
    chi = characters_mod(Ideal.of(E(3), k2), k2)[1]
    decay = [r for _, r in siegel_walfisz_decay(hecke_char(chi, 0, k2), [10**3, 10**4, 10**5], k2)]
    assert decay[0] > decay[1] > decay[2]
    twisted = [r for _, r in siegel_walfisz_decay(hecke_char(chi0, 1, k2), [10**3, 10**4, 10**5], k2)]
    assert twisted[-1] < twisted[0] and twisted[-1] < 0.05


def test_main_term_trivial_modulus(k2):
    q1 = Ideal.unit(k2)
    assert main_term(5000, q1, FULL, k2, "paper") == pytest.approx(2 * psi_K(5000, k2))
    assert main_term(5000, q1, FULL, k2, "half") == pytest.approx(psi_K(5000, k2))
    vals = [main_term(x, q1, LOWER, k2) for x in (100, 1000, 10**4)]
    assert vals == sorted(vals)


def test_coprime_sum_close_to_psi_k(k2):
    # removing the prime powers above the modulus costs at most log^2(N(q) x)
    x, q = 10**5, Ideal.of(E(3), k2)
    coprime_sum = main_term(x, q, FULL, k2, "half") * 8
    assert abs(coprime_sum - psi_K(x, k2)) <= math.log(9 * x) ** 2
