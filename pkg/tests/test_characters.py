import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import congruent, order_mod, power
from quadsector.characters import (
    ModulusTooLarge,
    characters_mod,
    conductor,
    eval_hecke,
    hecke_char,
    hecke_product,
    is_primitive,
    orthogonality_holds,
    residue_group,
    tau_chi,
    xi_power,
)
from quadsector.ideals import Ideal, coprime, ideal_table
from quadsector.quad_field import QuadInt

# W(-1+2 sqrt 2), independently evaluated at 50 digits
W_PI7 = -0.41923082035549617


def E(u, v=0):
    return QuadInt(u, v, 2)


@pytest.fixture(scope="module")
def q3(k2):
    return Ideal.of(E(3), k2)


@pytest.fixture(scope="module")
def q21(k2):
    return Ideal.of(E(-1, 2) * 3, k2)


def test_group_mod_3(k2, q3):
    G = residue_group(q3, k2)
    assert G.orders == (8,) and G.phi == 8
    g, m = G.unit_generators[0]
    assert congruent(g, E(1, 1), E(3))
    assert order_mod(E(1, 1), E(3)) == 8


def test_trivial_group(k2):
    G = residue_group(Ideal.of(E(0, 1), k2), k2)
    assert G.orders == () and G.phi == 1
    assert len(characters_mod(Ideal.of(E(0, 1), k2), k2)) == 1


def test_crt_group(k2, q21):
    G = residue_group(q21, k2)
    assert G.orders == (6, 8) and G.phi == 48


def test_modulus_cap(k2):
    with pytest.raises(ModulusTooLarge):
        residue_group(Ideal.of(E(317), k2), k2)


@pytest.mark.parametrize("norm_max", [120])
def test_generator_orders_by_powering(k2, norm_max):
    for q in ideal_table(norm_max, k2).ideals(k2):
        G = residue_group(q, k2)
        assert math.prod(G.orders) == G.phi
        for g, m in G.unit_generators:
            assert order_mod(g, q.gen) == m


def test_characters_mod_3(k2, q3):
    chars = characters_mod(q3, k2)
    assert len(chars) == 8 and chars[0].is_principal
    vals = sorted(chi.phase(E(1, 1)) for chi in chars)
    assert vals == [Fraction(k, 8) for k in range(8)]
    assert len(characters_mod(Ideal.unit(k2), k2)) == 1


def test_conductors(k2, q3, q21):
    chars = characters_mod(q3, k2)
    assert conductor(chars[0], k2) == Ideal.unit(k2)
    assert all(conductor(c, k2) == q3 for c in chars[1:])
    # a character mod (3) pi_7 trivial on the pi_7 part is induced from (3)
    kernel = _units_congruent_to_one(q3, q21, k2)
    induced = [chi for chi in characters_mod(q21, k2) if not chi.is_principal and all(chi.phase(a) == 0 for a in kernel)]
    assert len(induced) == 7
    for chi in induced:
        assert conductor(chi, k2) == q3
        assert not is_primitive(chi, k2)


def _units_congruent_to_one(q1, q, ctx):
    G = residue_group(q, ctx)
    return [a for a in G.representatives if coprime(a, q, ctx) and congruent(a, E(1), q1.gen)]


def test_tau_frozen(k2, q3):
    chars = characters_mod(q3, k2)
    by_eps = {chi.phase(k2.eps): chi for chi in chars}
    assert tau_chi(by_eps[Fraction(1, 8)], k2) == Fraction(1, 8)
    assert tau_chi(by_eps[Fraction(5, 8)], k2) == Fraction(-3, 8)
    assert tau_chi(chars[0], k2) == 0
    for chi in chars:
        t = tau_chi(chi, k2)
        assert -Fraction(1, 2) < t <= Fraction(1, 2)


def test_xi_power_frozen(k2):
    pi7 = Ideal.of(E(-1, 2), k2)
    assert xi_power(0, pi7, k2) == 1
    assert xi_power(1, pi7, k2) == pytest.approx(cmath.exp(2j * math.pi * W_PI7), abs=1e-14)


def test_hecke_frozen(k2, q3):
    h0 = hecke_char(characters_mod(Ideal.unit(k2), k2)[0], 0, k2)
    for I in ideal_table(100, k2).ideals(k2):
        assert eval_hecke(h0, I, k2) == pytest.approx(1)
    h = hecke_char(characters_mod(q3, k2)[3], 0, k2)
    assert eval_hecke(h, Ideal.of(E(3), k2), k2) == 0


def test_orthogonality_brute_force(k2):
    for q in ideal_table(60, k2).ideals(k2):
        G = residue_group(q, k2)
        chars = characters_mod(q, k2)
        units = [a for a, ok in zip(G.representatives, G.unit_mask) if ok]
        M = np.array([[chi(a) for a in units] for chi in chars])
        gram = M.conj().T @ M / G.phi
        assert np.allclose(gram, np.eye(len(units)), atol=1e-9)
        assert orthogonality_holds(q, k2)


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
def test_characters_multiplicative(u1, v1, u2, v2):
    from quadsector.quad_field import make_field

    ctx = make_field(2)
    q = Ideal.of(E(-1, 2) * 3, ctx)
    a, b = E(u1, v1), E(u2, v2)
    for chi in characters_mod(q, ctx)[::5]:
        pa, pb, pab = chi.phase(a), chi.phase(b), chi.phase(a * b)
        if pa is None or pb is None:
            assert pab is None
        else:
            assert (pa + pb - pab) % 1 == 0


@given(st.integers(0, 2000), st.integers(-15, 15), st.sampled_from([1, -1]), st.integers(-3, 3), st.integers(0, 47))
def test_hecke_unit_invariance(i, k, sign, n, which):
    from quadsector.quad_field import make_field

    ctx = make_field(2)
    tab = ideal_table(2000, ctx)
    g = E(int(tab.u[i % len(tab)]), int(tab.v[i % len(tab)]))
    q = Ideal.of(E(-1, 2) * 3, ctx)
    h = hecke_char(characters_mod(q, ctx)[which], n, ctx)
    assert eval_hecke(h, g * power(ctx.eps, k) * sign, ctx) == pytest.approx(eval_hecke(h, g, ctx), abs=1e-9)
    r1, r2 = h.requirement_residuals(ctx)
    assert r1 < 1e-10 and r2 < 1e-10


def test_hecke_product_pointwise(k2, q3):
    q7 = Ideal.of(E(-1, 2), k2)
    a = characters_mod(q3, k2)
    b = characters_mod(q7, k2)
    tab = ideal_table(300, k2)
    for h1 in (hecke_char(a[1], 1, k2), hecke_char(a[6], -2, k2)):
        for h2 in (hecke_char(b[1], 0, k2), hecke_char(b[4], 3, k2)):
            p = hecke_product(h1, h2, k2)
            for I in tab.ideals(k2):
                expected = eval_hecke(h1, I, k2) * np.conj(eval_hecke(h2, I, k2))
                assert eval_hecke(p, I, k2) == pytest.approx(expected, abs=1e-9)


def test_character_values_are_roots_of_unity(k2, q21):
    for chi in characters_mod(q21, k2)[:10]:
        L = chi.order_exponent
        vals = chi.values(*residue_group(q21, k2).lattice.rep_arrays())
        mask = residue_group(q21, k2).unit_mask
        assert np.allclose(np.abs(vals[mask]), 1) and np.all(vals[~mask] == 0)
        assert np.allclose(vals[mask] ** L, 1)
        assert chi.conj().phase(E(1, 1)) == (-chi.phase(E(1, 1))) % 1
