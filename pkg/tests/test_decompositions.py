import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quadsector.characters import characters_mod, eval_hecke, hecke_char
from quadsector.decompositions import (
    ParamDomain,
    PreconditionUViolated,
    VaughanParams,
    dyadic_windows,
    h_weight,
    lambda_split,
    type_I,
    type_II,
    vaughan_terms,
)
from quadsector.ideals import Ideal, divisors, enumerate_ideals, moebius, von_mangoldt
from quadsector.quad_field import QuadInt, make_field


def E(u, v=0):
    return QuadInt(u, v, 2)


def quotient(n, m, ctx):
    return Ideal.of(n.gen.exact_div(m.gen), ctx)


def h_brute(r, V, ctx):
    return sum(moebius(D, ctx) for D in divisors(r, ctx) if D.norm <= V)


def vaughan_brute(n, U, V, ctx):
    a1 = a2 = a3 = 0.0
    for m in divisors(n, ctx):
        r = quotient(n, m, ctx)
        lam = von_mangoldt(m, ctx)
        if m.norm <= U:
            a1 -= lam * h_brute(r, V, ctx)
        elif r.norm > 1:
            a3 -= lam * h_brute(r, V, ctx)
        if m.norm <= V:
            a2 += moebius(m, ctx) * math.log(n.norm / m.norm)
    return a1, a2, a3


def test_vaughan_frozen(k2):
    pi7 = Ideal.of(E(-1, 2), k2)
    assert vaughan_terms(pi7, 2, 2, k2) == pytest.approx((0, math.log(7), 0))
    two = Ideal.of(E(2), k2)
    assert vaughan_terms(two, 1, 1, k2) == pytest.approx((0, math.log(4), -math.log(2)))
    with pytest.raises(PreconditionUViolated):
        vaughan_terms(pi7, 7, 2, k2)


@pytest.mark.parametrize("d", [2, 3])
def test_vaughan_against_brute_force(d):
    ctx = make_field(d)
    rng = np.random.default_rng(d)
    for n in enumerate_ideals(400, ctx):
        if n.norm == 1:
            continue
        U = rng.uniform(1, n.norm - 1e-9)
        V = rng.uniform(1, 2 * n.norm)
        got = vaughan_terms(n, U, V, ctx)
        assert got == pytest.approx(vaughan_brute(n, U, V, ctx), abs=1e-12)
        assert sum(got) == pytest.approx(von_mangoldt(n, ctx), abs=1e-12)


def test_h_frozen(k2):
    assert h_weight(Ideal.unit(k2), 5, k2) == 1
    assert h_weight(Ideal.of(E(0, 1), k2), 2, k2) == 0
    assert h_weight(Ideal.of(E(-1, 2) * 3, k2), 7, k2) == 0


@given(st.integers(2, 3000), st.floats(1, 5000))
def test_h_vanishes_below_v(i, V):
    ctx = make_field(2)
    ideals = enumerate_ideals(3000, ctx).ideals
    r = ideals[i % len(ideals)]
    h = h_weight(r, V, ctx)
    assert h == h_brute(r, V, ctx)
    if 1 < r.norm <= V:
        assert h == 0


def test_default_params():
    p = VaughanParams.default(10**5, 10)
    assert p.U == p.V == pytest.approx(10**2 * 10 ** -0.6)
    assert VaughanParams.default(10, 10**6).U == 1.0


@given(st.integers(2, 10**6), st.floats(1, 1000), st.floats(1, 1000))
def test_dyadic_windows_partition(x, U, V):
    ws = dyadic_windows(x, U, V)
    top = x / V
    assert all(b == 2 * a for a, b in zip(ws, ws[1:]))
    for m in {int(U) + 1, int(U) + 2, int(top), int(top) - 1, int(math.sqrt(max(U, 1) * max(top, 1)))}:
        if U < m <= top:
            assert sum(max(U, M) < m <= 2 * M for M in ws) == 1
    if U >= top:
        assert all(not (max(U, M) < 2 * M and max(U, M) < top) for M in ws)


def _family(ctx):
    chars = characters_mod(Ideal.of(E(3), ctx), ctx)
    return [hecke_char(chars[1], 0, ctx), hecke_char(chars[3], 1, ctx)]


def test_type_I_brute_force(k2):
    x, U, V = 300, 3.0, 4.0
    fam = _family(k2)
    ideals = enumerate_ideals(x, k2).ideals
    total = 0.0
    for h in fam:
        vals = {I: eval_hecke(h, I, k2) for I in ideals}
        for t in ideals:
            if t.norm > U * V:
                continue
            # partial sums only at complete norm blocks: w bounds N(r), not a position
            by_norm = np.zeros(x // t.norm + 1, dtype=complex)
            for r in ideals:
                if r.norm > x / t.norm:
                    break
                if r.norm > U / t.norm:
                    by_norm[r.norm] += vals[r]
            total += float(np.abs(np.cumsum(by_norm)).max())
    res = type_I(x, U, V, fam, k2)
    assert res.value == pytest.approx(math.log(x) * total, rel=1e-10)
    assert res.ratio > 0
    assert type_I(x, U, V, [], k2).value == 0
    with pytest.raises(ParamDomain):
        type_I(100, 20, 20, fam, k2)


def test_type_II_brute_force(k2):
    x, U, V = 300, 3.0, 4.0
    fam = _family(k2)
    ideals = enumerate_ideals(x, k2).ideals
    ms = [m for m in ideals if U < m.norm <= x / V and von_mangoldt(m, k2)]
    rs = [r for r in ideals if r.norm > V]
    total = 0.0
    for h in fam:
        by_norm = np.zeros(x + 1, dtype=complex)
        for m in ms:
            for r in rs:
                n = m.norm * r.norm
                if n > x:
                    break
                mr = Ideal.of(m.gen * r.gen, k2)
                by_norm[n] += von_mangoldt(m, k2) * h_weight(r, V, k2) * eval_hecke(h, mr, k2)
        total += float(np.abs(np.cumsum(by_norm)).max())
    res = type_II(x, U, V, fam, k2)
    assert res.value == pytest.approx(total, rel=1e-9)
    assert res.value <= sum(res.pieces.values()) + 1e-9
    assert set(res.pieces) == set(dyadic_windows(x, U, V))
    with pytest.raises(ParamDomain):
        type_II(100, 20, 20, fam, k2)


def test_type_II_empty_window(k2):
    # U = x / V leaves no m with U < N(m) <= x / V
    res = type_II(100, 10, 10, _family(k2), k2)
    assert res.value == 0 and all(v == 0 for v in res.pieces.values())


@pytest.mark.parametrize("U,V", [(5.0, 5.0), (20.0, 3.0), (2.0, 30.0)])
def test_lambda_split(k2, U, V):
    for h in _family(k2):
        parts = lambda_split(2000, U, V, h, k2)
        rhs = parts["boundary"] + parts["S1"] + parts["S2"] + parts["S3"]
        assert abs(parts["lhs"] - rhs) < 1e-8
        assert abs(parts["S3"] - parts["S3_bilinear"]) < 1e-8
