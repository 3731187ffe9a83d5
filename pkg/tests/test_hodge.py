from __future__ import annotations

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from sodweave.lattice import SOD, TENSOR_DUAL_F, Block, derive_params
from sodweave.hodge import (
    HHVector, ZERO, hh_of_blocks, hh_of_syms, hh_sym, hh_windows_chain, sym_hodge, verify_hh,
)

x, y, t = sympy.symbols("x y t")


def oracle_sym_hodge(g, n):
    """Series coefficient of the Macdonald generating function, via sympy."""
    f = (1 + x * t) ** g * (1 + y * t) ** g / ((1 - t) * (1 - x * y * t))
    coeff = sympy.series(f, t, 0, n + 1).removeO().coeff(t, n)
    poly = sympy.Poly(sympy.expand(coeff), x, y)
    return {m: int(c) for m, c in zip(poly.monoms(), poly.coeffs())}


def test_sym_hodge_examples():
    assert sym_hodge(4, 0).as_dict() == {(0, 0): 1}
    assert sym_hodge(2, 1).as_dict() == {(0, 0): 1, (1, 0): 2, (0, 1): 2, (1, 1): 1}
    assert sym_hodge(2, 2).as_dict() == {
        (0, 0): 1, (1, 0): 2, (0, 1): 2, (2, 0): 1, (1, 1): 5, (0, 2): 1,
        (2, 1): 2, (1, 2): 2, (2, 2): 1,
    }


@pytest.mark.parametrize("g,n", [(g, n) for g in range(0, 6) for n in range(0, 6)])
def test_sym_hodge_matches_series(g, n):
    assert sym_hodge(g, n).as_dict() == oracle_sym_hodge(g, n)


@given(st.integers(0, 8), st.integers(0, 10))
def test_sym_hodge_symmetries(g, n):
    h = sym_hodge(g, n)
    assert h.is_symmetric()
    # Sym^n C is smooth projective of dimension n
    d = h.as_dict()
    assert all(d.get((n - p, n - q), 0) == v for (p, q), v in d.items())
    assert h.hh().is_mirror_symmetric()
    # total Betti number: coefficient of t^n in (1+t)^(2g) / (1-t)^2
    assert h.total() == sum(sympy.binomial(2 * g, j) * (n - j + 1) for j in range(n + 1))


@given(st.integers(1, 8), st.integers(0, 10))
def test_euler_characteristic(g, n):
    # chi(Sym^n C) = coefficient of t^n in (1-t)^(2g-2)
    chi = sum(v * (-1) ** (p + q) for (p, q), v in sym_hodge(g, n).coeffs)
    assert chi == (-1) ** n * sympy.binomial(2 * g - 2, n)


def test_hh_ledger_genus_two():
    p = derive_params(2, 4)
    expected = HHVector.from_dict({-1: 4, 0: 9, 1: 4})
    assert hh_windows_chain(p) == expected
    assert hh_of_syms([0] * 5 + [1, 1], 2) == expected


def test_hh_empty_and_ncr_g5():
    assert hh_of_blocks(SOD(()), 5) == ZERO
    ncr = hh_of_syms([0] * 4 + [2] * 4 + [4] * 2, 5)
    assert ncr == hh_sym(5, 0).scale(4) + hh_sym(5, 2).scale(4) + hh_sym(5, 4).scale(2)
    assert ncr.as_dict()[0] == 4 + 4 * sym_hodge(5, 2).hh().as_dict()[0] + 2 * sym_hodge(5, 4).hh().as_dict()[0]


def test_verify_hh_negative_control():
    p = derive_params(2, 4)
    blocks = tuple(Block(TENSOR_DUAL_F, s) for s in [0] * 5 + [1, 1])
    good = SOD(blocks)
    assert verify_hh(hh_windows_chain(p), good, 2).passed
    bad = verify_hh(hh_windows_chain(p), good.without(6), 2)
    assert not bad.passed
    assert bad.residual == hh_sym(2, 1).scale(-1)


def test_hh_vector_arithmetic():
    a = HHVector.from_dict({-1: 2, 0: 3})
    assert (a + a - a) == a
    assert (a - a) == ZERO
    assert a.scale(0) == ZERO


def oracle_truncated(g, n):
    """Same coefficient by multiplying truncated factors one at a time."""
    # series are dicts (p, q, deg t) -> coefficient, cut above t^n
    def mul(a, b):
        out = {}
        for (p1, q1, d1), c1 in a.items():
            for (p2, q2, d2), c2 in b.items():
                if d1 + d2 <= n:
                    key = (p1 + p2, q1 + q2, d1 + d2)
                    out[key] = out.get(key, 0) + c1 * c2
        return out

    f = {(0, 0, 0): 1}
    for _ in range(g):
        f = mul(f, {(0, 0, 0): 1, (1, 0, 1): 1})
        f = mul(f, {(0, 0, 0): 1, (0, 1, 1): 1})
    f = mul(f, {(0, 0, a): 1 for a in range(n + 1)})
    f = mul(f, {(c, c, c): 1 for c in range(n + 1)})
    return {(p, q): c for (p, q, d), c in f.items() if d == n and c}


@pytest.mark.parametrize("g", range(0, 9))
def test_sym_hodge_regression_grid(g):
    for n in range(0, 13):
        assert sym_hodge(g, n).as_dict() == oracle_truncated(g, n), (g, n)


@settings(max_examples=60)
@given(st.integers(2, 8), st.lists(st.integers(0, 6), max_size=8), st.integers(-3, 3), st.integers(-3, 3),
       st.booleans())
def test_hh_ignores_labels(g, syms, m, n, bar):
    from sodweave.lattice import BAR_TENSOR_DUAL_F, LineBundle
    plain = SOD(tuple(Block(TENSOR_DUAL_F, s) for s in syms))
    fam = BAR_TENSOR_DUAL_F if bar else TENSOR_DUAL_F
    dressed = SOD(tuple(Block(fam, s, LineBundle(m, n), serre_twist=m, dual=bar) for s in syms))
    assert hh_of_blocks(plain, g) == hh_of_blocks(dressed, g)


@pytest.mark.parametrize("g", range(2, 9))
def test_end_to_end_ledger(g, runs):
    for d in range(3, 2 * g + 1):
        try:
            p = derive_params(g, d)
        except Exception:
            continue
        run = runs(g, d)
        ref = hh_windows_chain(p)
        for _, sod in run.stages:
            assert hh_of_blocks(sod, g) == ref, (g, d)
