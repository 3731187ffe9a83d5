from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from sodweave.lattice import (
    BAR_TENSOR_DUAL_F, LAMBDA, SOD, TENSOR_DUAL_F, TENSOR_E, Block, LineBundle, ParamError,
    derive_params, dual_block, lb_combine, lambda_power, omega, restrict_to_stratum, tensor_block,
    theta, theta_lambda, theta_lambda_coords,
)

ints = st.integers(-30, 30)
bundles = st.builds(LineBundle, ints, ints)


def test_derive_params_examples():
    p = derive_params(5, 10)
    assert (p.i_d, p.m, p.m_1, p.m_2, p.v) == (4, 2, 0, 1, 4)
    p = derive_params(2, 4)
    assert (p.i_d, p.m, p.v) == (1, 2, 1)
    p = derive_params(5, 9)
    assert (p.i_d, p.m, p.v) == (4, 1, 4)


@pytest.mark.parametrize("g", range(2, 13))
def test_degree_2g_shape(g):
    p = derive_params(g, 2 * g)
    assert p.i_d == g - 1 and p.m == 2
    assert p.proven


def test_derive_params_rejects():
    with pytest.raises(ParamError):
        derive_params(1, 4)
    with pytest.raises(ParamError):
        derive_params(3, 2)
    # large genus at small degree pushes i_d past v
    with pytest.raises(ParamError):
        derive_params(10, 4)
    assert not derive_params(10, 4, conjectural=True).proven
    assert not derive_params(4, 12).proven


def test_lb_combine_examples():
    assert lb_combine(LineBundle(1, 4), LineBundle(0, -1)) == LineBundle(1, 3)
    assert lb_combine(LineBundle(0, 0), LineBundle(7, -2)) == LineBundle(7, -2)
    # theta^2 Lambda is T_2 for (g=3, d=6)
    assert theta(3) * 2 == LineBundle(2, 4)
    assert lb_combine(theta(3) * 2, LAMBDA) == LineBundle(2, 3)
    assert derive_params(3, 6).t2() == LineBundle(2, 3)


@pytest.mark.parametrize("g", range(2, 13))
def test_omega_identities(g):
    assert omega(g, 2 * g) == theta_lambda(g, -3, -1)
    assert omega(g, 2 * g) == LineBundle(-3, 4 - 3 * g)
    # odd side: Z^-3 Lambda-hat^-2 with Z = theta
    assert omega(g, 2 * g - 1) == theta(g) * -3 + LAMBDA * -2
    assert omega(g, 2 * g - 1) == LineBundle(-3, 5 - 3 * g)
    p = derive_params(g, 2 * g)
    assert p.t2() == theta_lambda(g, 2, 1)


def test_dual_block_examples():
    g = 5
    b = tensor_block(g, 1, 0, 3, bar=True)
    assert dual_block(b, g) == Block(TENSOR_DUAL_F, 3, theta_lambda(g, -1, 3), dual=True)
    k = 2
    pt = Block(TENSOR_E, 0, lambda_power(-k))
    assert dual_block(pt, g).twist == lambda_power(k)


@given(st.integers(2, 12), ints, ints, st.integers(0, 20), st.booleans(), st.integers(-3, 3))
def test_dual_is_involution(g, x, y, z, bar, serre):
    b = Block(BAR_TENSOR_DUAL_F if bar else TENSOR_DUAL_F, z, theta_lambda(g, x, y), serre_twist=serre)
    assert dual_block(dual_block(b, g), g) == b


@given(st.integers(2, 12), ints, ints)
def test_theta_lambda_coords_roundtrip(g, x, y):
    assert theta_lambda_coords(theta_lambda(g, x, y), g) == (x, y)


@given(bundles, bundles, bundles)
def test_group_law(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert a + (-a) == LineBundle(0, 0)


def test_restrict_examples():
    for s in range(6):
        for i in range(1, 5):
            assert restrict_to_stratum(LineBundle(s, s * i), i, i) == -s
    assert restrict_to_stratum(LineBundle(0, 0), 2, 2) == 0
    assert restrict_to_stratum(LineBundle(0, 0), 1, 3) == LineBundle(0, 0)
    assert restrict_to_stratum(LineBundle(2, 7), 1, 3) == LineBundle(2, 5)
    with pytest.raises(IndexError):
        restrict_to_stratum(LineBundle(1, 1), 4, 3)


def test_sod_partition_and_without():
    a, b, c = (Block(TENSOR_DUAL_F, n) for n in range(3))
    sod = SOD.from_groups([("X", [a, b]), ("Y", [c])])
    assert sod.labels() == ["X", "Y"]
    assert sod.without(1).groups() == [("X", (a,)), ("Y", (c,))]
    with pytest.raises(ValueError):
        SOD((a, b), ((0, 1, "X"),))
