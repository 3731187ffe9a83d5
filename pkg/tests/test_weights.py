from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sodweave.lattice import LAMBDA, LineBundle, STRUCTURE_SHEAF, TENSOR_DUAL_F, Block, theta_lambda
from sodweave.weave import twist_at
from sodweave.weights import (
    WeightInterval, descends, descent_weight, in_closed, in_window, little_window,
    quasi_bps_bounds, quasi_bps_member, wall_weight, weight_interval, window_2g,
)

ints = st.integers(-40, 40)


def test_wall_weight_examples():
    for i in range(6):
        assert wall_weight(LAMBDA, i) == -1
        assert wall_weight(LineBundle(0, 0), i) == 0


@given(st.integers(1, 12), st.integers(0, 30), st.data())
def test_wall_weight_of_twill_twist(i, s, data):
    k = data.draw(st.integers(0, i - 1))
    w = wall_weight(twist_at(k, s, Fraction(i), i), i)
    assert w == s - (s // (i - k)) * (i - k)
    assert 0 <= w < i - k


@given(ints, ints, ints, ints, st.integers(0, 15))
def test_wall_weight_additive(m1, n1, m2, n2, i):
    a, b = LineBundle(m1, n1), LineBundle(m2, n2)
    assert wall_weight(a + b, i) == wall_weight(a, i) + wall_weight(b, i)


def test_weight_interval_examples():
    g = 5
    assert weight_interval(Block(TENSOR_DUAL_F, 0, theta_lambda(g, 5, 0)), g) == WeightInterval(0, 0)
    for m in range(4):
        b = Block(TENSOR_DUAL_F, 2 * m, theta_lambda(g, 0, m))
        assert weight_interval(b, g) == WeightInterval(-m, m)
        assert descends(b, g)


def test_in_window_examples():
    assert in_window(WeightInterval(0, 0), 0, 1)
    assert not in_window(WeightInterval(0, 1), 0, 1)
    with pytest.raises(ValueError):
        in_window(WeightInterval(0, 0), 0, 0)


@given(ints, st.integers(0, 20), ints, st.integers(1, 20))
def test_window_invariant_under_zero_shift(lo, span, wlo, width):
    iv = WeightInterval(lo, lo + span)
    assert in_window(iv, wlo, width) == in_window(iv.shift(0), wlo, width)
    # shifting interval and window together changes nothing
    assert in_window(iv, wlo, width) == in_window(iv.shift(3), wlo + 3, width)


@pytest.mark.parametrize("g", range(2, 13))
def test_sod_2g_blocks_in_window(g, runs):
    sod = runs(g, 2 * g).sod2g
    lo, width = window_2g(g)
    assert lo == -(g // 2) and width == g
    assert all(in_window(weight_interval(b, g), lo, width) for b in sod)


@pytest.mark.parametrize("g", range(2, 13))
def test_center_blocks_little_window(g, plain_runs):
    lo, hi = little_window(g)
    res = plain_runs(g)
    blocks = [b for bs in res.center.values() for b in bs]
    assert blocks
    assert all(in_closed(weight_interval(b, g), lo, hi) for b in blocks)
    assert all(quasi_bps_member(b, 0, g) for b in blocks)


@pytest.mark.parametrize("g", range(2, 13))
def test_quasi_bps_examples(g):
    assert quasi_bps_bounds(2 - g, g) == (Fraction(-1, 2), Fraction(2 * g - 3, 2))
    assert quasi_bps_bounds(3 - g, g) == (Fraction(-1), Fraction(g - 2))
    for k in range((g - 2) // 2 + 1):
        # C_k has weights [k, g-2-k]
        c = Block(TENSOR_DUAL_F, g - 2 - 2 * k, theta_lambda(g, 0, -k))
        assert weight_interval(c, g) == WeightInterval(k, g - 2 - k)
        assert quasi_bps_member(c, 2 - g, g)
    for k in range((g - 1) // 2 + 1):
        # D_k has weights [k-1, g-2-k]
        dk = Block(TENSOR_DUAL_F, g - 1 - 2 * k, theta_lambda(g, 0, 1 - k))
        assert weight_interval(dk, g) == WeightInterval(k - 1, g - 2 - k)
        assert quasi_bps_member(dk, 3 - g, g)


def test_structure_sheaf_quasi_bps():
    assert quasi_bps_member(Block(STRUCTURE_SHEAF, 0), 0, 2)


@given(st.integers(2, 12), ints, ints, st.integers(0, 20))
def test_descent_criterion(g, x, y, z):
    b = Block(TENSOR_DUAL_F, z, theta_lambda(g, x, y))
    assert descent_weight(b, g) == 2 * y - z
    assert descends(b, g) == (z == 2 * y)
