from __future__ import annotations

from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sodweave.lattice import D_SHEAF, LineBundle, ParamError, derive_params
from sodweave.weave import (
    TwillEvent, WeaveError, advance_interval, apply_integer_crossing, build_sod, embed_level,
    init_beilinson, interval_events, lambda_index, level_index_set, next_crossing, pair_crossing,
    run_twill, sod_2g_closed_form, sort_key, twist_at,
)


def valid_pairs(gmax=8):
    out = []
    for g in range(2, gmax + 1):
        for d in range(3, 2 * g + 1):
            try:
                derive_params(g, d)
            except ParamError:
                continue
            out.append((g, d))
    return out


def sizes(sod):
    return [len(bs) for _, bs in sod.groups()]


def test_init_beilinson():
    s = init_beilinson(derive_params(2, 4))
    assert s.order == [(0, s_) for s_ in range(5)]
    assert len(init_beilinson(derive_params(5, 10)).order) == 14
    assert s.twist((0, 0), Fraction(1, 2)) == LineBundle(0, 0)
    # no crossings among level-0 strands
    assert next_crossing(s) is None


def test_pair_crossing_examples():
    assert pair_crossing((0, 2), (1, 1)) == (2, 1)
    assert pair_crossing((0, 3), (2, 2)) == (6, Fraction(1, 2))
    assert pair_crossing((0, 1), (1, 1)) is None


@given(st.integers(0, 6), st.integers(1, 20), st.integers(0, 6), st.integers(1, 20))
def test_pair_crossing_meets(k, s, k2, s2):
    hit = pair_crossing((k, s), (k2, s2))
    if hit is None:
        return
    t, x = hit
    assert t > max(k, k2)
    assert Fraction(s) / (t - k) == x == Fraction(s2) / (t - k2)
    assert x == Fraction(s - s2, k2 - k)


def test_genus_two_level_one():
    p = derive_params(2, 4)
    s = embed_level(advance_interval(init_beilinson(p)))
    # the hand-enumerated state at t = 1 + eps
    assert s.order == [(0, 0), (1, 0), (0, 1), (0, 2), (0, 3), (0, 4), (1, 1)]
    assert len(s.order) == 7
    assert [e.x for e in s.events] == [4, 3, 2, 1]
    assert all(e.kind == "mutation" and e.t == 1 for e in s.events)
    ev = next_crossing(s)
    assert (ev.t, ev.x, ev.participants) == (Fraction(4, 3), 3, ((0, 4), (1, 1)))


def test_embed_level_counts():
    p = derive_params(5, 10)
    s = advance_interval(init_beilinson(p))
    s1 = embed_level(s)
    assert len(s1.order) - len(s.order) == 11
    top = run_twill(p, p.i_d + 1)
    assert top.level == p.i_d
    with pytest.raises(WeaveError):
        embed_level(top)


def test_lone_top_strand_is_noop():
    p = derive_params(2, 4)
    s = embed_level(advance_interval(init_beilinson(p)))
    ev = TwillEvent(Fraction(3, 2), Fraction(1), "mutation", ((1, 1),), 1)
    out = apply_integer_crossing(s, ev)
    assert out.order == s.order and out.certificates == s.certificates


def test_partial_chain_rejected():
    p = derive_params(2, 4)
    s = embed_level(advance_interval(init_beilinson(p)))
    with pytest.raises(WeaveError):
        apply_integer_crossing(s, TwillEvent(Fraction(3, 2), Fraction(2), "mutation", ((0, 3),), 1))
    with pytest.raises(WeaveError):
        apply_integer_crossing(s, TwillEvent(Fraction(3, 2), Fraction(1, 2), "transposition",
                                             ((0, 3), (1, 1)), 1))


@pytest.mark.parametrize("g,d", valid_pairs(7))
def test_twill_state_invariants(g, d):
    p = derive_params(g, d)
    s = init_beilinson(p)
    while True:
        assert s.strands() == level_index_set(p, s.level)
        mid = s.t + Fraction(1, 10 ** 6)
        assert s.order == sorted(s.order, key=lambda st_: sort_key(st_, mid))
        for e in interval_events(s):
            assert isinstance(e.t, Fraction) and isinstance(e.x, Fraction)
            assert (e.kind == "mutation") == (e.x.denominator == 1)
        # the interval past i_d is only scheduled when m = 3
        if s.level == p.i_d and p.m != 3:
            break
        s = advance_interval(s)
        if s.level >= p.i_d:
            break
        s = embed_level(s)


def test_twist_rule_at_mutation():
    # non-top members pick up (-1, 1-k) across an integer crossing
    for k, s in [(0, 4), (0, 3)]:
        t = Fraction(s, s - 1) + 0  # meets (1, 1)
        if t < 2:
            assert twist_at(k, s, t, 1, +1) == twist_at(k, s, t, 1) + LineBundle(-1, 1 - k)


def test_modified_sizes():
    assert sizes(build_sod(derive_params(5, 10)).modified.sod) == [10, 15, 15]
    assert sizes(build_sod(derive_params(2, 4)).modified.sod) == [1, 3, 3]
    # m = 1: bounds i_d - 1, i_d - 1, i_d
    p = derive_params(5, 9)
    assert (p.m, p.m_1, p.m_2) == (1, 1, 1)
    assert sizes(build_sod(p).modified.sod) == [10, 10, 15]


def test_modified_m2_final_step(runs):
    run = runs(2, 4)
    assert run.modified.stop_time == Fraction(4, 3)
    assert [e.t for e in run.modified.events if e.t > 1] == [Fraction(4, 3)]


def test_cross_warp_examples(runs):
    run = runs(2, 4)
    first = run.sod1.megablock("M1")
    assert len(first) == 1 and first[0].sym == 0 and first[0].family != D_SHEAF
    assert len(run.sod1) == 7
    run = runs(5, 10)
    apex = [k for lab, c, k in run.apexes if lab == "M3" and c == 0]
    assert apex == list(range(run.params.i_d + 1))


@pytest.mark.parametrize("g,d", valid_pairs(6))
def test_stage_conservation_and_certified(g, d, runs):
    run = runs(g, d)
    n = len(run.modified.sod)
    assert n == len(level_index_set(run.params, run.params.i_d))
    assert all(len(s) == n for _, s in run.stages)
    assert all(c.certified for c in run.certificates)
    # reordering touches order only
    assert Counter(run.sod1.blocks) == Counter(run.reordered.blocks)


def test_sod_2g_sizes(runs):
    assert sizes(runs(5, 10).sod2g) == [6, 10, 15, 9]
    assert sizes(runs(2, 4).sod2g) == [1, 1, 3, 2]
    assert runs(5, 10).sod2g.labels() == ["I", "II", "III", "IV"]


@pytest.mark.parametrize("g", range(2, 11))
def test_sod_2g_matches_index_sets(g, runs):
    sod = runs(g, 2 * g).sod2g
    assert sod == sod_2g_closed_form(g)
    # fourth megablock is the lambda >= g-1 part of the third-megablock shape
    iv = sod.megablock("IV")
    p = derive_params(g, 2 * g)
    shift = p.t2() + LineBundle(0, -((g - 2) // 2))
    assert all(lambda_index(b, g, shift)[0] >= g - 1 for b in iv)
    assert all(c.certified for c in runs(g, 2 * g).certificates)


def test_build_is_deterministic():
    a = build_sod(derive_params(4, 8))
    b = build_sod(derive_params(4, 8))
    assert a.certificates == b.certificates
    assert [e for e in a.modified.events] == [e for e in b.modified.events]
    assert a.sod2g == b.sod2g
