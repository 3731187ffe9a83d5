"""Wall-crossing scheduler and the SOD pipelines for M_i(d).

The scheduler follows block trajectories x = s/(t-k) through time t with
exact rationals.  Each crossing of trajectories is either a transposition
(non-integer x, certified by ft_orthogonal) or a chain mutation (integer x,
certified by ft_mutation).  The remaining stages regroup, stack and re-sort
the blocks; each step appends certificates to a shared log.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .lattice import (
    D_SHEAF, LAMBDA, SOD, TENSOR_DUAL_F, Block, LineBundle, ModuliParams, derive_params,
    fiber_equivalent, omega, restrict_to_stratum, theta_lambda,
)
from .vanishing import (
    Certificate, cert_bl_reordering, cert_cw_orthogonal, cert_fbullet_to_d, cert_ft_mutation,
    cert_ft_orthogonal, cert_ft_reordering, cert_subcats, make_check,
)
from .weights import wall_weight


class WeaveError(RuntimeError):
    """A pipeline step met a configuration its rule table does not cover."""


Strand = tuple[int, int]  # (k, s)


def twist_at(k: int, s: int, t: Fraction, level: int, side: int = 0) -> LineBundle:
    """L^{k,s}_t.  side = -1/+1 means t minus/plus an infinitesimal."""
    if k == level:
        return LineBundle(s, s * k)
    if k > level:
        raise WeaveError(f"block (k={k}) does not exist at level {level}")
    x = Fraction(s) / (Fraction(t) - k)
    fl = math.floor(x)
    if side > 0 and s > 0 and x == fl:
        fl -= 1
    return LineBundle(fl, s + fl * (k - 1))


def position(k: int, s: int, t: Fraction) -> Fraction:
    return Fraction(s) / (Fraction(t) - k)


def sort_key(strand: Strand, t: Fraction):
    k, s = strand
    if s == 0:
        return (Fraction(0), 0, k)
    return (position(k, s, t), 1, k)


@dataclass(frozen=True)
class TwillEvent:
    t: Fraction
    x: Fraction
    kind: str  # "mutation" | "transposition"
    participants: tuple[Strand, ...]
    level: int

    @property
    def integer(self) -> bool:
        return self.x.denominator == 1


@dataclass
class TwillState:
    params: ModuliParams
    level: int
    t: Fraction  # events up to and including t are processed
    order: list[Strand]
    events: list[TwillEvent] = field(default_factory=list)
    certificates: list[Certificate] = field(default_factory=list)
    births: dict[Strand, Fraction] = field(default_factory=dict)

    def copy(self) -> "TwillState":
        return TwillState(self.params, self.level, self.t, list(self.order), list(self.events),
                          list(self.certificates), dict(self.births))

    def twist(self, strand: Strand, t: Fraction | None = None, side: int = 0) -> LineBundle:
        return twist_at(strand[0], strand[1], self.t if t is None else t, self.level, side)

    def strands(self) -> set[Strand]:
        return set(self.order)


def level_index_set(params: ModuliParams, level: int) -> set[Strand]:
    top = params.d + params.g - 2
    return {(k, s) for k in range(level + 1) for s in range(top - 3 * k + 1)}


def init_beilinson(params: ModuliParams) -> TwillState:
    n = params.d + params.g - 1
    order = [(0, s) for s in range(n)]
    return TwillState(params, 0, Fraction(0), order, births={st: Fraction(0) for st in order})


# ---------------------------------------------------------------- crossings

def pair_crossing(a: Strand, b: Strand) -> tuple[Fraction, Fraction] | None:
    """(t, x) where the trajectories of a and b meet after both exist, if ever."""
    (k, s), (k2, s2) = a, b
    if k == k2 or s == s2:
        return None
    ts = Fraction(s * k2 - s2 * k, s - s2)
    if ts <= max(k, k2):
        return None
    return ts, Fraction(s) / (ts - k)


def interval_events(state: TwillState) -> list[TwillEvent]:
    """All crossings strictly inside (state.t, level+1), grouped by (t, x)."""
    lvl = state.level
    lo, hi = state.t, Fraction(lvl + 1)
    pos = [(k, s) for k, s in state.order if s > 0]
    groups: dict[tuple[Fraction, Fraction], set[Strand]] = {}
    for a in range(len(pos)):
        k, s = pos[a]
        for b in range(a + 1, len(pos)):
            hit = pair_crossing(pos[a], pos[b])
            if hit is None or not lo < hit[0] < hi:
                continue
            groups.setdefault(hit, set()).update((pos[a], pos[b]))
        if k < lvl:
            # integer values of x met by this strand alone would be partial chains
            xmin, xmax = Fraction(s) / (hi - k), Fraction(s) / (lo - k) if lo > k else None
            first = math.floor(xmin) + 1
            last = math.ceil(xmax) - 1 if xmax is not None else first - 1
            for xi in range(first, last + 1):
                ts = k + Fraction(s, xi)
                if lo < ts < hi:
                    groups.setdefault((ts, Fraction(xi)), set()).add((k, s))
    events = []
    for (ts, x), members in sorted(groups.items()):
        parts = tuple(sorted(members))
        kind = "mutation" if x.denominator == 1 else "transposition"
        events.append(TwillEvent(ts, x, kind, parts, lvl))
    return events


def next_crossing(state: TwillState) -> TwillEvent | None:
    evs = interval_events(state)
    return evs[0] if evs else None


def _check_chain(members: tuple[Strand, ...], x: int, top_k: int) -> None:
    k0, s0 = members[0]
    want = tuple((k0 + j, s0 - j * x) for j in range(top_k - k0 + 1))
    if members != want:
        raise WeaveError(f"partial chain at x={x}: {members}")


def _splice(order: list[Strand], members: tuple[Strand, ...], new: list[Strand]) -> None:
    idx = sorted(order.index(m) for m in members)
    if idx != list(range(idx[0], idx[0] + len(idx))):
        raise WeaveError(f"crossing participants are not adjacent: {members}")
    if [order[i] for i in idx] != list(members):
        raise WeaveError(f"crossing participants out of order: {members}")
    order[idx[0]:idx[-1] + 1] = new


def _mutation_twists_ok(members, t, level) -> None:
    # ft_mutation: every non-top member picks up (-1, 1-k), the top is unchanged
    for k, s in members:
        before = twist_at(k, s, t, level, 0)
        after = twist_at(k, s, t, level, +1)
        want = before + LineBundle(-1, 1 - k) if k < level else before
        if after != want:
            raise WeaveError(f"twist schedule disagrees with the mutation rule at {(k, s)}")


def _orthogonal_cert(params, level, a: Strand, b: Strand, t, where: str) -> Certificate:
    """a = (k, s) with k < k' = b[0]; certificate for moving D^{k,s} right past D^{k',s'}."""
    (k, s), (kp, sp) = a, b
    rel = twist_at(kp, sp, t, level) - twist_at(k, s, t, level)
    r = restrict_to_stratum(rel, kp, level)
    if not isinstance(r, int):
        if r.m != 0:
            raise WeaveError("restricted twist is not a Lambda power")
        r = -r.n
    cert = cert_ft_orthogonal(params.d, params.g, level, k, kp, r, params.conjectural)
    return cert.with_context(f"{where}: D^({k},{s}) past D^({kp},{sp})")


def apply_integer_crossing(state: TwillState, event: TwillEvent) -> TwillState:
    if not event.integer:
        raise WeaveError("apply_integer_crossing needs an integer x")
    new = state.copy()
    members = event.participants
    if len(members) == 1 and members[0][0] == state.level:
        # a lone top-level strand is already a complete chain
        return new
    if len(members) >= 2:
        _check_chain(members, int(event.x), state.level)
        _mutation_twists_ok(members, event.t, state.level)
        _splice(new.order, members, list(reversed(members)))
        cert = cert_ft_mutation(state.params.d, state.params.g, state.level, members[0][0],
                                state.params.conjectural)
        new.certificates.append(cert.with_context(f"t={event.t} x={event.x}: chain {list(members)}"))
    else:
        raise WeaveError(f"partial chain at x={event.x}: {members}")
    new.events.append(event)
    new.t = event.t
    return new


def apply_transposition(state: TwillState, event: TwillEvent) -> TwillState:
    new = state.copy()
    members = event.participants
    for a in range(len(members)):
        for b in range(a + 1, len(members)):
            new.certificates.append(
                _orthogonal_cert(state.params, state.level, members[a], members[b], event.t,
                                 f"t={event.t} x={event.x}"))
    _splice(new.order, members, list(reversed(members)))
    new.events.append(event)
    new.t = event.t
    return new


def _assert_sorted(order: list[Strand], t: Fraction, what: str) -> None:
    if order != sorted(order, key=lambda st: sort_key(st, t)):
        raise WeaveError(f"order disagrees with trajectory sort at {what} (t={t})")


def advance_interval(state: TwillState) -> TwillState:
    """Process every crossing in (level, level+1); returns state at (level+1)-eps."""
    events = interval_events(state)
    times = sorted({e.t for e in events})
    marks = [state.t] + times + [Fraction(state.level + 1)]
    _assert_sorted(state.order, (marks[0] + marks[1]) / 2, "interval start")
    cur = state
    for n, ts in enumerate(times):
        for ev in (e for e in events if e.t == ts):
            cur = apply_integer_crossing(cur, ev) if ev.integer else apply_transposition(cur, ev)
        _assert_sorted(cur.order, (marks[n + 1] + marks[n + 2]) / 2, "after crossing")
    cur = cur.copy()
    cur.t = Fraction(state.level + 1)
    return cur


@dataclass
class _Item:
    k: int
    s: int
    twist: LineBundle


def walk_top(items: list[_Item], top: _Item, t: int, params: ModuliParams, where: str,
             certs: list[Certificate], events: list[TwillEvent]) -> list[_Item]:
    """Move the new block D^{t,s0} leftwards through items at the integer time t.

    Items with equal x(t) form groups.  Integer groups mutate with the moving
    block as their top; other groups are passed unchanged.  Returns the new
    sequence (moving block first).
    """
    level = t
    out: list[_Item] = []
    rest = list(items)
    while rest:
        last = rest[-1]
        x = position(last.k, last.s, t)
        grp = []
        while rest and position(rest[-1].k, rest[-1].s, t) == x:
            grp.insert(0, rest.pop())
        strands = tuple((it.k, it.s) for it in grp)
        if x.denominator == 1:
            members = strands + ((top.k, top.s),)
            _check_chain(members, int(x), level)
            k0 = members[0][0]
            new_grp = []
            for it in reversed(grp):
                want = twist_at(it.k, it.s, t, level, +1)
                if it.twist + LineBundle(-1, 1 - it.k) != want:
                    raise WeaveError(f"mutation twist mismatch at {(it.k, it.s)}")
                new_grp.append(_Item(it.k, it.s, want))
            out = new_grp + out
            cert = cert_ft_mutation(params.d, params.g, level, k0, params.conjectural)
            certs.append(cert.with_context(f"{where}: t={t} x={x}, chain {list(members)}"))
            events.append(TwillEvent(Fraction(t), x, "mutation", members, level))
        else:
            for a in range(len(grp)):
                for b in range(a + 1, len(grp)):
                    certs.append(_orthogonal_cert(params, level, strands[a], strands[b], t,
                                                  f"{where}: t={t} x={x}"))
            if len(grp) > 1:
                events.append(TwillEvent(Fraction(t), x, "transposition", strands, level))
            for st in strands:
                certs.append(_orthogonal_cert(params, level, st, (top.k, top.s), t,
                                              f"{where}: new block passes"))
            out = list(reversed(grp)) + out
    return [top] + out


def _window_cert(params: ModuliParams, i: int, old: Iterable[Strand]) -> Certificate:
    checks = [make_check("bounds", value=3 * i, lo=0, hi=params.d + params.g - 1)]
    for k, s in old:
        w = wall_weight(twist_at(k, s, i, i), i)
        checks.append(make_check("bounds", value=w, lo=0, hi=i - k - 1))
    return Certificate("windows", context=f"level {i} embedding",
                       reduction=("twist weights at the wall lie in [0, i-k)",), checks=tuple(checks))


def embed_level(state: TwillState) -> TwillState:
    """Pass the wall t = i: retag, append new blocks, walk D^{i,0} left."""
    params = state.params
    i = state.level + 1
    if i > params.i_d:
        raise WeaveError(f"level {i} exceeds i_d={params.i_d}")
    new = state.copy()
    for k, s in state.order:
        if twist_at(k, s, i, i - 1, -1) != twist_at(k, s, i, i):
            raise WeaveError("windows embedding changed a twist")
    new.certificates.append(_window_cert(params, i, state.order))
    zeros = [st for st in state.order if st[1] == 0]
    pos = [_Item(k, s, twist_at(k, s, i, i)) for k, s in state.order if s > 0]
    n_new = params.d + params.g - 3 * i - 1
    top = _Item(i, 0, LineBundle(0, 0))
    walked = walk_top(pos, top, i, params, f"embed level {i}", new.certificates, new.events)
    new.order = zeros + [(it.k, it.s) for it in walked] + [(i, s) for s in range(1, n_new)]
    for s in range(n_new):
        new.births[(i, s)] = Fraction(i)
    new.level = i
    new.t = Fraction(i)
    if new.strands() != level_index_set(params, i):
        raise WeaveError("block multiset differs from the level index set")
    return new


def run_twill(params: ModuliParams, stop_level: int) -> TwillState:
    """State at t = stop_level - eps."""
    state = init_beilinson(params)
    while True:
        state = advance_interval(state)
        if state.level + 1 >= stop_level:
            return state
        state = embed_level(state)


# ------------------------------------------------------------ modified SOD

@dataclass
class ModifiedResult:
    sod: SOD
    state: TwillState
    certificates: list[Certificate]
    events: list[TwillEvent]
    stop_time: Fraction


def _mb_item(params: ModuliParams, r: int, k: int, twist: LineBundle, top: bool) -> tuple[int, int]:
    """(k, j) such that the block equals T_r Lambda^-j D^k."""
    base = params.megablock_twist(r)
    if top:
        j = 0
        if not fiber_equivalent(twist, base, k):
            raise WeaveError(f"top block twist {twist} is not fiber-equivalent to {base}")
    else:
        if twist.m != base.m:
            raise WeaveError(f"twist {twist} does not belong to megablock {r}")
        j = twist.n - base.n
    if j < 0 or j + k > params.megablock_bound(r):
        raise WeaveError(f"index (k={k}, j={j}) outside megablock {r}")
    return k, j


def reorder_megablock(params: ModuliParams, entries: list[tuple[int, int]], label: str,
                      certs: list[Certificate]) -> list[tuple[int, int]]:
    """Insertion sort by (j+k, j); every swap is certified by ft_reordering."""
    seq = list(entries)
    key = lambda e: (e[0] + e[1], e[1])
    for a in range(1, len(seq)):
        b = a
        while b > 0 and key(seq[b - 1]) > key(seq[b]):
            (k, j), (kp, jp) = seq[b - 1], seq[b]
            if jp + kp >= j + k:
                raise WeaveError(f"reorder needs a swap inside one j+k level: {(k, j)}, {(kp, jp)}")
            cert = cert_ft_reordering(params.d, params.g, params.i_d, k, j, kp, jp, params.conjectural)
            certs.append(cert.with_context(f"{label}: Lambda^-{j} D^{k} right past Lambda^-{jp} D^{kp}"))
            seq[b - 1], seq[b] = seq[b], seq[b - 1]
            b -= 1
    return seq


def _split_regions(items: list[_Item], i: int) -> list[list[_Item]]:
    regions: list[list[_Item]] = [[], [], [], []]
    last = 0
    for it in items:
        r = 0 if it.s == 0 else min(3, math.floor(position(it.k, it.s, i)))
        if r < last:
            raise WeaveError("x-regions are not contiguous")
        last = r
        regions[r].append(it)
    return regions


def _region_blocks(params, region: list[_Item], r: int, label: str) -> list[tuple[int, int]]:
    return [_mb_item(params, r, it.k, it.twist, False) for it in region]


def modified_sod(params: ModuliParams) -> ModifiedResult:
    i = params.i_d
    certs: list[Certificate] = []
    events: list[TwillEvent] = []
    mbs: list[list[tuple[int, int]]] = [[], [], []]

    if params.m in (1, 2):
        state = run_twill(params, i)
        certs.extend(state.certificates)
        events.extend(state.events)
        certs.append(_window_cert(params, i, state.order))
        items = [_Item(k, s, twist_at(k, s, i, i)) for k, s in state.order]
        for it in items:
            if twist_at(it.k, it.s, i, i - 1, -1) != it.twist:
                raise WeaveError("windows embedding changed a twist")
        reg = _split_regions(items, i)
        mbs[0] = _region_blocks(params, reg[0], 0, "I")
        mbs[1] = _region_blocks(params, reg[1], 1, "II")
        top0 = _Item(i, 0, LineBundle(0, 0))
        if params.m == 1:
            mbs[2] = _region_blocks(params, reg[2], 2, "III")
            walked = walk_top(reg[3], top0, i, params, "IV with new block", certs, events)
            for n, it in enumerate(walked):
                mbs[2].append(_mb_item(params, 2, it.k, it.twist, n == 0))
            stop = Fraction(i)
        else:
            ii_b = [it for it in reg[2] if position(it.k, it.s, i) == 2]
            iii_a = [it for it in reg[2] if position(it.k, it.s, i) != 2]
            if reg[2][:len(ii_b)] != ii_b:
                raise WeaveError("x=2 blocks are not leftmost in region III")
            walked = walk_top(ii_b + iii_a + reg[3], top0, i, params, "new block through IV, III_a, ii_b",
                              certs, events)
            n_b = len(ii_b) + 1
            for n, it in enumerate(walked[:n_b]):
                mbs[1].append(_mb_item(params, 1, it.k, it.twist, n == 0))
            rest = walked[n_b:]
            third_a = rest[:len(iii_a)]
            iv = rest[len(iii_a):]
            mbs[2] = [_mb_item(params, 2, it.k, it.twist, False) for it in third_a]
            iii_b = [it for it in iv if position(it.k, it.s, i) == 3]
            iii_c = [it for it in iv if position(it.k, it.s, i) != 3]
            if iv[:len(iii_b)] != iii_b:
                raise WeaveError("x=3 blocks are not leftmost in IV")
            mbs[2] += [_mb_item(params, 2, it.k, it.twist, False) for it in iii_b]
            # final mutation with D^{i,1} where the trajectories meet
            ts = Fraction(3 * i + 1, 3)
            top1 = _Item(i, 1, twist_at(i, 1, ts, i))
            members = tuple((it.k, it.s) for it in iii_c) + ((i, 1),)
            for k, s in members:
                if position(k, s, ts) != 3:
                    raise WeaveError(f"block {(k, s)} misses the meeting point")
            _check_chain(members, 3, i)
            mutated = [top1]
            for it in reversed(iii_c):
                if it.twist != twist_at(it.k, it.s, ts, i):
                    raise WeaveError("twist drifted before the final mutation")
                mutated.append(_Item(it.k, it.s, it.twist + LineBundle(-1, 1 - it.k)))
            _mutation_twists_ok(members, ts, i)
            cert = cert_ft_mutation(params.d, params.g, i, members[0][0], params.conjectural)
            certs.append(cert.with_context(f"final mutation at t={ts} x=3, chain {list(members)}"))
            events.append(TwillEvent(ts, Fraction(3), "mutation", members, i))
            for n, it in enumerate(mutated):
                mbs[2].append(_mb_item(params, 2, it.k, it.twist, n == 0))
            stop = ts
    else:
        state = run_twill(params, i + 1)
        certs.extend(state.certificates)
        events.extend(state.events)
        t = Fraction(i + 1)
        last = 0
        for k, s in state.order:
            tw = twist_at(k, s, t, i, -1)
            r = tw.m
            if r < last or r > 2:
                raise WeaveError("megablock regions are not contiguous")
            last = r
            mbs[r].append(_mb_item(params, r, k, tw, False))
        stop = t

    blocks_by_mb = []
    for r, label in enumerate(("M1", "M2", "M3")):
        bound = params.megablock_bound(r)
        want = {(k, j) for k in range(bound + 1) for j in range(bound - k + 1)}
        if set(mbs[r]) != want or len(mbs[r]) != len(want):
            raise WeaveError(f"megablock {label} has the wrong index set")
        ordered = reorder_megablock(params, mbs[r], label, certs)
        base = params.megablock_twist(r)
        blocks_by_mb.append((label, [Block(D_SHEAF, k, base + LineBundle(0, j), stratum=i)
                                     for k, j in ordered]))
    sod = SOD.from_groups(blocks_by_mb, "modified")
    return ModifiedResult(sod, state, certs, events, stop)


# --------------------------------------------------------------- cross warp

@dataclass
class CrossWarpResult:
    sod: SOD
    certificates: list[Certificate]
    apexes: list[tuple[str, int, int]]  # (megablock, shift c, top center k)


def _parse_dsheaf_megablock(blocks, label) -> tuple[LineBundle, int, list[tuple[int, int]]]:
    if not blocks or blocks[0].family != D_SHEAF or blocks[0].sym != 0:
        raise ValueError(f"megablock {label} does not start with D^0")
    base = blocks[0].twist
    entries = []
    for b in blocks:
        rel = b.twist - base
        if b.family != D_SHEAF or rel.m != 0:
            raise ValueError(f"malformed megablock {label}")
        entries.append((b.sym, rel.n))
    bound = max(k + j for k, j in entries)
    want = sorted(((k, j) for k in range(bound + 1) for j in range(bound - k + 1)),
                  key=lambda e: (e[0] + e[1], e[1]))
    if entries != want:
        raise ValueError(f"malformed megablock {label}")
    return base, bound, entries


def cross_warp(sod_d: SOD, params: ModuliParams) -> CrossWarpResult:
    certs: list[Certificate] = []
    apexes: list[tuple[str, int, int]] = []
    groups = []
    i = params.i_d
    for label, blocks in sod_d.groups():
        base, bound, _ = _parse_dsheaf_megablock(blocks, label)
        seq: list[tuple[str, int, int]] = [("F", 0, 0)]  # D^0 = O
        apexes.append((label, 0, 0))
        for n in range(1, bound + 1):
            seq += [("D", c, n - c) for c in range(n + 1)]
            for c in range(n + 1):
                k = n - c
                old = [("F", c, j) for j in range(k - 1, -1, -1)] + [("D", c + e, k - e) for e in range(k + 1)]
                new = [("D", c + e, k - e) for e in range(1, k + 1)] + [("F", c, j) for j in range(k, -1, -1)]
                start = seq.index(old[0]) if old else None
                if seq[start:start + len(old)] != old:
                    raise WeaveError(f"stacking pattern not found for D^{k} shift {c}")
                seq[start:start + len(old)] = new
                apexes.append((label, c, k))
                if k >= 1:
                    ctx = f"{label}: top center Lambda^-{c} D^{k}"
                    certs.append(cert_subcats(params.d, params.g, i, k, params.conjectural).with_context(ctx))
                    certs.append(cert_cw_orthogonal(params.d, params.g, i, k, params.conjectural)
                                 .with_context(ctx + " (F to F-bullet)"))
                    certs.append(cert_fbullet_to_d(params.d, params.g, i, k, params.conjectural)
                                 .with_context(ctx + " (F-bullet to D)"))
        want = [("F", c, j) for c in range(bound, -1, -1) for j in range(bound - c, -1, -1)]
        if seq != want:
            raise WeaveError(f"stacking of {label} did not reach the tensor ordering")
        groups.append((label, [Block(TENSOR_DUAL_F, j, base + LineBundle(0, c)) for _, c, j in seq]))
    return CrossWarpResult(SOD.from_groups(groups, "cross_warp"), certs, apexes)


# ------------------------------------------------------------ lambda order

def _tensor_entries(blocks, label) -> tuple[LineBundle, list[tuple[int, int]]]:
    base = blocks[-1].twist
    out = []
    for b in blocks:
        rel = b.twist - base
        if b.family != TENSOR_DUAL_F or rel.m != 0 or rel.n < 0:
            raise ValueError(f"malformed tensor megablock {label}")
        out.append((b.sym + 2 * rel.n, rel.n))  # (lambda, k)
    return base, out


def reorder_lambda(sod: SOD, params: ModuliParams, certs: list[Certificate]) -> SOD:
    groups = []
    for label, blocks in sod.groups():
        base, seq = _tensor_entries(blocks, label)
        key = lambda e: (-e[0], -e[1])
        for a in range(1, len(seq)):
            b = a
            while b > 0 and key(seq[b - 1]) > key(seq[b]):
                (lam, k), (lamp, kp) = seq[b - 1], seq[b]
                if lam >= lamp:
                    raise WeaveError("lambda reorder would swap equal lambda blocks")
                cert = cert_bl_reordering(params.d, params.g, params.i_d, lam, k, lamp, kp, params.conjectural)
                certs.append(cert.with_context(f"{label}: (lambda={lam},k={k}) right past (lambda={lamp},k={kp})"))
                seq[b - 1], seq[b] = seq[b], seq[b - 1]
                b -= 1
        groups.append((label, [Block(TENSOR_DUAL_F, lam - 2 * k, base + LineBundle(0, k)) for lam, k in seq]))
    return SOD.from_groups(groups, "reorder_lambda")


def lambda_index(block: Block, g: int, shift: LineBundle) -> tuple[int, int]:
    """(lambda, k) of a block written as shift (x) Lambda^-k F-dual^(lambda-2k)."""
    rel = block.twist - shift
    if rel.m != 0:
        raise ValueError("block is not a Lambda twist of the reference")
    return block.sym + 2 * rel.n, rel.n


# ------------------------------------------------------------------ runs

@dataclass
class SodRun:
    params: ModuliParams
    modified: ModifiedResult
    sod1: SOD
    reordered: SOD
    sod2g: SOD | None
    certificates: list[Certificate]
    apexes: list[tuple[str, int, int]]

    @property
    def stages(self) -> list[tuple[str, SOD]]:
        out = [("modified", self.modified.sod), ("sod1", self.sod1), ("reordered", self.reordered)]
        if self.sod2g is not None:
            out.append(("sod_2g", self.sod2g))
        return out


def split_2g(reordered: SOD, g: int, certs: list[Certificate]) -> SOD:
    params = derive_params(g, 2 * g)
    m1, m2, m3 = (reordered.megablock(lab) for lab in ("M1", "M2", "M3"))
    t2 = params.t2()
    low = [b for b in m3 if lambda_index(b, g, t2)[0] <= g - 2]
    high = [b for b in m3 if lambda_index(b, g, t2)[0] > g - 2]
    # decreasing lambda puts the split part at the right end of M3
    if list(m3) != high + low:
        raise WeaveError("third megablock is not sorted by decreasing lambda")
    om = omega(g, 2 * g)
    if om != theta_lambda(g, -3, -1):
        raise WeaveError("omega does not match theta^-3 Lambda^-1")
    certs.append(Certificate("serre_functor", context=f"move {len(low)} blocks with lambda<=g-2 to the far left",
                             reduction=("tensor by omega = theta^-3 Lambda^-1",)))
    shift = LineBundle(0, -((g - 2) // 2))
    groups = [("I", [b.twisted(om) for b in low]), ("II", list(m1)), ("III", list(m2)), ("IV", high)]
    groups = [(lab, [b.twisted(shift) for b in bs]) for lab, bs in groups]
    certs.append(Certificate("global_twist", context=f"tensor everything by Lambda^{(g - 2) // 2}"))
    return SOD.from_groups(groups, "sod_2g")


def build_sod(params: ModuliParams) -> SodRun:
    mod = modified_sod(params)
    certs = list(mod.certificates)
    cw = cross_warp(mod.sod, params)
    certs += cw.certificates
    reordered = reorder_lambda(cw.sod, params, certs)
    sod2g = None
    if params.d == 2 * params.g:
        sod2g = split_2g(reordered, params.g, certs)
    run = SodRun(params, mod, cw.sod, reordered, sod2g, certs, cw.apexes)
    n = len(mod.sod)
    if any(len(s) != n for _, s in run.stages):
        raise WeaveError("block count changed between stages")
    return run


def sod_2g(g: int) -> SOD:
    return build_sod(derive_params(g, 2 * g)).sod2g


def sod_2g_closed_form(g: int) -> SOD:
    """Megablocks of the d = 2g decomposition written out from their index sets."""
    p = (g - 2) // 2
    h = g // 2

    def rows(x, off, cond):
        out = []
        for lam in range(2 * (g - 1), -1, -1):
            for k in range(lam // 2, -1, -1):
                if cond(lam, k):
                    out.append(Block(TENSOR_DUAL_F, lam - 2 * k, theta_lambda(g, x, off - k)))
        return out

    return SOD.from_groups([
        ("I", rows(-1, p, lambda lam, k: lam <= g - 2)),
        ("II", rows(0, p, lambda lam, k: lam <= 2 * (g - 2) and lam - k <= g - 2)),
        ("III", rows(1, h, lambda lam, k: lam - k <= g - 1)),
        ("IV", rows(2, h, lambda lam, k: g - 1 <= lam and lam - g + 1 <= k)),
    ], "sod_2g")
