"""Acceptance criteria 1-10.  Each test records one PASS/FAIL line."""
from __future__ import annotations

import time
from dataclasses import replace

import pytest

from conftest import ACCEPTANCE_LINES, hecke, plain, sod_run
from sodweave.cli import EXIT_OK, RunConfig, check, execute, main
from sodweave.hecke import bps_weight, hecke_blocks, odd_sod, quasi_bps_ok, twist_law
from sodweave.hodge import HHVector, hh_of_blocks, hh_windows_chain
from sodweave.lattice import ParamError, derive_params
from sodweave.plain_weave import ncr_blocks
from sodweave.vanishing import Ineq, replay
from sodweave.weave import build_sod
from sodweave.weights import in_closed, in_window, little_window, weight_interval, window_2g

# pinned tolerances
RUNTIME_GENUS2_S = 1.0
RUNTIME_SWEEP_S = 30.0
SWEEP_GENERA = range(2, 9)
SWEEP_OFFSETS = (0, 1, 2, 3, 5)  # d = 2g - offset
WIDE_GENERA = range(2, 13)
HECKE_GENERA = range(2, 9)
NEGATIVE_GENERA = range(2, 5)


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def sweep_pairs():
    out = []
    for g in SWEEP_GENERA:
        for off in SWEEP_OFFSETS:
            d = 2 * g - off
            try:
                p = derive_params(g, d)
            except ParamError:
                continue
            if p.i_d <= p.v:
                out.append((g, d))
    return out


def test_criterion_01_genus_two_ledger():
    start = time.perf_counter()
    p = derive_params(2, 4)
    run = build_sod(p)
    chain = hh_windows_chain(p)
    blocks = hh_of_blocks(run.sod1, 2)
    elapsed = time.perf_counter() - start
    want = HHVector.from_dict({-1: 4, 0: 9, 1: 4})
    ok = chain == blocks == want and elapsed < RUNTIME_GENUS2_S
    record(1, ok, f"hh={chain.as_dict()} blocks={blocks.as_dict()} t={elapsed:.3f}s")


def test_criterion_02_hh_sweep():
    start = time.perf_counter()
    bad = []
    pairs = sweep_pairs()
    for g, d in pairs:
        run = build_sod(derive_params(g, d))
        ref = hh_windows_chain(run.params)
        for name, sod in run.stages:
            if name in ("sod1", "sod_2g") and hh_of_blocks(sod, g) != ref:
                bad.append((g, d, name))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < RUNTIME_SWEEP_S
    record(2, ok, f"{len(pairs)} (g,d) pairs, mismatches={bad} t={elapsed:.2f}s")


def test_criterion_03_ncr_multiset():
    bad = [g for g in WIDE_GENERA if plain(g).center_multiset() != ncr_blocks(g)]
    record(3, not bad, f"g=2..12 center == ncr_blocks, mismatches={bad}")


def test_criterion_04_conservation():
    run = sod_run(5, 10)
    counts = {name: len(sod) for name, sod in run.stages}
    counts["plain_weave"] = len(plain(5).sod)
    ok = set(counts.values()) == {40}
    for g, d in sweep_pairs():
        r = sod_run(g, d)
        ok = ok and len({len(s) for _, s in r.stages}) == 1
    record(4, ok, f"(5,10) counts={counts}")


def test_criterion_05_certified():
    total = 0
    bad = []
    for g, d in sweep_pairs():
        certs = sod_run(g, d).certificates
        total += len(certs)
        bad += [(g, d, c.rule, c.context) for c in certs if c.verdict != "certified"]
    record(5, not bad, f"{total} certificates, uncertified={len(bad)}")


def test_criterion_06_windows():
    bad = []
    for g in WIDE_GENERA:
        lo, width = window_2g(g)
        for b in sod_run(g, 2 * g).sod2g:
            if not in_window(weight_interval(b, g), lo, width):
                bad.append(("sod_2g", g, b))
        llo, lhi = little_window(g)
        for bs in plain(g).center.values():
            for b in bs:
                if not in_closed(weight_interval(b, g), llo, lhi):
                    bad.append(("center", g, b))
    record(6, not bad, f"g=2..12 window violations={len(bad)}")


def test_criterion_07_hecke_doubling():
    bad = []
    for g in HECKE_GENERA:
        if hh_of_blocks(hecke(g).combined, g) != hh_of_blocks(odd_sod(g), g).scale(2):
            bad.append(g)
    g2 = hh_of_blocks(hecke(2).combined, 2)
    ok = not bad and g2 == HHVector.from_dict({-1: 4, 0: 8, 1: 4})
    record(7, ok, f"g=2..8 mismatches={bad}, g=2 hh={g2.as_dict()}")


def test_criterion_08_quasi_bps():
    bad = []
    for g in WIDE_GENERA:
        r = hecke(g)
        for b in hecke_blocks(r.b_even, g):
            if b.family != "C" or not quasi_bps_ok(b.twisted(shift=-b.shift), 2 - g):
                bad.append((g, b.label))
        for b in hecke_blocks(r.b_odd, g):
            if b.family != "D" or not quasi_bps_ok(b.twisted(shift=-b.shift), 3 - g):
                bad.append((g, b.label))
        # every emitted block sits at its megablock weight
        for b in hecke_blocks(r.b_even, g) + hecke_blocks(r.b_odd, g):
            if not quasi_bps_ok(b):
                bad.append((g, b.label, bps_weight(b)))
        if not all(c.holds for c in twist_law(r)):
            bad.append((g, "twist law"))
    record(8, not bad, f"g=2..12 failures={bad}")


def test_criterion_09_determinism(tmp_path):
    argv = ["--genus", "4", "--stage", "all", "--emit", "json,svg"]
    codes = [main(argv + ["--output-dir", str(tmp_path / run)]) for run in ("a", "b")]
    a, b = tmp_path / "a", tmp_path / "b"
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    same = all((a / f).read_bytes() == (b / f).read_bytes() for f in files)
    kinds = {f.suffix for f in files}
    ok = codes == [0, 0] and same and kinds == {".json", ".svg"}
    record(9, ok, f"{len(files)} artifacts byte-identical={same}")


def _flip(chk):
    """A replay of chk with one integer operand moved by one that no longer holds."""
    for name, value in chk.args:
        if isinstance(value, bool) or not isinstance(value, int):
            continue
        for delta in (1, -1):
            moved = replay(chk, **{name: value + delta})
            if not moved.holds:
                return moved
    return None


def _nudge(q: Ineq) -> Ineq:
    # move the lower operand up by one: a tight bound then fails
    return replace(q, lo=q.lo + 1)


def test_criterion_10_negative_controls():
    dropped = nudged = replayed = 0
    escapes = []
    for g in NEGATIVE_GENERA:
        bundle = execute(RunConfig(g))
        if check(bundle).exit_code != EXIT_OK:
            escapes.append((g, "baseline"))
            continue
        for name, sod in list(bundle.sods.items()):
            for idx in range(len(sod)):
                bundle.sods[name] = sod.without(idx)
                dropped += 1
                if check(bundle).exit_code == EXIT_OK:
                    escapes.append((g, name, idx))
            bundle.sods[name] = sod
        for stage, certs in bundle.certificates.items():
            for n, cert in enumerate(certs):
                for j, chk in enumerate(cert.checks):
                    if not chk.tight:
                        continue
                    for q_i, q in enumerate(chk.conditions):
                        if not q.tight:
                            continue
                        conds = chk.conditions[:q_i] + (_nudge(q),) + chk.conditions[q_i + 1:]
                        certs[n] = replace(cert, checks=cert.checks[:j] + (replace(chk, conditions=conds),)
                                           + cert.checks[j + 1:])
                        nudged += 1
                        if check(bundle).exit_code == EXIT_OK:
                            escapes.append((g, stage, cert.rule, q.label))
                    moved = _flip(chk)
                    if moved is None:
                        escapes.append((g, stage, cert.rule, "no flipping operand"))
                    else:
                        certs[n] = replace(cert, checks=cert.checks[:j] + (moved,) + cert.checks[j + 1:])
                        replayed += 1
                        if check(bundle).exit_code == EXIT_OK:
                            escapes.append((g, stage, cert.rule, "replayed"))
                    certs[n] = cert
    record(10, not escapes and dropped and nudged,
           f"dropped={dropped} nudged={nudged} replayed={replayed} escapes={escapes[:5]}")
