"""Plain Weave: push the d = 2g decomposition into the form <L, i, ii, iii, iv, R>.

Mutations whose analytic content lives outside the engine (mainmutation1,
mainmutation2, the bar mutation) are rewrite rules here; only their index
side conditions are evaluated.  Blocks that fly into K or K-dual keep their
original label under the "Mutated" family so their Sym power stays known.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

from .lattice import (
    BAR_TENSOR_DUAL_F, DESCENDS, IN_K, IN_K_DUAL, MUTATED, SOD, TENSOR_DUAL_F, Block,
    theta_lambda,
)
from .vanishing import Certificate, Ineq, make_check, predicate
from .weave import lambda_index, sod_2g
from .weights import descent_weight, tensor_coords


class PlainWeaveError(RuntimeError):
    pass


# ------------------------------------------------------- side conditions

@predicate("mainmutation1")
def _mainmutation1(ell, k, g, conjectural=False):
    return (Ineq("0<=l", 0, ell, False), Ineq("l<=1", ell, 1, False),
            Ineq("l<=k", ell, k, False), Ineq("2k<=g-1", 2 * k, g - 1, False)), False


@predicate("mutation_iv")
def _mutation_iv(lam, k, g, conjectural=False):
    h, q = g // 2, (g - 1) // 2
    conds = [Ineq("2*floor(g/2)<lambda", 2 * h, lam)]
    if lam == 2 * k:
        m = k - h
        conds.append(Ineq("0<=m", 0, m, False))
    else:
        m = lam - k - h
        conds.append(Ineq("0<=m-1", 0, m - 1, False))
    conds.append(Ineq("m<=floor((g-1)/2)", m, q, False))
    return tuple(conds), False


@predicate("mutation_i")
def _mutation_i(lam, k, g, conjectural=False):
    p = (g - 2) // 2
    m = p - k
    conds = [Ineq("lambda<2*floor((g-2)/2)", lam, 2 * p)]
    conds.append(Ineq("0<=m", 0, m, False) if lam == 2 * k else Ineq("1<=m", 1, m, False))
    conds.append(Ineq("m<=floor((g-2)/2)", m, p, False))
    return tuple(conds), False


@predicate("mutation_ii")
def _mutation_ii(lam, k, g, conjectural=False):
    h = g // 2
    m = lam - k - h
    half = Fraction(lam, 2) - h
    conds = [Ineq("0<=lambda/2-floor(g/2)", 0, half, False),
             Ineq("lambda/2-floor(g/2)<=m", half, m, False),
             Ineq("m<=g-2-floor(g/2)", m, g - 2 - h, False)]
    if 2 * k < lam:
        conds.append(Ineq("lambda/2-floor(g/2)<m", half, m))
    return tuple(conds), False


@predicate("descends")
def _descends(weight, conjectural=False):
    return (Ineq("0<=weight", 0, weight, False), Ineq("weight<=0", weight, 0, False)), False


def _mm1_checks(m: int, lam: int, k: int, g: int) -> list:
    if lam == 2 * k:
        pairs = [(0, m)]
    else:
        pairs = [(0, m - 1), (0, m), (1, m)]
    return [make_check("mainmutation1", ell=ell, k=kk, g=g) for ell, kk in pairs]


@lru_cache(maxsize=None)
def cert_makebars(g: int, index: tuple[tuple[int, int], ...]) -> Certificate:
    checks = []
    for lam, k in index:
        for lamp, kp in index:
            t = lam - k - lamp + kp
            checks.append(make_check("theta_chain", a=lam - 2 * k, b=lamp - 2 * kp, t=t, g=g))
            if lam < lamp:
                checks.append(make_check("theta_chain_strict", a=lam - 2 * k, b=lamp - 2 * kp, t=t, g=g))
    red = ("F^v^(lambda-2k) = Lambda^(2k-lambda) F^(lambda-2k)",
           "Serre duality on M_{g-1}(2g) with omega = theta^-3 Lambda^-1",
           "theta^-1 twisted chains for each pair of rows")
    return Certificate("makebars", reduction=red, checks=tuple(checks))


# ------------------------------------------------------------ annotations

def pushtozero(block: Block, g: int) -> str | None:
    if block.family not in (TENSOR_DUAL_F,):
        return None
    _x, y, z = tensor_coords(block, g)
    if z % 2 == 1 and z <= g - 1:
        k = (z - 1) // 2
        if y == k:
            return IN_K
        if y == k + 1:
            return IN_K_DUAL
    if z == 2 * y:
        return DESCENDS
    return None


def ncr_blocks(g: int) -> dict[int, int]:
    out = {}
    for s in range(0, g, 2):
        out[s] = 2 if (g % 2 == 1 and s == g - 1) else 4
    return out


# -------------------------------------------------------------- pipeline

@dataclass(frozen=True)
class Entry:
    origin: int
    block: Block
    lam: int
    k: int


@dataclass
class PlainWeaveResult:
    g: int
    source: SOD
    sod: SOD
    origins: list[int]
    log: list[Certificate]

    @property
    def left(self) -> tuple[Block, ...]:
        return self.sod.megablock("L")

    @property
    def right(self) -> tuple[Block, ...]:
        return self.sod.megablock("R")

    @property
    def left_count(self) -> int:
        return len(self.left)

    @property
    def right_count(self) -> int:
        return len(self.right)

    @property
    def center(self) -> dict[str, tuple[Block, ...]]:
        return {lab: self.sod.megablock(lab) for lab in ("i", "ii", "iii", "iv")}

    def center_multiset(self) -> dict[int, int]:
        c = Counter(b.sym for bs in self.center.values() for b in bs)
        return dict(sorted(c.items()))


def _fly(e: Entry, annotation: str) -> Entry:
    return replace(e, block=replace(e.block, family=MUTATED, annotation=annotation))


def _pushed(e: Entry, g: int, want: str, log: list[Certificate], where: str) -> Entry:
    got = pushtozero(e.block, g)
    chk = make_check("bounds", value=e.block.sym, lo=0, hi=g - 1)
    note = "" if got == want else f"expected {want}, pattern gives {got}"
    log.append(Certificate("pushtozero", context=f"{where}: (lambda={e.lam}, k={e.k}) already in {want}",
                           checks=(chk,), note=note))
    return replace(e, block=e.block.annotated(want))


def _rows(entries: list[Entry], cond) -> list[Entry]:
    return [e for e in entries if cond(e.lam)]


def _low_pass(rows: list[Entry], center_lam: int, ann: str, g: int, log: list[Certificate],
              where: str) -> tuple[list[Entry], list[Entry]]:
    """makebars then mutation_i: returns (flown blocks, center row)."""
    index = tuple(sorted((e.lam, e.k) for e in rows))
    log.append(cert_makebars(g, index).with_context(f"{where}: bars on {len(rows)} blocks"))
    # each row is mutated to barred blocks with increasing k
    barred = []
    for lam in sorted({e.lam for e in rows}, reverse=True):
        row = sorted((e for e in rows if e.lam == lam), key=lambda e: e.k)
        barred += [replace(e, block=replace(e.block, family=BAR_TENSOR_DUAL_F)) for e in row]
    center = [e for e in barred if e.lam == center_lam]
    right = [e for e in barred if e.lam < center_lam]
    flown = []
    for e in right:
        m = (g - 2) // 2 - e.k
        checks = [make_check("mutation_i", lam=e.lam, k=e.k, g=g)] + _mm1_checks(m, e.lam, e.k, g)
        log.append(Certificate("mutation_i", context=f"{where}: (lambda={e.lam}, k={e.k}) mutates left past the center row",
                               reduction=("dualize", "mainmutation1 projector", "dualize back"),
                               checks=tuple(checks)))
        flown.append(_fly(e, ann))
    # the barred center row spans the same subcategory as the unbarred row in decreasing k
    log.append(Certificate("makebars", context=f"{where}: center row rewritten without bars",
                           reduction=("bar mutation is an equivalence of the row",)))
    center = [replace(e, block=replace(e.block, family=TENSOR_DUAL_F))
              for e in sorted(center, key=lambda e: -e.k)]
    return flown, center


def _high_pass(rows: list[Entry], center_lam: int, ann: str, rule: str, g: int,
               log: list[Certificate], where: str, offset: int = 0) -> tuple[list[Entry], list[Entry]]:
    """Rows with lambda > center_lam mutate right past the center row, nearest first."""
    center = [e for e in rows if e.lam == center_lam]
    left = [e for e in rows if e.lam > center_lam]
    flown = []
    for e in reversed(left):
        lam, k = e.lam - 2 * offset, e.k - offset
        checks = [make_check(rule, lam=lam, k=k, g=g)]
        if rule == "mutation_iv":
            m = k - g // 2 if lam == 2 * k else lam - k - g // 2
            checks += _mm1_checks(m, lam, k, g)
        log.append(Certificate(rule, context=f"{where}: (lambda={e.lam}, k={e.k}) mutates right past the center row",
                               reduction=("mainmutation1 projector",), checks=tuple(checks)))
        flown.insert(0, _fly(e, ann))
    return center, flown


def _mainmutation2(xs: list[Entry], ts: list[Entry], shift, g: int, ann: str,
                   log: list[Certificate], where: str) -> list[Entry]:
    by_twist = {(t.block.twist + shift, t.block.sym): t for t in ts}
    out = []
    for x in xs:
        t = by_twist.get((x.block.twist, x.block.sym))
        if t is None:
            raise PlainWeaveError(f"{where}: no partner for block (lambda={x.lam}, k={x.k})")
        chk = make_check("descends", weight=descent_weight(t.block, g))
        log.append(Certificate("mainmutation2", context=f"{where}: (lambda={x.lam}, k={x.k}) against its untwisted partner",
                               reduction=("morphism O -> theta Lambda^-1 [1]",), checks=(chk,)))
        out.append(_fly(x, ann))
    return out


def run_plain_weave(g: int, source: SOD | None = None) -> PlainWeaveResult:
    if g < 2:
        raise ValueError("genus must be at least 2")
    src = sod_2g(g) if source is None else source
    p, h = (g - 2) // 2, g // 2
    shifts = {"I": theta_lambda(g, -1, p), "II": theta_lambda(g, 0, p),
              "III": theta_lambda(g, 1, h), "IV": theta_lambda(g, 2, h)}
    mbs: dict[str, list[Entry]] = {}
    pos = 0
    for label, blocks in src.groups():
        es = []
        for b in blocks:
            lam, k = lambda_index(b, g, shifts[label])
            es.append(Entry(pos, b, lam, k))
            pos += 1
        mbs[label] = es
    log: list[Certificate] = []

    # IV = <iv, IV'>
    iv_rows = mbs["IV"]
    pushed_iv = [_pushed(e, g, IN_K_DUAL, log, "IV") for e in iv_rows if g % 2 == 0 and e.lam == g - 1]
    iv, iv_flown = _high_pass([e for e in iv_rows if e.lam >= 2 * h], 2 * h, IN_K_DUAL, "mutation_iv",
                              g, log, "IV")
    iv = sorted(iv, key=lambda e: -e.k)
    iv_prime = iv_flown + pushed_iv

    # I = <I', i>
    rows_i = mbs["I"]
    pushed_i = [_pushed(e, g, IN_K, log, "I") for e in rows_i if g % 2 == 1 and e.lam == g - 2]
    fl_i, cen_i = _low_pass([e for e in rows_i if e.lam <= 2 * p], 2 * p, IN_K, g, log, "I")
    i_prime = pushed_i + fl_i

    # II = <ii_a, II_a', II_b', ii>
    rows_ii = mbs["II"]
    ii_a_rows = [e for e in rows_ii if e.lam >= g - 1]
    ii_b_rows = [e for e in rows_ii if e.lam <= g - 2]
    pushed_iia = [_pushed(e, g, IN_K, log, "II_a") for e in ii_a_rows if g % 2 == 0 and e.lam == g - 1]
    ii_a, iia_flown = _high_pass([e for e in ii_a_rows if e.lam >= 2 * h], 2 * h, IN_K, "mutation_ii",
                                 g, log, "II_a")
    ii_a = sorted(ii_a, key=lambda e: -e.k)
    pushed_iib = [_pushed(e, g, IN_K, log, "II_b") for e in ii_b_rows if g % 2 == 1 and e.lam == g - 2]
    fl_iib, cen_ii = _low_pass([e for e in ii_b_rows if e.lam <= 2 * p], 2 * p, IN_K, g, log, "II_b")
    ii_prime = iia_flown + pushed_iia + pushed_iib + fl_iib

    # III = <iii_a, III_a', iii, III_b', iii_b>
    rows_iii = mbs["III"]
    iii = sorted([e for e in rows_iii if e.lam == 2 * h], key=lambda e: -e.k)
    a_rows = [e for e in rows_iii if e.lam > 2 * h]
    b_rows = [e for e in rows_iii if e.lam < 2 * h]
    pushed_iiia = [_pushed(e, g, IN_K, log, "III_a") for e in a_rows if e.lam == 2 * h + 1]
    iii_a, iiia_flown = _high_pass([e for e in a_rows if e.lam >= 2 * h + 2], 2 * h + 2, IN_K, "mutation_ii",
                                   g, log, "III_a", offset=1)
    iii_a = sorted(iii_a, key=lambda e: -e.k)
    iiia_prime = iiia_flown + pushed_iiia
    pushed_iiib = [_pushed(e, g, IN_K_DUAL, log, "III_b") for e in b_rows if e.lam == 2 * h - 1]
    fl_iiib, iii_b = _low_pass([e for e in b_rows if e.lam <= 2 * p], 2 * p, IN_K_DUAL, g, log, "III_b")
    iiib_prime = pushed_iiib + fl_iiib

    # mainmutation2 passes
    ii_a_prime = _mainmutation2(ii_a, cen_i, theta_lambda(g, 1, -1), g, IN_K, log, "ii_a")
    iii_a_prime = _mainmutation2(iii_a, cen_ii, theta_lambda(g, 1, -1), g, IN_K, log, "iii_a")
    iii_b_prime = _mainmutation2(iii_b, iv, theta_lambda(g, -1, 1), g, IN_K_DUAL, log, "iii_b")

    centers = {"i": cen_i, "ii": cen_ii, "iii": iii, "iv": iv}
    for lab, es in centers.items():
        for e in es:
            chk = make_check("descends", weight=descent_weight(e.block, g))
            log.append(Certificate("center_move", context=f"{lab}: (lambda={e.lam}, k={e.k}) moves to the center",
                                   reduction=("orthogonal to K and K-dual after descent",), checks=(chk,)))
    left = i_prime + ii_a_prime + ii_prime + iii_a_prime + iiia_prime
    right = iiib_prime + iii_b_prime + iv_prime
    groups = [("L", left)] + [(lab, [replace(e, block=e.block.annotated(DESCENDS)) for e in es])
                              for lab, es in centers.items()] + [("R", right)]
    final = SOD.from_groups([(lab, [e.block for e in es]) for lab, es in groups], "plain_weave")
    origins = [e.origin for _, es in groups for e in es]
    if sorted(origins) != list(range(len(src))):
        raise PlainWeaveError("plain weave lost or duplicated a block")
    for b in final.megablock("L"):
        if b.annotation != IN_K:
            raise PlainWeaveError("non-K block on the left")
    for b in final.megablock("R"):
        if b.annotation != IN_K_DUAL:
            raise PlainWeaveError("non-K-dual block on the right")
    return PlainWeaveResult(g, src, final, origins, log)


def center_closed_form(g: int) -> dict[str, list[Block]]:
    p, q = (g - 2) // 2, (g - 1) // 2
    blk = lambda x, m: Block(TENSOR_DUAL_F, 2 * m, theta_lambda(g, x, m), annotation=DESCENDS)
    return {"i": [blk(-1, m) for m in range(p + 1)], "ii": [blk(0, m) for m in range(p + 1)],
            "iii": [blk(1, m) for m in range(q + 1)], "iv": [blk(2, m) for m in range(q + 1)]}
