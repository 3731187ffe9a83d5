"""Inequality-based vanishing predicates and the Hom-reduction rule table.

Every predicate returns a Check: the instantiated integers plus the list of
inequalities that were tested.  A Certificate bundles the checks used by one
rewrite step together with the symbolic reduction that produced them.
Verdicts are tri-state in spirit: "uncertified" only means the criterion does
not apply as instantiated, never that a Hom group is nonzero.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from .lattice import (
    D_SHEAF, STRUCTURE_SHEAF, TENSOR_DUAL_F, BAR_TENSOR_DUAL_F, Block, LineBundle,
    ModuliParams, restrict_to_stratum, theta_lambda_coords,
)

CERTIFIED = "certified"
UNCERTIFIED = "uncertified"

Number = int | Fraction


@dataclass(frozen=True)
class Ineq:
    """lo < hi (strict) or lo <= hi."""

    label: str
    lo: Number
    hi: Number
    strict: bool = True

    @property
    def holds(self) -> bool:
        return self.lo < self.hi if self.strict else self.lo <= self.hi

    @property
    def tight(self) -> bool:
        gap = self.hi - self.lo
        return gap == 1 if self.strict else gap == 0


@dataclass(frozen=True)
class Check:
    predicate: str
    args: tuple[tuple[str, Number], ...]
    conditions: tuple[Ineq, ...]
    conditional: bool = False
    conjectural: bool = False

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.conditions)

    @property
    def tight(self) -> bool:
        return self.holds and any(c.tight for c in self.conditions)

    def arg(self, name: str) -> Number:
        return dict(self.args)[name]

    def failed(self) -> list[str]:
        return [c.label for c in self.conditions if not c.holds]


@dataclass(frozen=True)
class Certificate:
    rule: str
    context: str = ""
    reduction: tuple[str, ...] = ()
    checks: tuple[Check, ...] = ()
    note: str = ""

    @property
    def certified(self) -> bool:
        return not self.note and all(c.holds for c in self.checks)

    @property
    def verdict(self) -> str:
        return CERTIFIED if self.certified else UNCERTIFIED

    @property
    def conditional(self) -> bool:
        return any(c.conditional for c in self.checks)

    @property
    def reason(self) -> str:
        if self.note:
            return self.note
        for c in self.checks:
            bad = c.failed()
            if bad:
                return f"{c.predicate}: {', '.join(bad)}"
        return ""

    def with_context(self, context: str) -> "Certificate":
        return Certificate(self.rule, context, self.reduction, self.checks, self.note)


# ---------------------------------------------------------------- predicates

PREDICATES: dict[str, Callable[..., tuple[tuple[Ineq, ...], bool]]] = {}


def predicate(name: str):
    def deco(fn):
        PREDICATES[name] = fn
        return fn
    return deco


def make_check(name: str, conjectural: bool = False, **args) -> Check:
    conds, conditional = PREDICATES[name](conjectural=conjectural, **args)
    return Check(name, tuple(args.items()), tuple(conds), conditional, conjectural)


def replay(check: Check, **overrides) -> Check:
    """Re-evaluate a stored check, optionally with some operands replaced."""
    args = dict(check.args)
    args.update(overrides)
    return make_check(check.predicate, check.conjectural, **args)


def _range(dprime: int, j: int, g: int, conjectural: bool) -> tuple[list[Ineq], bool]:
    std = [
        Ineq("2<d'", 2, dprime),
        Ineq("d'<=2g+1", dprime, 2 * g + 1, False),
        Ineq("1<=j", 1, j, False),
        Ineq("j<=(d'-1)/2", j, (dprime - 1) // 2, False),
    ]
    if all(c.holds for c in std) or not conjectural:
        return std, False
    wide = [
        Ineq("2<d'", 2, dprime),
        Ineq("1<=j", 1, j, False),
        Ineq("j<=(d'-1)/2", j, (dprime - 1) // 2, False),
        Ineq("3j<=d'+g-1", 3 * j, dprime + g - 1, False),
    ]
    return wide, all(c.holds for c in wide)


def _outside(t: int, a: int) -> Ineq:
    # t not in [0, a]; report whichever side is nearer
    if t < 0:
        return Ineq("t<0", t, 0)
    return Ineq("a<t", a, t)


@predicate("hv1")
def _hv1(dprime, j, a, b, t, g, conjectural=False):
    conds, cond = _range(dprime, j, g, conjectural)
    top = dprime + g - 2 * j - 1
    conds += [
        Ineq("a<=d'+g-2j-1", a, top, False),
        Ineq("b<=d'+g-2j-1", b, top, False),
        _outside(t, a),
        Ineq("a-j-1<t", a - j - 1, t),
        Ineq("t<d'+g-2j-1-b", t, top - b),
    ]
    return tuple(conds), cond


@predicate("hv2")
def _hv2(dprime, j, a, b, t, g, conjectural=False):
    if j == 0:
        conds, cond = [Ineq("0<d'", 0, dprime)], False
    else:
        conds, cond = _range(dprime, j, g, conjectural)
        if j < 0:
            conds.append(Ineq("0<=j", 0, j, False))
    conds += [
        Ineq("a<t", a, t),
        Ineq("t<d'+g-2j-1-b", t, dprime + g - 2 * j - 1 - b),
    ]
    return tuple(conds), cond


@predicate("hv3")
def _hv3(dprime, j, a, b, not_leq, g, conjectural=False):
    conds, cond = _range(dprime, j, g, conjectural)
    conds += [
        Ineq("a<=j", a, j, False),
        Ineq("b<d'+g-2j-1", b, dprime + g - 2 * j - 1),
        Ineq("D not<= D'", 0, 1 if not_leq else 0),
    ]
    return tuple(conds), cond


@predicate("bl")
def _bl(dprime, j, a, b, t, g, conjectural=False):
    conds, cond = _range(dprime, j, g, conjectural)
    conds += [
        Ineq("a<=j", a, j, False),
        Ineq("b<=j", b, j, False),
        Ineq("a-j-1<t", a - j - 1, t),
        Ineq("t<d'+g-2j-1-b", t, dprime + g - 2 * j - 1 - b),
        Ineq("2t<a-b", 2 * t, a - b),
    ]
    return tuple(conds), cond


@predicate("theta_chain")
def _theta_chain(a, b, t, g, conjectural=False):
    # theta^{-1} twisted vanishing between a-th and b-th tensor powers
    return (Ineq("a-g<t", a - g, t), Ineq("t<g-b", t, g - b)), False


@predicate("theta_chain_strict")
def _theta_chain_strict(a, b, t, g, conjectural=False):
    return (
        Ineq("a<=2g-1", a, 2 * g - 1, False),
        Ineq("b<=2g-1", b, 2 * g - 1, False),
        Ineq("2t<a-b", 2 * t, a - b),
        Ineq("a-g<t", a - g, t),
        Ineq("t<g-b+1", t, g - b + 1),
    ), False


@predicate("hecke_ortho1")
def _hecke_ortho1(k, ell, conjectural=False):
    return (Ineq("-1-2k<l-k", -1 - 2 * k, ell - k), Ineq("l-k<1+2l", ell - k, 1 + 2 * ell)), False


@predicate("hecke_ortho3")
def _hecke_ortho3(k, ell, conjectural=False):
    return (Ineq("-2-2l<k-l-2", -2 - 2 * ell, k - ell - 2),
            Ineq("k-l-2<2k-1", k - ell - 2, 2 * k - 1)), False


@predicate("hecke_ortho4")
def _hecke_ortho4(k, ell, conjectural=False):
    return (Ineq("-2k<l-k", -2 * k, ell - k), Ineq("l-k<2l", ell - k, 2 * ell)), False


@predicate("bounds")
def _bounds(value, lo, hi, conjectural=False):
    """lo <= value <= hi (used for index side conditions)."""
    return (Ineq("lo<=value", lo, value, False), Ineq("value<=hi", value, hi, False)), False


@predicate("strict_lower")
def _strict_lower(value, lo, hi, conjectural=False):
    """lo < value <= hi."""
    return (Ineq("lo<value", lo, value), Ineq("value<=hi", value, hi, False)), False


def certify_hv1(dprime, j, a, b, t, g, conjectural=False) -> Certificate:
    return Certificate("hv1", checks=(make_check("hv1", conjectural, dprime=dprime, j=j, a=a, b=b, t=t, g=g),))


def certify_hv2(dprime, j, a, b, t, g, conjectural=False) -> Certificate:
    return Certificate("hv2", checks=(make_check("hv2", conjectural, dprime=dprime, j=j, a=a, b=b, t=t, g=g),))


def certify_hv3(dprime, j, a, b, not_leq, g, conjectural=False) -> Certificate:
    return Certificate("hv3", checks=(make_check("hv3", conjectural, dprime=dprime, j=j, a=a, b=b,
                                                 not_leq=bool(not_leq), g=g),))


def certify_bl(dprime, j, a, b, t, g, conjectural=False) -> Certificate:
    return Certificate("bl", checks=(make_check("bl", conjectural, dprime=dprime, j=j, a=a, b=b, t=t, g=g),))


# ---------------------------------------------------------- reduction routes
#
# Each route works on integers only, so the rule certificates used by the
# pipelines and certify_hom share one code path.

def route_tensor(d, g, i, a, b, t, conj=False) -> tuple[tuple[str, ...], tuple[Check, ...], str]:
    """Hom(F-dual^b, F-dual^a Lambda^t) on M_i(d)."""
    red = ("cancel common twist",
           f"Hom(F^v^{b}, F^v^{a} L^{t}) = RGamma((barF^{a})^v (x) barF^{b} (x) L^{t})")
    if t == 0:
        chk = make_check("hv3", conj, dprime=d, j=i, a=a, b=b, not_leq=a > b, g=g)
    elif t < 0:
        chk = make_check("hv1", conj, dprime=d, j=i, a=a, b=b, t=t, g=g)
    elif t > a:
        chk = make_check("hv2", conj, dprime=d, j=i, a=a, b=b, t=t, g=g)
    else:
        return red, (), "no reduction rule applies"
    return red, (chk,), ""


def route_expand_source(d, g, floor, src_k, src_is_d, kprime, p, conj=False):
    """Source expanded into Lambda^{-m} F-dual^l, target restricted to its stratum.

    p is the Lambda power of (target twist - source twist) restricted along
    the stratum of D^{k'}_{floor}.  Each piece gives RGamma(barF^l Lambda^{m+p})
    on M_{floor-k'}(d-2k').
    """
    pieces = [(ell, m) for ell in range(src_k + 1) for m in range(src_k - ell + 1)] \
        if src_is_d else [(src_k, 0)]
    checks = tuple(
        make_check("hv2", conj, dprime=d - 2 * kprime, j=floor - kprime, a=0, b=ell, t=m + p, g=g)
        for ell, m in pieces)
    red = ("expand source into Lambda^-m F^v^l" if src_is_d else "source is a tensor block",
           f"restrict twist to stratum k'={kprime}: Lambda^{p}",
           "Hom(F^v^l Lambda^-m, O_stratum Lambda^p) = RGamma(barF^l Lambda^(m+p))")
    return red, checks


def route_expand_target(d, g, floor, src_k, tgt_k, tgt_is_d, p, conj=False):
    """Source D^k restricted, target expanded, Serre duality applied twice."""
    pieces = [(ell, m) for ell in range(tgt_k + 1) for m in range(tgt_k - ell + 1)] \
        if tgt_is_d else [(tgt_k, 0)]
    checks = tuple(
        make_check("hv2", conj, dprime=d - 2 * src_k, j=floor - src_k, a=ell, b=0,
                   t=p - m + src_k, g=g)
        for ell, m in pieces)
    red = (f"restrict to source stratum k={src_k}: Lambda^{p}",
           "expand target into Lambda^-m F^v^l",
           "Serre duality on M_i and on the stratum (omega restricts with Lambda^-k)",
           "RGamma((barF^l)^v Lambda^(p-m+k))")
    return red, checks


def _lambda_power_of(lb) -> int | None:
    if isinstance(lb, int):
        return lb
    if lb.m != 0:
        return None
    return -lb.n


# ------------------------------------------------------------- certify_hom

def _is_tensor(b: Block) -> bool:
    return b.family in (TENSOR_DUAL_F, STRUCTURE_SHEAF)


def certify_hom(a: Block, b: Block, params: ModuliParams, level: int | None = None,
                rule: str | None = None) -> Certificate:
    """Certify Hom(a, b) = 0 through the fixed rule table."""
    d, g, conj = params.d, params.g, params.conjectural
    if a == b:
        return Certificate("certify_hom", note="self-Hom never vanishes")
    if a.ambient != b.ambient:
        return Certificate("certify_hom", note="blocks live on different spaces")
    floor = level if level is not None else params.i_d
    rel = b.twist - a.twist

    if _is_tensor(a) and _is_tensor(b):
        if rel.m != 0:
            return Certificate("certify_hom", note="no reduction rule applies")
        red, checks, note = route_tensor(d, g, floor, b.sym, a.sym, -rel.n, conj)
        return Certificate("certify_hom", reduction=red, checks=checks, note=note)

    if {a.family, b.family} == {TENSOR_DUAL_F, BAR_TENSOR_DUAL_F} or (
            a.family == BAR_TENSOR_DUAL_F and _is_tensor(b)) or (
            b.family == BAR_TENSOR_DUAL_F and _is_tensor(a)):
        xa, ya = theta_lambda_coords(a.twist, g)
        xb, yb = theta_lambda_coords(b.twist, g)
        if xb - xa != -1:
            return Certificate("certify_hom", note="no reduction rule applies")
        t = b.sym - a.sym + ya - yb
        red = ("cancel common twist", "F^v^z = Lambda^-z F^z",
               "theta^-1 twisted chain for tensor powers")
        chk = make_check("theta_chain", conj, a=b.sym, b=a.sym, t=t, g=g)
        return Certificate("certify_hom", reduction=red, checks=(chk,))

    if b.family == D_SHEAF and (a.family == D_SHEAF or _is_tensor(a)):
        src_k = a.sym
        if a.family == D_SHEAF and rule == "serre":
            p = _lambda_power_of(restrict_to_stratum(rel, a.sym, a.stratum))
            if p is None:
                return Certificate("certify_hom", note="no reduction rule applies")
            red, checks = route_expand_target(d, g, a.stratum, a.sym, b.sym, True, p, conj)
            return Certificate("certify_hom", reduction=red, checks=checks)
        fl = b.stratum
        p = _lambda_power_of(restrict_to_stratum(rel, b.sym, fl))
        if p is None:
            return Certificate("certify_hom", note="no reduction rule applies")
        red, checks = route_expand_source(d, g, fl, src_k, a.family == D_SHEAF, b.sym, p, conj)
        return Certificate("certify_hom", reduction=red, checks=checks)

    if a.family == D_SHEAF and _is_tensor(b):
        p = _lambda_power_of(restrict_to_stratum(rel, a.sym, a.stratum))
        if p is None:
            return Certificate("certify_hom", note="no reduction rule applies")
        red, checks = route_expand_target(d, g, a.stratum, a.sym, b.sym, False, p, conj)
        return Certificate("certify_hom", reduction=red, checks=checks)

    return Certificate("certify_hom", note="no reduction rule applies")


# ------------------------------------------------------- rule certificates
#
# Cached per integer key; certificates are immutable so sharing is safe.

@lru_cache(maxsize=None)
def cert_subcats(d, g, i, k, conj=False) -> Certificate:
    checks = []
    for a in range(k + 1):
        for b in range(a):
            checks.append(make_check("hv3", conj, dprime=d, j=i, a=a, b=b, not_leq=a > b, g=g))
    for b in range(k + 1):
        checks.append(make_check("hv1", conj, dprime=d, j=i, a=0, b=b, t=-k, g=g))
    for a in range(k):
        checks.append(make_check("hv2", conj, dprime=d, j=i, a=a, b=0, t=k, g=g))
    return Certificate("subcats", reduction=("tensor blocks and Lambda^-k generate an admissible subcategory",),
                       checks=tuple(checks))


@lru_cache(maxsize=None)
def cert_cw_orthogonal(d, g, i, k, conj=False) -> Certificate:
    checks = []
    for m in range(k):
        for ell in range(k + 1):
            checks.append(make_check("hv1", conj, dprime=d - 2 * m, j=i - m, a=0, b=ell, t=m - k, g=g))
    for ell in range(k + 1):
        for m in range(k):
            checks.append(make_check("hv2", conj, dprime=d - 2 * ell, j=i - ell, a=m, b=0, t=k, g=g))
    red = ("restrict to strata M_{i-m}(d-2m)",
           "Serre duality with omega restricted to M_{i-l}(d-2l)")
    return Certificate("cw_orthogonal", reduction=red, checks=tuple(checks))


@lru_cache(maxsize=None)
def cert_fbullet_to_d(d, g, i, k, conj=False) -> Certificate:
    checks = [make_check("hv2", conj, dprime=d - 2 * k, j=i - k, a=0, b=b, t=t, g=g)
              for b in range(k) for t in range(1, k - b + 1)]
    return Certificate("FbullettoD", reduction=("restrict to M_{i-k}(d-2k)",), checks=tuple(checks))


@lru_cache(maxsize=None)
def cert_ft_orthogonal(d, g, floor, k, kprime, p, conj=False) -> Certificate:
    red, checks = route_expand_source(d, g, floor, k, True, kprime, p, conj)
    return Certificate("ft_orthogonal", reduction=red, checks=checks)


@lru_cache(maxsize=None)
def cert_ft_mutation(d, g, i, k0, conj=False) -> Certificate:
    checks: list[Check] = []
    for k in range(k0, i):
        for n in range(k + 1, i + 1):
            _, cs = route_expand_source(d, g, i, k, True, n, n - k, conj)
            checks.extend(cs)
    red = ("twists D^k(-1,1-k) and D^n(-1,1-n) differ by Lambda^(n-k)",
           "restrict to stratum of D^n")
    return Certificate("ft_mutation", reduction=red, checks=tuple(checks))


@lru_cache(maxsize=None)
def cert_ft_reordering(d, g, i, k, j, kprime, jprime, conj=False) -> Certificate:
    red, checks = route_expand_target(d, g, i, k, kprime, True, j - jprime, conj)
    return Certificate("ft_reordering", reduction=red, checks=checks)


@lru_cache(maxsize=None)
def cert_bl_reordering(d, g, i, lam, k, lamp, kp, conj=False) -> Certificate:
    chk = make_check("bl", conj, dprime=d, j=i, a=lamp - 2 * kp, b=lam - 2 * k, t=k - kp, g=g)
    red = ("cancel common twist",
           f"RGamma((barF^{lam - 2 * k})^v (x) barF^{lamp - 2 * kp} (x) Lambda^{k - kp})")
    return Certificate("bl_reordering", reduction=red, checks=(chk,))
