"""Picard-lattice arithmetic, moduli parameters and the Block/SOD data model."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence


class ParamError(ValueError):
    """Raised when (g, d) falls outside the supported construction range."""


@dataclass(frozen=True, order=True)
class LineBundle:
    """O(m, n) on a stable-pair space, stored as an integer pair."""

    m: int = 0
    n: int = 0

    def __add__(self, other: "LineBundle") -> "LineBundle":
        return LineBundle(self.m + other.m, self.n + other.n)

    def __sub__(self, other: "LineBundle") -> "LineBundle":
        return LineBundle(self.m - other.m, self.n - other.n)

    def __neg__(self) -> "LineBundle":
        return LineBundle(-self.m, -self.n)

    def __mul__(self, k: int) -> "LineBundle":
        return LineBundle(self.m * k, self.n * k)

    __rmul__ = __mul__

    def pair(self) -> tuple[int, int]:
        return (self.m, self.n)

    def is_trivial(self) -> bool:
        return self.m == 0 and self.n == 0


TRIVIAL = LineBundle(0, 0)
LAMBDA = LineBundle(0, -1)


def lb_combine(a: LineBundle, b: LineBundle) -> LineBundle:
    return a + b


def theta(g: int) -> LineBundle:
    return LineBundle(1, g - 1)


# the odd-space generator has the same coordinates
Z = theta


def theta_lambda(g: int, x: int, y: int) -> LineBundle:
    """theta^x Lambda^y as O(m, n)."""
    return theta(g) * x + LAMBDA * y


def theta_lambda_coords(lb: LineBundle, g: int) -> tuple[int, int]:
    """Inverse of theta_lambda: returns (x, y) with lb = theta^x Lambda^y."""
    x = lb.m
    return x, x * (g - 1) - lb.n


def lambda_power(n: int) -> LineBundle:
    return LAMBDA * n


def omega(g: int, d: int) -> LineBundle:
    """Canonical bundle of M_i(d); independent of i."""
    return LineBundle(-3, 4 - d - g)


def omega_restricted(g: int, d: int, ell: int) -> LineBundle:
    """omega of M_i(d) restricted to the stratum M_{i-ell}(d-2ell)."""
    return LineBundle(-3, 4 - d - g + 3 * ell)


@dataclass(frozen=True)
class ModuliParams:
    g: int
    d: int
    i_d: int
    m: int
    m_1: int
    m_2: int
    v: int
    proven: bool
    conjectural: bool = False

    @property
    def size(self) -> int:
        # d + g - 1 = 3 i_d + m
        return self.d + self.g - 1

    def t1(self) -> LineBundle:
        return LineBundle(1, self.i_d - self.m_2)

    def t2(self) -> LineBundle:
        return LineBundle(2, 2 * self.i_d - self.m_2 - self.m_1)

    def megablock_twist(self, r: int) -> LineBundle:
        return (TRIVIAL, self.t1(), self.t2())[r]

    def megablock_bound(self, r: int) -> int:
        return (self.i_d - self.m_2, self.i_d - self.m_1, self.i_d)[r]


def derive_params(g: int, d: int, conjectural: bool = False) -> ModuliParams:
    if g < 2:
        raise ParamError(f"genus must be at least 2, got {g}")
    if d <= 2:
        raise ParamError(f"degree must exceed 2, got {d}")
    s = d + g - 1
    i_d = -(-s // 3) - 1
    m = s - 3 * i_d
    v = (d - 1) // 2
    if i_d > v and not conjectural:
        raise ParamError(f"i_d={i_d} exceeds v={v} for (g={g}, d={d})")
    return ModuliParams(
        g=g, d=d, i_d=i_d, m=m,
        m_1=1 if m <= 1 else 0,
        m_2=1 if m <= 2 else 0,
        v=v,
        proven=d <= 2 * g and i_d <= v,
        conjectural=conjectural,
    )


# kernel families
TENSOR_DUAL_F = "TensorDualF"
BAR_TENSOR_DUAL_F = "BarTensorDualF"
TENSOR_F = "TensorF"
BAR_TENSOR_F = "BarTensorF"
TENSOR_E = "TensorE"
BAR_TENSOR_E = "BarTensorE"
D_SHEAF = "DSheaf"
STRUCTURE_SHEAF = "StructureSheaf"
MUTATED = "Mutated"

FAMILIES = (TENSOR_DUAL_F, BAR_TENSOR_DUAL_F, TENSOR_F, BAR_TENSOR_F, TENSOR_E,
            BAR_TENSOR_E, D_SHEAF, STRUCTURE_SHEAF, MUTATED)

_BAR_PAIRS = {
    TENSOR_DUAL_F: BAR_TENSOR_DUAL_F,
    BAR_TENSOR_DUAL_F: TENSOR_DUAL_F,
    TENSOR_F: BAR_TENSOR_F,
    BAR_TENSOR_F: TENSOR_F,
    TENSOR_E: BAR_TENSOR_E,
    BAR_TENSOR_E: TENSOR_E,
}

IN_K = "InK"
IN_K_DUAL = "InKDual"
DESCENDS = "DescendsToN"
ANNOTATIONS = (None, IN_K, IN_K_DUAL, DESCENDS)


@dataclass(frozen=True)
class Block:
    """Symbolic label of a Fourier-Mukai block."""

    family: str
    sym: int
    twist: LineBundle = TRIVIAL
    ambient: str = "M"
    serre_twist: int = 0
    dual: bool = False
    annotation: str | None = None
    stratum: int | None = None  # stability index i of D^k_i

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.sym < 0:
            raise ValueError("sym power must be non-negative")
        if self.annotation not in ANNOTATIONS:
            raise ValueError(f"unknown annotation {self.annotation!r}")
        if self.family == D_SHEAF:
            if self.stratum is None or not 0 <= self.sym <= self.stratum:
                raise ValueError("D-sheaf D^k_i needs 0 <= k <= i")

    @property
    def barred(self) -> bool:
        return self.family.startswith("Bar")

    def with_twist(self, twist: LineBundle) -> "Block":
        return replace(self, twist=twist)

    def twisted(self, lb: LineBundle) -> "Block":
        return replace(self, twist=self.twist + lb)

    def annotated(self, annotation: str | None) -> "Block":
        return replace(self, annotation=annotation)


def tensor_block(g: int, x: int, y: int, z: int, bar: bool = False, ambient: str = "M",
                 annotation: str | None = None) -> Block:
    """theta^x Lambda^y (bar) F-dual^z."""
    fam = BAR_TENSOR_DUAL_F if bar else TENSOR_DUAL_F
    return Block(fam, z, theta_lambda(g, x, y), ambient=ambient, annotation=annotation)


def d_block(k: int, i: int, twist: LineBundle = TRIVIAL, ambient: str = "M") -> Block:
    return Block(D_SHEAF, k, twist, ambient=ambient, stratum=i)


def dual_block(b: Block, g: int) -> Block:
    """Derived dual of a tensor block, toggling the bar.

    For theta^x Lambda^y F-dual^z the rule is x -> -x, y -> z - y.  For the
    E and F families (twists are pure Lambda powers p) it is p -> -p - z.
    """
    if b.family in (TENSOR_DUAL_F, BAR_TENSOR_DUAL_F):
        x, y = theta_lambda_coords(b.twist, g)
        tw = theta_lambda(g, -x, b.sym - y)
    elif b.family in (TENSOR_F, BAR_TENSOR_F, TENSOR_E, BAR_TENSOR_E):
        if b.twist.m != 0:
            raise ValueError("E/F duals need a pure Lambda twist")
        p = -b.twist.n
        tw = lambda_power(-p - b.sym)
    else:
        raise ValueError(f"no closed-form dual for family {b.family}")
    return replace(b, family=_BAR_PAIRS[b.family], twist=tw,
                   serre_twist=-b.serre_twist, dual=not b.dual)


def restrict_to_stratum(lb: LineBundle, kprime: int, floor_t: int) -> int | LineBundle:
    """Restriction of O(m, n) along the stratum of D^{k'}_{floor_t}.

    At the top stratum the fibers are projective spaces and the result is the
    Lambda power; otherwise it is a line bundle on M_{i-k'}(d-2k').
    """
    if not 0 <= kprime <= floor_t:
        raise IndexError(f"stratum index {kprime} outside [0, {floor_t}]")
    if kprime == floor_t:
        return -lb.n - lb.m * (1 - kprime)
    return LineBundle(lb.m, lb.n - lb.m * kprime)


def fiber_equivalent(a: LineBundle, b: LineBundle, k: int) -> bool:
    """Twists of a top-stratum D^k_k agree iff their fiber restrictions agree."""
    return restrict_to_stratum(a, k, k) == restrict_to_stratum(b, k, k)


Span = tuple[int, int, str]


@dataclass(frozen=True)
class SOD:
    blocks: tuple[Block, ...]
    megablocks: tuple[Span, ...] = ()
    provenance: str = ""

    def __post_init__(self):
        pos = 0
        for start, end, _label in self.megablocks:
            if start != pos or end < start:
                raise ValueError("megablock spans must partition the blocks")
            pos = end
        if self.megablocks and pos != len(self.blocks):
            raise ValueError("megablock spans must cover every block")

    @classmethod
    def from_groups(cls, groups: Iterable[tuple[str, Sequence[Block]]], provenance: str = "") -> "SOD":
        blocks: list[Block] = []
        spans: list[Span] = []
        for label, bs in groups:
            start = len(blocks)
            blocks.extend(bs)
            spans.append((start, len(blocks), label))
        return cls(tuple(blocks), tuple(spans), provenance)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def labels(self) -> list[str]:
        return [lab for _, _, lab in self.megablocks]

    def megablock(self, label: str) -> tuple[Block, ...]:
        for start, end, lab in self.megablocks:
            if lab == label:
                return self.blocks[start:end]
        raise KeyError(label)

    def groups(self) -> list[tuple[str, tuple[Block, ...]]]:
        return [(lab, self.blocks[s:e]) for s, e, lab in self.megablocks]

    def twisted(self, lb: LineBundle, provenance: str | None = None) -> "SOD":
        return SOD(tuple(b.twisted(lb) for b in self.blocks), self.megablocks,
                   self.provenance if provenance is None else provenance)

    def without(self, index: int) -> "SOD":
        """Copy with one block removed; spans shrink accordingly."""
        groups = []
        pos = 0
        for lab, bs in self.groups():
            keep = [b for j, b in enumerate(bs) if pos + j != index]
            pos += len(bs)
            groups.append((lab, keep))
        if not self.megablocks:
            groups = [("all", [b for j, b in enumerate(self.blocks) if j != index])]
        return SOD.from_groups(groups, self.provenance)
