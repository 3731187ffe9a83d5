"""GIT weights, window membership and quasi-BPS membership."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .lattice import (
    BAR_TENSOR_DUAL_F, BAR_TENSOR_F, D_SHEAF, MUTATED, STRUCTURE_SHEAF, TENSOR_DUAL_F,
    TENSOR_F, Block, LineBundle, theta_lambda_coords,
)


@dataclass(frozen=True)
class WeightInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError("empty weight interval")

    def shift(self, s) -> "WeightInterval":
        return WeightInterval(self.lo + s, self.hi + s)

    def within(self, lo, hi) -> bool:
        return Fraction(lo) <= self.lo and self.hi <= Fraction(hi)


def wall_weight(lb: LineBundle, i: int) -> int:
    return lb.n + lb.m * (1 - i)


def tensor_coords(block: Block, g: int) -> tuple[int, int, int]:
    """(x, y, z) with block = theta^x Lambda^y F-dual^z.

    F^z blocks are rewritten through F-dual^z = Lambda^-z F^z.
    """
    fam = block.family
    if fam in (TENSOR_DUAL_F, BAR_TENSOR_DUAL_F, STRUCTURE_SHEAF, MUTATED):
        x, y = theta_lambda_coords(block.twist, g)
        return x, y, block.sym
    if fam in (TENSOR_F, BAR_TENSOR_F):
        x, y = theta_lambda_coords(block.twist, g)
        return x, y + block.sym, block.sym
    raise ValueError(f"no weight interval for family {fam}")


def weight_interval(block: Block, g: int) -> WeightInterval:
    if block.family == D_SHEAF:
        if not block.twist.is_trivial():
            raise ValueError("weights of twisted D-sheaves are not tabulated")
        return WeightInterval(0, block.sym)
    _x, y, z = tensor_coords(block, g)
    return WeightInterval(-y, z - y)


def in_window(iv: WeightInterval, lo, width) -> bool:
    lo, width = Fraction(lo), Fraction(width)
    if width <= 0:
        raise ValueError("window width must be positive")
    return lo <= iv.lo and iv.hi < lo + width


def in_closed(iv: WeightInterval, lo, hi) -> bool:
    return iv.within(lo, hi)


def quasi_bps_bounds(w: int, g: int) -> tuple[Fraction, Fraction]:
    half = Fraction(g - 1, 2)
    shift = Fraction(w, 2)
    return -half - shift, half - shift


def quasi_bps_member(block: Block, w: int, g: int) -> bool:
    lo, hi = quasi_bps_bounds(w, g)
    return weight_interval(block, g).within(lo, hi)


def descent_weight(block: Block, g: int) -> int:
    _x, y, z = tensor_coords(block, g)
    return 2 * y - z


def descends(block: Block, g: int) -> bool:
    return descent_weight(block, g) == 0


def window_2g(g: int) -> tuple[int, int]:
    """(lo, width) of the stack window for d = 2g."""
    return -(g // 2), g


def little_window(g: int) -> tuple[Fraction, Fraction]:
    return Fraction(-(g - 1), 2), Fraction(g - 1, 2)
