"""Hodge polynomials of symmetric products and Hochschild-homology ledgers."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterable, Mapping

from .lattice import FAMILIES, SOD, ModuliParams


@dataclass(frozen=True)
class HodgePoly:
    """Coefficients (p, q) -> h^{p,q}; zero entries are dropped."""

    coeffs: tuple[tuple[tuple[int, int], int], ...]

    @classmethod
    def from_dict(cls, d: Mapping[tuple[int, int], int]) -> "HodgePoly":
        return cls(tuple(sorted((k, v) for k, v in d.items() if v)))

    def as_dict(self) -> dict[tuple[int, int], int]:
        return dict(self.coeffs)

    def __getitem__(self, pq: tuple[int, int]) -> int:
        return self.as_dict().get(pq, 0)

    def is_symmetric(self) -> bool:
        d = self.as_dict()
        return all(d.get((q, p), 0) == v for (p, q), v in d.items())

    def total(self) -> int:
        return sum(v for _, v in self.coeffs)

    def hh(self) -> "HHVector":
        out: dict[int, int] = {}
        for (p, q), v in self.coeffs:
            out[q - p] = out.get(q - p, 0) + v
        return HHVector.from_dict(out)


@dataclass(frozen=True)
class HHVector:
    dims: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_dict(cls, d: Mapping[int, int]) -> "HHVector":
        return cls(tuple(sorted((n, v) for n, v in d.items() if v)))

    def as_dict(self) -> dict[int, int]:
        return dict(self.dims)

    def __add__(self, other: "HHVector") -> "HHVector":
        out = self.as_dict()
        for n, v in other.dims:
            out[n] = out.get(n, 0) + v
        return HHVector.from_dict(out)

    def __sub__(self, other: "HHVector") -> "HHVector":
        out = self.as_dict()
        for n, v in other.dims:
            out[n] = out.get(n, 0) - v
        return HHVector.from_dict(out)

    def scale(self, k: int) -> "HHVector":
        return HHVector.from_dict({n: k * v for n, v in self.dims})

    def total(self) -> int:
        return sum(v for _, v in self.dims)

    def is_mirror_symmetric(self) -> bool:
        d = self.as_dict()
        return all(d.get(-n, 0) == v for n, v in d.items())


ZERO = HHVector()


@lru_cache(maxsize=None)
def sym_hodge(g: int, n: int) -> HodgePoly:
    """Coefficient of t^n in (1+xt)^g (1+yt)^g / ((1-t)(1-xyt))."""
    if g < 0 or n < 0:
        raise ValueError("need g >= 0 and n >= 0")
    out: dict[tuple[int, int], int] = {}
    # t^a from (1+xt)^g, t^b from (1+yt)^g, t^c from 1/(1-xyt), rest from 1/(1-t)
    for a in range(min(g, n) + 1):
        for b in range(min(g, n - a) + 1):
            ca = comb(g, a) * comb(g, b)
            for c in range(n - a - b + 1):
                key = (a + c, b + c)
                out[key] = out.get(key, 0) + ca
    return HodgePoly.from_dict(out)


@lru_cache(maxsize=None)
def hh_sym(g: int, n: int) -> HHVector:
    return sym_hodge(g, n).hh()


def projective_space_hh(dim: int) -> HHVector:
    return HHVector.from_dict({0: dim + 1})


def hh_of_syms(syms: Iterable[int], g: int) -> HHVector:
    total = ZERO
    for s in syms:
        total = total + hh_sym(g, s)
    return total


def hh_of_blocks(sod: SOD, g: int) -> HHVector:
    # every block family is a Fourier-Mukai image of D^b(Sym^k C)
    for b in sod.blocks:
        if b.family not in FAMILIES:
            raise ValueError(f"block family {b.family} does not resolve to a Sym power")
    return hh_of_syms((b.sym for b in sod.blocks), g)


def hh_windows_chain(params: ModuliParams) -> HHVector:
    g, d = params.g, params.d
    total = projective_space_hh(d + g - 2)
    for i in range(1, params.i_d + 1):
        total = total + hh_sym(g, i).scale(d + g - 3 * i - 1)
    return total


@dataclass(frozen=True)
class HHReport:
    label: str
    reference: HHVector
    observed: HHVector

    @property
    def residual(self) -> HHVector:
        return self.observed - self.reference

    @property
    def passed(self) -> bool:
        return self.reference == self.observed


def verify_hh(reference: HHVector, sod: SOD, g: int, label: str = "") -> HHReport:
    return HHReport(label or sod.provenance, reference, hh_of_blocks(sod, g))
