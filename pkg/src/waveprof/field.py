"""Functions represented as finite wavelet-coefficient expansions.

A field is a finite association from wavelet indices to nonzero real
amplitudes together with an ambient dimension and a reference exponent p.
Index bookkeeping is exact; only amplitudes are floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .dyadic import DyadicAffine, WaveletIndex, act_on_index


def order_key(index: WaveletIndex) -> tuple:
    """Deterministic total order on indices: scale, shift value, generator."""
    shift = tuple(Fraction(n, 1 << index.shift.denom_exp) for n in index.shift.numerators)
    return (index.scale, shift, index.gen)


@dataclass(frozen=True)
class CoeffField:
    """Finite wavelet expansion with dimension ``dim`` and reference exponent ``p``."""

    dim: int
    p: float
    entries: Mapping[WaveletIndex, float]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")
        p = float(self.p)
        if not (2.0 <= p < math.inf):
            raise ValueError("reference exponent p must satisfy 2 <= p < infinity")
        clean: dict[WaveletIndex, float] = {}
        for index, amp in dict(self.entries).items():
            if index.dim != self.dim:
                raise ValueError("index dimension does not match field dimension")
            value = float(amp)
            if value == 0.0:
                raise ValueError("zero amplitudes must not be stored")
            if not math.isfinite(value):
                raise ValueError("amplitudes must be finite")
            clean[index] = value
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "entries", MappingProxyType(clean))

    @classmethod
    def empty(cls, dim: int, p: float) -> CoeffField:
        return cls(dim, p, {})

    @classmethod
    def from_items(
        cls, dim: int, p: float, items: Iterable[tuple[WaveletIndex, float]]
    ) -> CoeffField:
        out: dict[WaveletIndex, float] = {}
        for index, amp in items:
            if index in out:
                raise ValueError(f"duplicate index {index}")
            out[index] = amp
        return cls(dim, p, out)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[WaveletIndex]:
        return iter(self.entries)

    @property
    def is_lattice(self) -> bool:
        return all(index.on_lattice for index in self.entries)

    def amplitude(self, index: WaveletIndex) -> float:
        return self.entries.get(index, 0.0)

    def without(self, index: WaveletIndex) -> CoeffField:
        """Copy with one component removed."""
        remaining = {k: v for k, v in self.entries.items() if k != index}
        return CoeffField(self.dim, self.p, remaining)


@dataclass(frozen=True)
class RankedOrder:
    """Entries sorted by decreasing |amplitude| with deterministic tie-breaking."""

    items: tuple[tuple[WaveletIndex, float], ...] = dc_field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[tuple[WaveletIndex, float]]:
        return iter(self.items)

    def __getitem__(self, position: int) -> tuple[WaveletIndex, float]:
        return self.items[position]


def transform(field: CoeffField, tau: DyadicAffine) -> CoeffField:
    """Remap every index through ``tau``; amplitudes and (dim, p) are unchanged."""
    if tau.dim != field.dim:
        raise ValueError("dimension mismatch")
    return CoeffField(
        field.dim,
        field.p,
        {act_on_index(tau, index): amp for index, amp in field.entries.items()},
    )


def combine(f: CoeffField, g: CoeffField, alpha: float = 1.0, beta: float = 1.0) -> CoeffField:
    """Coefficient-wise alpha*f + beta*g; exact float zeros are dropped."""
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    if f.p != g.p:
        raise ValueError("reference exponent mismatch")
    out: dict[WaveletIndex, float] = {}
    for index, amp in f.entries.items():
        out[index] = alpha * amp
    for index, amp in g.entries.items():
        out[index] = out.get(index, 0.0) + beta * amp
    return CoeffField(f.dim, f.p, {k: v for k, v in out.items() if v != 0.0})


def scale(field: CoeffField, factor: float) -> CoeffField:
    if factor == 0.0:
        return CoeffField.empty(field.dim, field.p)
    return CoeffField(field.dim, field.p, {k: factor * v for k, v in field.entries.items()})


def rank(field: CoeffField) -> RankedOrder:
    """Full ordering by decreasing |amplitude|, ties by scale, shift, generator."""
    ordered = sorted(field.entries.items(), key=lambda kv: (-abs(kv[1]),) + order_key(kv[0]))
    return RankedOrder(tuple(ordered))


def split_top(field: CoeffField, count: int) -> tuple[CoeffField, CoeffField]:
    """Split into the ``count`` largest components and the remainder.

    The first output keeps the top-ranked entries (all of them when ``count``
    exceeds the entry count), the second is the exact complement, so together
    they recombine to the input.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    ordered = rank(field)
    head = dict(ordered.items[:count])
    tail = {k: v for k, v in field.entries.items() if k not in head}
    return (
        CoeffField(field.dim, field.p, head),
        CoeffField(field.dim, field.p, tail),
    )
