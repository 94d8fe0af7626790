"""Exact arithmetic for the dyadic index lattice and its symmetry maps.

Everything here is integer-valued or dyadic-rational and therefore exact:
scale/translation maps of the form ``x -> 2**j * x - k`` compose, invert and
act on wavelet indices without any floating point.  Floats appear only in
derived magnitudes (Euclidean norms, cube volumes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence


def _normalize(numerators: tuple[int, ...], denom_exp: int) -> tuple[tuple[int, ...], int]:
    # Unique representation: either denom_exp == 0 or some numerator is odd.
    while denom_exp > 0 and all(n % 2 == 0 for n in numerators):
        numerators = tuple(n // 2 for n in numerators)
        denom_exp -= 1
    return numerators, denom_exp


@dataclass(frozen=True)
class DyadicRationalVec:
    """Vector whose components are ``numerators / 2**denom_exp``, in lowest terms."""

    numerators: tuple[int, ...]
    denom_exp: int = 0

    def __post_init__(self) -> None:
        nums = tuple(int(c) for c in self.numerators)
        if len(nums) < 1:
            raise ValueError("dimension must be at least 1")
        if self.denom_exp < 0:
            raise ValueError("denom_exp must be nonnegative")
        nums, exp = _normalize(nums, int(self.denom_exp))
        object.__setattr__(self, "numerators", nums)
        object.__setattr__(self, "denom_exp", exp)

    @classmethod
    def zero(cls, dim: int) -> DyadicRationalVec:
        return cls((0,) * dim, 0)

    @classmethod
    def from_ints(cls, components: Iterable[int]) -> DyadicRationalVec:
        return cls(tuple(int(c) for c in components), 0)

    @property
    def dim(self) -> int:
        return len(self.numerators)

    @property
    def is_integral(self) -> bool:
        return self.denom_exp == 0

    def as_floats(self) -> tuple[float, ...]:
        return tuple(math.ldexp(c, -self.denom_exp) for c in self.numerators)

    def euclidean_norm(self) -> float:
        return math.hypot(*self.as_floats())

    def scaled_by_pow2(self, exponent: int) -> DyadicRationalVec:
        """Exact multiplication of the value by ``2**exponent``."""
        if exponent >= 0:
            return DyadicRationalVec(tuple(c << exponent for c in self.numerators), self.denom_exp)
        return DyadicRationalVec(self.numerators, self.denom_exp - exponent)

    def __add__(self, other: DyadicRationalVec) -> DyadicRationalVec:
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        exp = max(self.denom_exp, other.denom_exp)
        nums = tuple(
            (a << (exp - self.denom_exp)) + (b << (exp - other.denom_exp))
            for a, b in zip(self.numerators, other.numerators)
        )
        return DyadicRationalVec(nums, exp)

    def __neg__(self) -> DyadicRationalVec:
        return DyadicRationalVec(tuple(-c for c in self.numerators), self.denom_exp)

    def __sub__(self, other: DyadicRationalVec) -> DyadicRationalVec:
        return self + (-other)


@dataclass(frozen=True)
class WaveletIndex:
    """A basis-coefficient address (generator, scale, shift).

    Lattice indices carry integral shifts; profile-frame indices may carry
    dyadic-rational shifts.
    """

    gen: int
    scale: int
    shift: DyadicRationalVec

    def __post_init__(self) -> None:
        top = (1 << self.shift.dim) - 1
        if not 1 <= self.gen <= top:
            raise ValueError(f"generator {self.gen} out of range [1, {top}]")

    @property
    def dim(self) -> int:
        return self.shift.dim

    @property
    def on_lattice(self) -> bool:
        return self.shift.is_integral


@dataclass(frozen=True)
class DyadicCube:
    """The half-open cube {x : 2**scale * x - corner in [0,1)^d}, volume 2**(-d*scale)."""

    scale: int
    corner: DyadicRationalVec

    @property
    def dim(self) -> int:
        return self.corner.dim

    def volume(self) -> float:
        return math.ldexp(1.0, -self.dim * self.scale)

    def bounds(self) -> tuple[tuple[float, float], ...]:
        lo = self.corner.scaled_by_pow2(-self.scale)
        return tuple(
            (a, a + math.ldexp(1.0, -self.scale)) for a in lo.as_floats()
        )

    def contains(self, point: Sequence[float]) -> bool:
        return all(lo <= x < hi for x, (lo, hi) in zip(point, self.bounds()))


@dataclass(frozen=True)
class DyadicAffine:
    """The map tau(x) = 2**scale * x - shift on R^d."""

    scale: int
    shift: DyadicRationalVec

    @classmethod
    def identity(cls, dim: int) -> DyadicAffine:
        return cls(0, DyadicRationalVec.zero(dim))

    @classmethod
    def from_lattice(cls, scale: int, shift: Iterable[int]) -> DyadicAffine:
        return cls(scale, DyadicRationalVec.from_ints(shift))

    @property
    def dim(self) -> int:
        return self.shift.dim

    @property
    def is_identity(self) -> bool:
        return self.scale == 0 and all(c == 0 for c in self.shift.numerators)

    def apply(self, point: Sequence[float]) -> tuple[float, ...]:
        shift = self.shift.as_floats()
        return tuple(math.ldexp(x, self.scale) - k for x, k in zip(point, shift))


def compose(inner: DyadicAffine, outer: DyadicAffine) -> DyadicAffine:
    """The map sending x to outer(inner(x))."""
    if inner.dim != outer.dim:
        raise ValueError("dimension mismatch")
    return DyadicAffine(
        inner.scale + outer.scale,
        inner.shift.scaled_by_pow2(outer.scale) + outer.shift,
    )


def invert(tau: DyadicAffine) -> DyadicAffine:
    """The map sigma with compose(tau, sigma) = compose(sigma, tau) = identity."""
    return DyadicAffine(-tau.scale, (-tau.shift).scaled_by_pow2(-tau.scale))


def magnitude(tau: DyadicAffine) -> float:
    """Size of a map: |scale| plus the Euclidean length of its fixed-frame offset.

    Zero exactly for the identity; diverges along a sequence of maps iff the
    scale exponents or the rescaled offsets do.
    """
    return abs(tau.scale) + tau.shift.scaled_by_pow2(-tau.scale).euclidean_norm()


def act_on_index(tau: DyadicAffine, index: WaveletIndex) -> WaveletIndex:
    """Index of the transformed basis element; amplitudes are untouched.

    Satisfies act_on_index(compose(t1, t2), idx) ==
    act_on_index(t1, act_on_index(t2, idx)).
    """
    if tau.dim != index.dim:
        raise ValueError("dimension mismatch")
    return WaveletIndex(
        index.gen,
        tau.scale + index.scale,
        tau.shift.scaled_by_pow2(index.scale) + index.shift,
    )


def cube_of(index: WaveletIndex) -> DyadicCube:
    """Localization cube of a basis element."""
    return DyadicCube(index.scale, index.shift)


LatticeParams = tuple[int, tuple[int, ...]]


def orthogonality_gap(a: LatticeParams, b: LatticeParams) -> float:
    """Separation of two (scale, shift) parameter pairs on the integer lattice.

    Equals the magnitude of the relative map carrying frame ``a`` onto frame
    ``b``; two parameter sequences are asymptotically orthogonal iff this
    quantity diverges along them.
    """
    ja, ka = int(a[0]), tuple(int(c) for c in a[1])
    jb, kb = int(b[0]), tuple(int(c) for c in b[1])
    if len(ka) != len(kb):
        raise ValueError("dimension mismatch")
    rel = DyadicRationalVec.from_ints(kb).scaled_by_pow2(ja - jb) - DyadicRationalVec.from_ints(ka)
    return abs(ja - jb) + rel.euclidean_norm()


def relative_map(anchor: LatticeParams, target: LatticeParams) -> DyadicAffine:
    """The constant-candidate map compose(invert(anchor), target) in lattice frames.

    For anchor (j0, k0) and target (j, k) this is the map with scale j - j0 and
    shift k - 2**(j - j0) * k0; it is the map tau with
    compose(affine(anchor), tau) == affine(target).
    """
    j0, k0 = int(anchor[0]), anchor[1]
    j1, k1 = int(target[0]), target[1]
    delta = j1 - j0
    shift = DyadicRationalVec.from_ints(k1) - DyadicRationalVec.from_ints(k0).scaled_by_pow2(delta)
    return DyadicAffine(delta, shift)
