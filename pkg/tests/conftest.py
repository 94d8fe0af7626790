from __future__ import annotations

import math

import numpy as np
from hypothesis import settings

from waveprof.dyadic import DyadicAffine, DyadicRationalVec, WaveletIndex
from waveprof.field import CoeffField

settings.register_profile("det", deadline=None, derandomize=True, max_examples=50)
settings.load_profile("det")


def lattice_index(gen: int, scale: int, *shift: int) -> WaveletIndex:
    return WaveletIndex(gen, scale, DyadicRationalVec.from_ints(shift))


def single_entry_field(dim: int, p: float, amp: float, gen=1, scale=0, shift=None) -> CoeffField:
    shift = shift if shift is not None else (0,) * dim
    return CoeffField.from_items(dim, p, [(WaveletIndex(gen, scale, DyadicRationalVec.from_ints(shift)), amp)])


def random_field(
    rng: np.random.Generator,
    dim: int = 1,
    p: float = 4.0,
    max_entries: int = 12,
    scale_lo: int = -3,
    scale_hi: int = 3,
    shift_bound: int = 8,
    denom_exp_max: int = 0,
) -> CoeffField:
    count = int(rng.integers(1, max_entries + 1))
    entries: dict[WaveletIndex, float] = {}
    while len(entries) < count:
        gen = int(rng.integers(1, 2**dim))
        scale = int(rng.integers(scale_lo, scale_hi + 1))
        exp = int(rng.integers(0, denom_exp_max + 1))
        nums = tuple(int(rng.integers(-shift_bound << exp, (shift_bound << exp) + 1)) for _ in range(dim))
        index = WaveletIndex(gen, scale, DyadicRationalVec(nums, exp))
        amp = float(rng.uniform(0.25, 2.0)) * (1.0 if rng.uniform() < 0.5 else -1.0)
        entries[index] = amp
    return CoeffField(dim, p, entries)


def random_affine(
    rng: np.random.Generator,
    dim: int = 1,
    scale_bound: int = 3,
    shift_bound: int = 8,
    denom_exp_max: int = 2,
) -> DyadicAffine:
    scale = int(rng.integers(-scale_bound, scale_bound + 1))
    exp = int(rng.integers(0, denom_exp_max + 1))
    nums = tuple(int(rng.integers(-shift_bound << exp, (shift_bound << exp) + 1)) for _ in range(dim))
    return DyadicAffine(scale, DyadicRationalVec(nums, exp))


def grid_lp_oracle(field: CoeffField) -> float:
    """Brute-force Riemann sum of the square function on the finest dyadic grid.

    Independent of the library's cell-tree path: renders every cube onto a
    dense numpy grid at the finest resolution present and sums cell values.
    """
    if not field.entries:
        return 0.0
    resolution = max(i.scale + i.shift.denom_exp for i in field.entries)
    boxes = []
    for index, amp in sorted(field.entries.items(), key=lambda kv: str(kv[0])):
        stretch = resolution - index.scale - index.shift.denom_exp
        lo = tuple(n << stretch for n in index.shift.numerators)
        side = 1 << (resolution - index.scale)
        weight = amp * amp * 2.0 ** (2.0 * field.dim / field.p * index.scale)
        boxes.append((lo, side, weight))
    mins = [min(b[0][axis] for b in boxes) for axis in range(field.dim)]
    maxs = [max(b[0][axis] + b[1] for b in boxes) for axis in range(field.dim)]
    grid = np.zeros(tuple(hi - lo for lo, hi in zip(mins, maxs)))
    for lo, side, weight in boxes:
        sel = tuple(slice(lo[axis] - mins[axis], lo[axis] - mins[axis] + side) for axis in range(field.dim))
        grid[sel] += weight
    cell_volume = math.ldexp(1.0, -resolution * field.dim)
    total = float((grid ** (field.p / 2.0)).sum()) * cell_volume
    return total ** (1.0 / field.p)
