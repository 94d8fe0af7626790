"""Coefficient-space norms, computed exactly from finite expansions.

The Lebesgue-equivalent norm integrates the square function

    S(x) = sum over entries of  amp^2 * 2**((2d/p) j) * [x in cube(index)]

whose p/2 power is piecewise constant on an arrangement of dyadic cubes.  The
arrangement is resolved exactly: all cube boundaries are integers at a common
finest resolution, and a recursive power-of-two subdivision splits only cells
that meet a cube boundary.  Cost is bounded by entry count times the scale
range, which is the intended desk-scale envelope.  The only rounding is in
floating-point powers and sums.

Besov-type norms are weighted l^a-in-(generator, shift), l^b-in-scale norms of
the amplitudes and involve no geometry at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence

from .field import CoeffField, order_key

_REL_SLACK = 1e-12


@dataclass(frozen=True)
class BesovParams:
    """Smoothness s, inner exponent a over (generator, shift), outer exponent b over scale."""

    s: float
    a: float
    b: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.s):
            raise ValueError("smoothness must be finite")
        if self.a < 1.0 or self.b < 1.0:
            raise ValueError("exponents must lie in [1, infinity]")


def _lp_of(values: Sequence[float], exponent: float) -> float:
    if not values:
        return 0.0
    if exponent == math.inf:
        return max(values)
    return math.fsum(v**exponent for v in values) ** (1.0 / exponent)


def sup_amplitude(field: CoeffField) -> float:
    """Largest |amplitude|; the norm of the weakest space in the scale."""
    return max((abs(a) for a in field.entries.values()), default=0.0)


def coeff_lp(field: CoeffField, exponent: float | None = None) -> float:
    """Plain l^p norm of the amplitude multiset (defaults to the field's p)."""
    e = field.p if exponent is None else float(exponent)
    return _lp_of([abs(a) for a in field.entries.values()], e)


def besov_norm(field: CoeffField, params: BesovParams) -> float:
    """Weighted l^a-per-scale, l^b-across-scales norm of the amplitudes.

    The scale weight is 2**(j * (s + d*(1/p - 1/a))).  At s = d*(1/a - 1/p)
    the weight vanishes and the norm is invariant under every scale and
    translation remap of the indices.
    """
    if not field.entries:
        return 0.0
    inv_a = 0.0 if params.a == math.inf else 1.0 / params.a
    weight_exp = params.s + field.dim * (1.0 / field.p - inv_a)
    by_scale: dict[int, list[float]] = {}
    for index, amp in field.entries.items():
        by_scale.setdefault(index.scale, []).append(abs(amp))
    terms = [
        2.0 ** (weight_exp * j) * _lp_of(amps, params.a)
        for j, amps in sorted(by_scale.items())
    ]
    return _lp_of(terms, params.b)


# ---------------------------------------------------------------------------
# Exact integration over the dyadic-cube arrangement.

# An item is an axis-aligned box with integer coordinates at a common
# resolution: (lo, side_exp, weight) describing [lo_c, lo_c + 2**side_exp) per
# axis.  Boxes of weight w contribute w to the accumulated layer value on the
# cells they cover.
_Item = tuple[tuple[int, ...], int, float]


def _square_items(field: CoeffField, resolution: int) -> list[_Item]:
    items: list[_Item] = []
    two_d_over_p = 2.0 * field.dim / field.p
    for index, amp in sorted(field.entries.items(), key=lambda kv: order_key(kv[0])):
        j, shift = index.scale, index.shift
        stretch = resolution - j - shift.denom_exp
        lo = tuple(n << stretch for n in shift.numerators)
        weight = amp * amp * 2.0 ** (two_d_over_p * j)
        items.append((lo, resolution - j, weight))
    return items


def _finest_resolution(fields: Sequence[CoeffField]) -> int:
    return max(
        index.scale + index.shift.denom_exp
        for f in fields
        for index in f.entries
    )


def _cell_integral(
    layers: Sequence[list[_Item]],
    dim: int,
    resolution: int,
    evaluate: Callable[[list[float]], float],
) -> float:
    """Integrate evaluate(S_1(x), ..., S_m(x)) dx over R^d exactly by cells.

    ``evaluate`` is called once per constant cell with the accumulated layer
    values; cells not covered by any box are skipped.
    """
    tagged = [
        (layer_id, lo, side_exp, weight)
        for layer_id, items in enumerate(layers)
        for (lo, side_exp, weight) in items
    ]
    if not tagged:
        return 0.0
    extent = max(
        max(hi, -lo_c)
        for (_, lo, side_exp, _) in tagged
        for lo_c, hi in ((c, c + (1 << side_exp)) for c in lo)
    )
    root_exp = max(1, (extent - 1).bit_length() + 1)
    root_lo = (-(1 << (root_exp - 1)),) * dim

    pieces: list[float] = []

    def recurse(cell_lo: tuple[int, ...], cell_exp: int, items, acc: list[float]) -> None:
        cell_hi = tuple(c + (1 << cell_exp) for c in cell_lo)
        acc = list(acc)
        partial = []
        for layer_id, lo, side_exp, weight in items:
            side = 1 << side_exp
            if any(lo[c] + side <= cell_lo[c] or cell_hi[c] <= lo[c] for c in range(dim)):
                continue
            if all(lo[c] <= cell_lo[c] and cell_hi[c] <= lo[c] + side for c in range(dim)):
                acc[layer_id] += weight
            else:
                partial.append((layer_id, lo, side_exp, weight))
        if not partial:
            if any(acc):
                value = evaluate(acc)
                if value != 0.0:
                    pieces.append(value * math.ldexp(1.0, (cell_exp - resolution) * dim))
            return
        # Boundaries are integral, so subdivision always terminates by side 1.
        half = 1 << (cell_exp - 1)
        for offsets in product((0, half), repeat=dim):
            child = tuple(c + o for c, o in zip(cell_lo, offsets))
            recurse(child, cell_exp - 1, partial, acc)

    recurse(root_lo, root_exp, tagged, [0.0] * len(layers))
    return math.fsum(pieces)


def lp_norm(field: CoeffField) -> float:
    """Lebesgue-equivalent norm: the L^{p/2} mass of the square function, rooted.

    Exactly the l^p amplitude norm when p == 2; for a single entry it equals
    the entry's |amplitude| at any scale, since the cube volume cancels the
    scale weight.
    """
    if not field.entries:
        return 0.0
    half_p = field.p / 2.0
    resolution = _finest_resolution([field])
    items = _square_items(field, resolution)
    total = _cell_integral(
        [items], field.dim, resolution, lambda acc: acc[0] ** half_p
    )
    return total ** (1.0 / field.p)


def cross_square_integral(f: CoeffField, g: CoeffField) -> float:
    """Integral of S_f(x) * S_g(x)**(p/2 - 1) dx on the shared cell arrangement.

    Requires p > 2; the p == 2 case is trivial and rejected here so callers
    state their convention explicitly.
    """
    if f.dim != g.dim or f.p != g.p:
        raise ValueError("fields must share dimension and reference exponent")
    if f.p <= 2.0:
        raise ValueError("cross-square integral requires p > 2")
    if not f.entries or not g.entries:
        return 0.0
    exponent = f.p / 2.0 - 1.0
    resolution = _finest_resolution([f, g])
    layers = [_square_items(f, resolution), _square_items(g, resolution)]

    def evaluate(acc: list[float]) -> float:
        sf, sg = acc
        if sf == 0.0 or sg == 0.0:
            return 0.0
        return sf * sg**exponent

    return _cell_integral(layers, f.dim, resolution, evaluate)


# ---------------------------------------------------------------------------
# Inequality checks at the coefficient level.


@dataclass(frozen=True)
class InterpolationCheck:
    lhs: float
    rhs: float
    holds: bool


def interpolation_check(
    field: CoeffField, q: float, r: float, alpha: float
) -> InterpolationCheck:
    """Convexity bound between the l^p amplitude norm and the sup amplitude.

    Checks besov_norm at (d*(1/r - 1/p), r, q) against
    coeff_lp**alpha * sup**(1-alpha).  In coefficient norms the Hoelder chain
    behind this bound has constant exactly 1, so ``holds`` is expected for
    every admissible input.
    """
    p, d = field.p, field.dim
    if not (2.0 <= p < q and p < r):
        raise ValueError("exponents must satisfy 2 <= p < q, r <= infinity")
    floor = max(p / r, p / q)
    if not (floor < alpha < 1.0):
        raise ValueError(f"alpha must lie in ({floor}, 1)")
    inv_r = 0.0 if r == math.inf else 1.0 / r
    lhs = besov_norm(field, BesovParams(d * (inv_r - 1.0 / p), r, q))
    rhs = coeff_lp(field) ** alpha * sup_amplitude(field) ** (1.0 - alpha)
    return InterpolationCheck(lhs, rhs, lhs <= rhs * (1.0 + _REL_SLACK))


@dataclass(frozen=True)
class EmbeddingChainReport:
    besov_0pp: float
    besov_0pq: float
    besov_srq: float
    lp: float
    amplitude_lp: float
    outer_monotone: bool
    inner_monotone: bool
    amplitude_ratio: float


def embedding_chain_check(field: CoeffField, q: float, r: float) -> EmbeddingChainReport:
    """Discrete embedding chain at the coefficient level.

    Verifies besov(0,p,q) <= besov(0,p,p) and besov(s_{p,r},r,q) <=
    besov(0,p,q), both exact consequences of l-exponent monotonicity, and
    reports the empirical ratio amplitude-l^p / lp_norm, whose uniform bound
    is not explicit and therefore only observed, never asserted.
    """
    p, d = field.p, field.dim
    if not (2.0 <= p <= q and p <= r):
        raise ValueError("exponents must satisfy 2 <= p <= q, r <= infinity")
    inv_r = 0.0 if r == math.inf else 1.0 / r
    b_pp = besov_norm(field, BesovParams(0.0, p, p))
    b_pq = besov_norm(field, BesovParams(0.0, p, q))
    b_rq = besov_norm(field, BesovParams(d * (inv_r - 1.0 / p), r, q))
    lp = lp_norm(field)
    clp = coeff_lp(field)
    return EmbeddingChainReport(
        besov_0pp=b_pp,
        besov_0pq=b_pq,
        besov_srq=b_rq,
        lp=lp,
        amplitude_lp=clp,
        outer_monotone=b_pq <= b_pp * (1.0 + _REL_SLACK),
        inner_monotone=b_rq <= b_pq * (1.0 + _REL_SLACK),
        amplitude_ratio=clp / lp if lp > 0.0 else 0.0,
    )


@dataclass(frozen=True)
class NormReport:
    """Bundle of norms for one field; besov entries echo their parameters.

    Admissibility of a requested (s, a, b) triple with respect to basis
    regularity has no coefficient-space counterpart, so requested triples are
    recorded verbatim and never filtered.
    """

    lp: float
    sup: float
    amplitude_lp: float
    besov: tuple[tuple[BesovParams, float], ...]


def norm_report(field: CoeffField, besov_params: Sequence[BesovParams] = ()) -> NormReport:
    return NormReport(
        lp=lp_norm(field),
        sup=sup_amplitude(field),
        amplitude_lp=coeff_lp(field),
        besov=tuple((prm, besov_norm(field, prm)) for prm in besov_params),
    )
