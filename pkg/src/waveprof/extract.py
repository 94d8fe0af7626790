"""Profile extraction for sequences of lattice coefficient fields.

The extractor repeatedly removes, for every retained sequence index, the
largest remaining coefficient, then sorts the removed components into groups
whose scale/translation parameters either stay at a fixed relative position
(same group) or separate (new group).  Limits over the sequence are replaced
by auditable finite-tail decisions: means and exact-constancy checks over a
configurable tail window, with every discarded index and every ambiguous
decision recorded as a diagnostic.

All index bookkeeping is exact, so grouping decisions are equality tests, not
tolerance tests.  Sequence indices n are 1-based labels; group positions are
0-based list positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

from .dyadic import (
    DyadicAffine,
    LatticeParams,
    WaveletIndex,
    magnitude,
    orthogonality_gap,
    relative_map,
)
from .field import CoeffField, combine, rank, transform
from .norms import (
    BesovParams,
    besov_norm,
    cross_square_integral,
    lp_norm,
    sup_amplitude,
)

STABILITY_TOL = 1e-9


@dataclass(frozen=True)
class LpInput:
    """Inputs measured in the Lebesgue-equivalent norm with exponent p."""

    p: float


@dataclass(frozen=True)
class BesovInput:
    """Inputs measured in the scale-invariant Besov norm with exponents (a, q)."""

    p: float
    a: float
    q: float


InputSpace = LpInput | BesovInput


@dataclass(frozen=True)
class ExtractConfig:
    """Extraction thresholds and the input/remainder measurement spaces.

    ``remainder_space`` is (r, q) in Lebesgue mode and (b, r) in Besov mode;
    in Besov mode the remainder exponents must satisfy b > a, r >= q and
    r >= (b/a) * q.
    """

    max_iterations: int
    tail_window: int
    conv_tol: float
    bound_threshold: float
    stop_epsilon: float
    input_space: InputSpace
    remainder_space: tuple[float, float]

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.tail_window < 2:
            raise ValueError("tail_window must be at least 2")
        if not (self.conv_tol > 0.0 and self.bound_threshold > 0.0 and self.stop_epsilon > 0.0):
            raise ValueError("tolerances must be positive")
        space = self.input_space
        first, second = (float(x) for x in self.remainder_space)
        object.__setattr__(self, "remainder_space", (first, second))
        if isinstance(space, LpInput):
            if not (2.0 <= space.p < math.inf):
                raise ValueError("input exponent p must satisfy 2 <= p < infinity")
            if not (space.p < first and space.p < second):
                raise ValueError("remainder exponents must both exceed p")
        else:
            if space.a < 1.0 or space.q < 1.0:
                raise ValueError("input exponents must be at least 1")
            b, r = first, second
            if not b > space.a:
                raise ValueError("remainder inner exponent must exceed the input one")
            if not (r >= space.q and r >= (b / space.a) * space.q):
                raise ValueError("remainder outer exponent must satisfy r >= (b/a) * q")


def input_space_norm(field: CoeffField, space: InputSpace) -> float:
    if isinstance(space, LpInput):
        return lp_norm(field)
    inv_a = 0.0 if space.a == math.inf else 1.0 / space.a
    return besov_norm(field, BesovParams(field.dim * (inv_a - 1.0 / space.p), space.a, space.q))


def remainder_space_norm(field: CoeffField, config: ExtractConfig) -> float:
    inner, outer = config.remainder_space
    inv = 0.0 if inner == math.inf else 1.0 / inner
    s = field.dim * (inv - 1.0 / config.input_space.p)
    return besov_norm(field, BesovParams(s, inner, outer))


@dataclass(frozen=True)
class GroupMember:
    """One extracted component of a profile.

    ``rel_map`` carries the anchor frame onto this component and is the
    identity for the anchor member itself; ``rank`` is the global extraction
    rank (1-based, unique across all groups).
    """

    gen: int
    rel_map: DyadicAffine
    amplitude: float
    rank: int


@dataclass(frozen=True)
class ProfileGroup:
    """A profile with its per-index anchor parameters and member components."""

    anchor_params: Mapping[int, LatticeParams]
    members: tuple[GroupMember, ...]
    profile: CoeffField

    def __post_init__(self) -> None:
        object.__setattr__(self, "anchor_params", MappingProxyType(dict(self.anchor_params)))

    def anchor_affine(self, n: int) -> DyadicAffine:
        j, k = self.anchor_params[n]
        return DyadicAffine.from_lattice(j, k)


@dataclass(frozen=True)
class Decomposition:
    """Extraction result: groups, surviving indices, and audit trail.

    Remainders are not materialized; they are reconstructed on demand through
    :func:`remainder`, which makes the reconstruction identity hold by
    construction for every retained index and level.
    """

    dim: int
    p: float
    inputs: Mapping[int, CoeffField]
    groups: tuple[ProfileGroup, ...]
    retained: tuple[int, ...]
    diagnostics: tuple[str, ...]
    input_norm_max: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", MappingProxyType(dict(self.inputs)))

    def require_retained(self, n: int) -> None:
        if n not in self.inputs or n not in set(self.retained):
            raise ValueError(f"sequence index {n} is not retained")


class _WorkingGroup:
    __slots__ = ("anchors", "members")

    def __init__(self, anchors: dict[int, LatticeParams], first: GroupMember) -> None:
        self.anchors = anchors
        self.members = [first]


def extract_profiles(sequence: Sequence[CoeffField], config: ExtractConfig) -> Decomposition:
    """Run the iteration until the residual tail is small or the budget is spent.

    Each iterate: test the stopping rule on the tail window; take the
    top-ranked residual coefficient of every retained index; restrict
    retention to the modal generator over the tail; average the tail
    amplitudes into a limit amplitude (spread above conv_tol is flagged, not
    fatal); attach to the first group whose relative parameters are exactly
    constant on the tail and small in magnitude, treating nondecreasing or
    large parameter gaps as separation; otherwise open a new group, with a
    diagnostic when the gap behaviour was ambiguous.  Finally remove the
    extracted component from each residual.
    """
    fields = list(sequence)
    if not fields:
        raise ValueError("empty sequence")
    dim, p = fields[0].dim, fields[0].p
    for f in fields:
        if f.dim != dim or f.p != p:
            raise ValueError("sequence mixes dimensions or reference exponents")
        if not f.is_lattice:
            raise ValueError("inputs must carry integral shifts")
    if config.input_space.p != p:
        raise ValueError("config reference exponent does not match the inputs")
    if config.tail_window > len(fields):
        raise ValueError("tail window exceeds the sequence length")

    inputs = {n: f for n, f in enumerate(fields, start=1)}
    input_norm_max = max(input_space_norm(f, config.input_space) for f in fields)
    retained = sorted(inputs)
    residuals = dict(inputs)
    groups: list[_WorkingGroup] = []
    diagnostics: list[str] = []
    window = config.tail_window

    next_rank = 1
    while next_rank <= config.max_iterations:
        tail = retained[-window:]
        if max(sup_amplitude(residuals[n]) for n in tail) <= config.stop_epsilon:
            break
        exhausted = [n for n in retained if not residuals[n].entries]
        if exhausted:
            diagnostics.append(
                f"iterate {next_rank}: dropped {len(exhausted)} exhausted residuals"
            )
            retained = [n for n in retained if residuals[n].entries]
            if len(retained) < window:
                diagnostics.append(
                    f"iterate {next_rank}: retained set shrank below the tail window"
                )
                break
            continue

        tops = {n: rank(residuals[n])[0] for n in retained}
        tail_gens = [tops[n][0].gen for n in tail]
        modal_gen = max(set(tail_gens), key=lambda g: (tail_gens.count(g), -g))
        keep = [n for n in retained if tops[n][0].gen == modal_gen]
        if keep != retained:
            diagnostics.append(
                f"iterate {next_rank}: generator restriction dropped "
                f"{len(retained) - len(keep)} indices"
            )
            retained = keep
            if len(retained) < window:
                diagnostics.append(
                    f"iterate {next_rank}: retained set shrank below the tail window"
                )
                break
            tail = retained[-window:]

        tail_amps = [tops[n][1] for n in tail]
        spread = max(tail_amps) - min(tail_amps)
        limit_amp = tail_amps[0] if spread == 0.0 else math.fsum(tail_amps) / len(tail_amps)
        if spread > config.conv_tol:
            diagnostics.append(
                f"iterate {next_rank}: tail amplitude spread {spread:.6e} exceeds conv_tol"
            )
        params: dict[int, LatticeParams] = {
            n: (tops[n][0].scale, tops[n][0].shift.numerators) for n in retained
        }

        attached = False
        ambiguous = False
        for group in groups:
            rel = {n: relative_map(group.anchors[n], params[n]) for n in retained}
            tail_rel = [rel[n] for n in tail]
            constant = tail_rel[0]
            if all(r == constant for r in tail_rel) and magnitude(constant) <= config.bound_threshold:
                keep = [n for n in retained if rel[n] == constant]
                if keep != retained:
                    diagnostics.append(
                        f"iterate {next_rank}: relative-map constancy dropped "
                        f"{len(retained) - len(keep)} indices"
                    )
                    retained = keep
                group.members.append(GroupMember(modal_gen, constant, limit_amp, next_rank))
                attached = True
                break
            gaps = [magnitude(r) for r in tail_rel]
            separated = (
                all(gaps[i] <= gaps[i + 1] for i in range(len(gaps) - 1))
                or min(gaps) > config.bound_threshold
            )
            if not separated:
                ambiguous = True
        if not attached:
            anchor = GroupMember(modal_gen, DyadicAffine.identity(dim), limit_amp, next_rank)
            groups.append(_WorkingGroup(dict(params), anchor))
            if ambiguous:
                diagnostics.append(
                    f"iterate {next_rank}: ambiguous relative parameters, "
                    f"opened group {len(groups) - 1}"
                )

        for n in retained:
            residuals[n] = residuals[n].without(tops[n][0])
        next_rank += 1

    final_groups: list[ProfileGroup] = []
    for position, group in enumerate(groups):
        entries: dict[WaveletIndex, float] = {}
        for member in group.members:
            if member.amplitude == 0.0:
                diagnostics.append(
                    f"group {position}: zero limit amplitude at rank {member.rank}, "
                    "omitted from the profile"
                )
                continue
            index = WaveletIndex(member.gen, member.rel_map.scale, member.rel_map.shift)
            if index in entries:
                raise RuntimeError("distinct members collided on one profile index")
            entries[index] = member.amplitude
        anchors = {n: group.anchors[n] for n in retained}
        final_groups.append(
            ProfileGroup(anchors, tuple(group.members), CoeffField(dim, p, entries))
        )

    return Decomposition(
        dim=dim,
        p=p,
        inputs=inputs,
        groups=tuple(final_groups),
        retained=tuple(retained),
        diagnostics=tuple(diagnostics),
        input_norm_max=input_norm_max,
    )


def reconstruct(dec: Decomposition, level: int, n: int) -> CoeffField:
    """Sum of the first ``level`` transformed profiles at sequence index ``n``."""
    if not 0 <= level <= len(dec.groups):
        raise ValueError(f"level {level} out of range")
    dec.require_retained(n)
    acc = CoeffField.empty(dec.dim, dec.p)
    for group in dec.groups[:level]:
        acc = combine(acc, transform(group.profile, group.anchor_affine(n)))
    return acc


def remainder(dec: Decomposition, level: int, n: int) -> CoeffField:
    """Input minus reconstruction, coefficient-wise."""
    recon = reconstruct(dec, level, n)
    return combine(dec.inputs[n], recon, 1.0, -1.0)


def cross_interaction(dec: Decomposition, first: int, second: int, n: int) -> float:
    """Square-function interaction of two transformed profiles at index ``n``.

    Integrates S_first * S_second**(p/2 - 1) on the shared exact cell
    arrangement.  Zero whenever the supports are disjoint; returns 0.0 at
    p == 2 by convention, where the cross terms are vacuous.
    """
    if first == second:
        raise ValueError("group positions must differ")
    if not (0 <= first < len(dec.groups) and 0 <= second < len(dec.groups)):
        raise ValueError("group position out of range")
    dec.require_retained(n)
    if dec.p == 2.0:
        return 0.0
    f = transform(dec.groups[first].profile, dec.groups[first].anchor_affine(n))
    g = transform(dec.groups[second].profile, dec.groups[second].anchor_affine(n))
    return cross_square_integral(f, g)


@dataclass(frozen=True)
class GapReport:
    first: int
    second: int
    values: tuple[float, ...]
    nondecreasing_tail: bool
    final: float
    passes: bool


@dataclass(frozen=True)
class RemainderReport:
    level: int
    norms: tuple[float, ...]
    tail_max: float


@dataclass(frozen=True)
class StabilityReport:
    aggregation: float
    lhs: float
    rhs: float
    tolerance: float
    passes: bool


@dataclass(frozen=True)
class CrossReport:
    first: int
    second: int
    values: tuple[float, ...]


@dataclass(frozen=True)
class VerificationReport:
    """Orthogonality, smallness and stability measurements of a decomposition.

    All sequences run over the retained indices in order; remainder levels run
    from 0 to the group count.  The report is a pure function of the
    decomposition and configuration, so reruns are bit-identical.
    """

    retained: tuple[int, ...]
    input_norms: tuple[float, ...]
    profile_norms: tuple[float, ...]
    gaps: tuple[GapReport, ...]
    remainders: tuple[RemainderReport, ...]
    remainder_tail_nonincreasing: bool
    stability: StabilityReport
    margins: tuple[float, ...]
    margin_max: float
    cross: tuple[CrossReport, ...]


def verify(dec: Decomposition, config: ExtractConfig) -> VerificationReport:
    """Measure the decomposition; failures become report flags, never errors.

    Pairwise anchor gaps pass when nondecreasing on the tail window with final
    value at least bound_threshold.  Remainder norms are tabulated in the
    remainder space per level with tail maxima.  Stability compares the
    aggregated profile norms against the tail minimum of the input norms:
    p-th-power sums in Lebesgue mode, an l^tau norm with tau = max(a, q) in
    Besov mode.  Margins report by how much remainder input-space norms exceed
    the input norms on the tail.
    """
    ns = list(dec.retained)
    window = min(config.tail_window, len(ns))
    tail_start = len(ns) - window
    space = config.input_space

    input_norms = tuple(input_space_norm(dec.inputs[n], space) for n in ns)
    tail_input_min = min(input_norms[tail_start:]) if ns else 0.0
    profile_norms = tuple(input_space_norm(g.profile, space) for g in dec.groups)

    gap_reports: list[GapReport] = []
    for i in range(len(dec.groups)):
        for k in range(i + 1, len(dec.groups)):
            values = tuple(
                orthogonality_gap(dec.groups[i].anchor_params[n], dec.groups[k].anchor_params[n])
                for n in ns
            )
            tail_vals = values[tail_start:]
            nondec = all(tail_vals[t] <= tail_vals[t + 1] for t in range(len(tail_vals) - 1))
            final = tail_vals[-1] if tail_vals else 0.0
            gap_reports.append(
                GapReport(i, k, values, nondec, final, nondec and final >= config.bound_threshold)
            )

    remainder_reports: list[RemainderReport] = []
    margin_list: list[float] = []
    for level in range(len(dec.groups) + 1):
        rems = [remainder(dec, level, n) for n in ns]
        norms = tuple(remainder_space_norm(r, config) for r in rems)
        remainder_reports.append(RemainderReport(level, norms, max(norms[tail_start:], default=0.0)))
        margin_list.append(
            max(
                (
                    input_space_norm(rems[pos], space) - input_norms[pos]
                    for pos in range(tail_start, len(ns))
                ),
                default=0.0,
            )
        )
    tail_maxima = [r.tail_max for r in remainder_reports]
    nonincreasing = all(tail_maxima[i + 1] <= tail_maxima[i] for i in range(len(tail_maxima) - 1))

    if isinstance(space, LpInput):
        aggregation = space.p
        lhs = math.fsum(v**space.p for v in profile_norms)
        rhs = tail_input_min**space.p
    else:
        aggregation = max(space.a, space.q)
        if aggregation == math.inf:
            lhs = max(profile_norms, default=0.0)
        else:
            lhs = math.fsum(v**aggregation for v in profile_norms) ** (1.0 / aggregation)
        rhs = tail_input_min
    stability = StabilityReport(
        aggregation=aggregation,
        lhs=lhs,
        rhs=rhs,
        tolerance=STABILITY_TOL,
        passes=lhs <= rhs + STABILITY_TOL,
    )

    cross_reports: list[CrossReport] = []
    for i in range(len(dec.groups)):
        for k in range(len(dec.groups)):
            if i == k:
                continue
            cross_reports.append(
                CrossReport(i, k, tuple(cross_interaction(dec, i, k, n) for n in ns))
            )

    return VerificationReport(
        retained=tuple(ns),
        input_norms=input_norms,
        profile_norms=profile_norms,
        gaps=tuple(gap_reports),
        remainders=tuple(remainder_reports),
        remainder_tail_nonincreasing=nonincreasing,
        stability=stability,
        margins=tuple(margin_list),
        margin_max=max(margin_list, default=0.0),
        cross=tuple(cross_reports),
    )
