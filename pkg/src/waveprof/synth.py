"""Ground-truth sequence generation and recovery checking.

A synthetic sequence plants known profiles along prescribed scale/translation
parameter laws, optionally buried under small-amplitude noise placed on fresh
indices, and returns both the sequence and the decomposition an extractor is
expected to recover.  Specs whose parameter laws do not separate, whose
transformed indices leave the integer lattice, or whose planted supports
collide anywhere in the generated range are rejected up front.

Randomness comes from an explicit SplitMix64 stream so corpora are
reproducible from the seed alone, independent of the host platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import (
    DyadicAffine,
    DyadicRationalVec,
    WaveletIndex,
    act_on_index,
    compose,
    invert,
    orthogonality_gap,
)
from .extract import Decomposition, GroupMember, ProfileGroup
from .field import CoeffField, combine, order_key, rank, transform
from .norms import lp_norm

_MASK64 = (1 << 64) - 1


class SeededStream:
    """SplitMix64: state advances by the golden-ratio increment, output is the
    mixed state (xor-shift by 30/27/31 with the usual two odd multipliers).
    Uniform integers use rejection sampling, so every draw is unbiased and
    reproducible across implementations."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_raw(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            raw = self.next_raw()
            if raw < limit:
                return raw % bound

    def unit(self) -> float:
        return (self.next_raw() >> 11) * 2.0**-53


LAW_KINDS = ("constant", "translation", "scaling", "mixed")


@dataclass(frozen=True)
class ParamLaw:
    """Rule n -> (scale, shift) for one planted profile, n running from 1."""

    kind: str
    j0: int
    k0: tuple[int, ...]
    velocity: tuple[int, ...] = ()
    scale_step: int = 0

    def __post_init__(self) -> None:
        if self.kind not in LAW_KINDS:
            raise ValueError(f"unknown law kind {self.kind!r}")
        velocity = self.velocity or (0,) * len(self.k0)
        object.__setattr__(self, "k0", tuple(int(c) for c in self.k0))
        object.__setattr__(self, "velocity", tuple(int(c) for c in velocity))
        if len(self.velocity) != len(self.k0):
            raise ValueError("velocity dimension does not match k0")
        moving = any(self.velocity)
        scaling = self.scale_step != 0
        expected = {
            "constant": (False, False),
            "translation": (True, False),
            "scaling": (False, True),
            "mixed": (True, True),
        }[self.kind]
        if (moving, scaling) != expected:
            raise ValueError(f"law fields inconsistent with kind {self.kind!r}")

    def params(self, n: int) -> tuple[int, tuple[int, ...]]:
        return (
            self.j0 + n * self.scale_step,
            tuple(c + n * v for c, v in zip(self.k0, self.velocity)),
        )

    def affine(self, n: int) -> DyadicAffine:
        j, k = self.params(n)
        return DyadicAffine.from_lattice(j, k)


@dataclass(frozen=True)
class PlantedProfile:
    field: CoeffField
    law: ParamLaw


@dataclass(frozen=True)
class SyntheticSpec:
    dim: int
    p: float
    profiles: tuple[PlantedProfile, ...]
    n_count: int
    seed: int
    noise_amp: float = 0.0
    noise_count: int = 0


def validate_spec(spec: SyntheticSpec) -> None:
    """Reject specs that cannot produce a cleanly recoverable sequence."""
    if spec.n_count < 1:
        raise ValueError("n_count must be at least 1")
    if not spec.profiles:
        raise ValueError("at least one profile is required")
    if spec.noise_count < 0 or spec.noise_amp < 0.0:
        raise ValueError("noise parameters must be nonnegative")
    if (spec.noise_amp > 0.0) != (spec.noise_count > 0):
        raise ValueError("noise amplitude and count must be set together")
    for planted in spec.profiles:
        if planted.field.dim != spec.dim or planted.field.p != spec.p:
            raise ValueError("profile dimension or exponent does not match the spec")
        if not planted.field.entries:
            raise ValueError("profiles must be nonempty")
        if len(planted.law.k0) != spec.dim:
            raise ValueError("law dimension does not match the spec")
    if len(spec.profiles) > 1 and spec.n_count < 2:
        raise ValueError("divergence of several laws needs n_count >= 2")
    for i in range(len(spec.profiles)):
        for k in range(i + 1, len(spec.profiles)):
            gaps = [
                orthogonality_gap(
                    spec.profiles[i].law.params(n), spec.profiles[k].law.params(n)
                )
                for n in range(1, spec.n_count + 1)
            ]
            if any(gaps[t + 1] <= gaps[t] for t in range(len(gaps) - 1)):
                raise ValueError(
                    f"parameter laws {i} and {k} do not separate over the range"
                )
    for n in range(1, spec.n_count + 1):
        supports: list[set[WaveletIndex]] = []
        for position, planted in enumerate(spec.profiles):
            tau = planted.law.affine(n)
            mapped = set()
            for index in planted.field.entries:
                moved = act_on_index(tau, index)
                if not moved.on_lattice:
                    raise ValueError(
                        f"profile {position} leaves the lattice at n={n}"
                    )
                mapped.add(moved)
            for earlier in supports:
                if earlier & mapped:
                    raise ValueError(
                        f"planted supports collide at n={n}; recovery would be ambiguous"
                    )
            supports.append(mapped)


def _entry_affine(index: WaveletIndex) -> DyadicAffine:
    return DyadicAffine(index.scale, index.shift)


def _reframed_groups(spec: SyntheticSpec, retained: tuple[int, ...]) -> list[ProfileGroup]:
    """Planted profiles rewritten in the frame of their dominant component.

    The anchor of each group is the planted entry of largest |amplitude|
    (ranking tie-break), so the group invariantly starts with the identity
    relative map, matching what an extractor produces.
    """
    staged = []
    for planted in spec.profiles:
        anchor_index, _ = rank(planted.field)[0]
        sigma = _entry_affine(anchor_index)
        profile = transform(planted.field, invert(sigma))
        anchors = {}
        for n in retained:
            moved = act_on_index(planted.law.affine(n), anchor_index)
            anchors[n] = (moved.scale, moved.shift.numerators)
        members = [
            (index.gen, _entry_affine(index), amp)
            for index, amp in sorted(profile.entries.items(), key=lambda kv: order_key(kv[0]))
        ]
        staged.append((anchors, members, profile))

    flat = [
        (-abs(amp), gi, mi)
        for gi, (_, members, _) in enumerate(staged)
        for mi, (_, _, amp) in enumerate(members)
    ]
    ranks = {key[1:]: pos + 1 for pos, key in enumerate(sorted(flat))}

    groups = []
    for gi, (anchors, members, profile) in enumerate(staged):
        ordered = sorted(
            (
                GroupMember(gen, rel, amp, ranks[(gi, mi)])
                for mi, (gen, rel, amp) in enumerate(members)
            ),
            key=lambda m: m.rank,
        )
        groups.append(ProfileGroup(anchors, tuple(ordered), profile))
    return groups


def _noise_scale_and_offset(spec: SyntheticSpec, groups: list[ProfileGroup]) -> tuple[int, int]:
    top_scale = 0
    reach = Fraction(1)
    for n in range(1, spec.n_count + 1):
        for group in groups:
            tau = group.anchor_affine(n)
            for index in group.profile.entries:
                moved = act_on_index(tau, index)
                top_scale = max(top_scale, moved.scale)
                side = Fraction(1 << max(-moved.scale, 0), 1 << max(moved.scale, 0))
                for c in moved.shift.numerators:
                    corner = Fraction(abs(c), 1 << moved.shift.denom_exp)
                    reach = max(reach, (corner + 1) * side)
    return top_scale + 1, int(math.ceil(reach)) + 1


def _noise_field(
    spec: SyntheticSpec, stream: SeededStream, n: int, scale: int, offset: int
) -> CoeffField:
    span = 4 * spec.noise_count
    base = (offset + (n - 1) * span) << scale
    width = span << scale
    entries: dict[WaveletIndex, float] = {}
    while len(entries) < spec.noise_count:
        gen = 1 + stream.below((1 << spec.dim) - 1)
        shift = tuple(base + stream.below(width) for _ in range(spec.dim))
        index = WaveletIndex(gen, scale, DyadicRationalVec.from_ints(shift))
        if index in entries:
            continue
        amp = (2.0 * stream.unit() - 1.0) * spec.noise_amp
        if amp == 0.0:
            continue
        entries[index] = amp
    return CoeffField(spec.dim, spec.p, entries)


def generate(spec: SyntheticSpec) -> tuple[tuple[CoeffField, ...], Decomposition]:
    """Build the sequence and the decomposition that should be recovered.

    Deterministic given the spec; the assembled sequence uses the same
    combination order as reconstruction, so a perfect recovery cancels the
    planted components exactly, coefficient by coefficient.
    """
    validate_spec(spec)
    retained = tuple(range(1, spec.n_count + 1))
    groups = _reframed_groups(spec, retained)

    stream = SeededStream(spec.seed)
    noise_scale, noise_offset = (0, 0)
    if spec.noise_count:
        noise_scale, noise_offset = _noise_scale_and_offset(spec, groups)

    fields = []
    for n in retained:
        acc = CoeffField.empty(spec.dim, spec.p)
        for group in groups:
            acc = combine(acc, transform(group.profile, group.anchor_affine(n)))
        if spec.noise_count:
            acc = combine(acc, _noise_field(spec, stream, n, noise_scale, noise_offset))
        fields.append(acc)

    truth = Decomposition(
        dim=spec.dim,
        p=spec.p,
        inputs={n: f for n, f in zip(retained, fields)},
        groups=tuple(groups),
        retained=retained,
        diagnostics=(),
        input_norm_max=max(lp_norm(f) for f in fields),
    )
    return tuple(fields), truth


@dataclass(frozen=True)
class GroupMatch:
    truth_index: int
    found_index: int
    frame_map: DyadicAffine
    max_amplitude_deviation: float


@dataclass(frozen=True)
class AlignmentReport:
    matches: tuple[GroupMatch, ...]
    unmatched_truth: tuple[int, ...]
    unmatched_found: tuple[int, ...]
    max_amplitude_deviation: float

    @property
    def complete(self) -> bool:
        return not self.unmatched_truth and not self.unmatched_found


def _try_match(
    found_group: ProfileGroup, truth_group: ProfileGroup, ns: list[int]
) -> tuple[DyadicAffine, float] | None:
    truth_top, _ = rank(truth_group.profile)[0]
    for f_index in sorted(found_group.profile.entries, key=order_key):
        if f_index.gen != truth_top.gen:
            continue
        sigma = compose(_entry_affine(truth_top), invert(_entry_affine(f_index)))
        mapped = transform(found_group.profile, sigma)
        if set(mapped.entries) != set(truth_group.profile.entries):
            continue
        if any(
            compose(truth_group.anchor_affine(n), sigma) != found_group.anchor_affine(n)
            for n in ns
        ):
            continue
        deviation = max(
            abs(amp - truth_group.profile.entries[index])
            for index, amp in mapped.entries.items()
        )
        return sigma, deviation
    return None


def align_frames(found: Decomposition, truth: Decomposition) -> AlignmentReport:
    """Match extracted groups to planted ones up to a single frame map each.

    A truth group matches a found group when some scale/translation map
    carries the found profile exactly onto the truth profile (index sets
    equal) and simultaneously reconciles the anchor parameters at every
    retained index; amplitude differences are reported, not thresholded.
    Matching is order-free and deterministic.
    """
    if found.dim != truth.dim or found.p != truth.p:
        raise ValueError("decompositions must share dimension and reference exponent")
    ns = sorted(set(found.retained) & set(truth.retained))
    matches: list[GroupMatch] = []
    used: set[int] = set()
    unmatched_truth: list[int] = []
    for ti, truth_group in enumerate(truth.groups):
        hit = None
        for fi, found_group in enumerate(found.groups):
            if fi in used:
                continue
            attempt = _try_match(found_group, truth_group, ns)
            if attempt is not None:
                hit = GroupMatch(ti, fi, attempt[0], attempt[1])
                used.add(fi)
                break
        if hit is None:
            unmatched_truth.append(ti)
        else:
            matches.append(hit)
    unmatched_found = [fi for fi in range(len(found.groups)) if fi not in used]
    return AlignmentReport(
        matches=tuple(matches),
        unmatched_truth=tuple(unmatched_truth),
        unmatched_found=tuple(unmatched_found),
        max_amplitude_deviation=max(
            (m.max_amplitude_deviation for m in matches), default=0.0
        ),
    )
