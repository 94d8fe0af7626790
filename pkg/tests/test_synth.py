from __future__ import annotations

import dataclasses
import math

import pytest

from waveprof.dyadic import DyadicAffine, compose, invert
from waveprof.extract import ExtractConfig, LpInput, extract_profiles, remainder
from waveprof.field import CoeffField, transform
from waveprof.norms import lp_norm, sup_amplitude
from waveprof.synth import (
    ParamLaw,
    PlantedProfile,
    SeededStream,
    SyntheticSpec,
    align_frames,
    generate,
    validate_spec,
)
from conftest import lattice_index


def unit_profile(amp=1.0, dim=1):
    return CoeffField.from_items(dim, 4.0, [(lattice_index(1, 0, *(0,) * dim), amp)])


def simple_spec(**overrides):
    base = dict(
        dim=1,
        p=4.0,
        profiles=(
            PlantedProfile(unit_profile(1.0), ParamLaw("constant", 0, (0,))),
            PlantedProfile(unit_profile(0.5), ParamLaw("translation", 0, (0,), velocity=(8,))),
        ),
        n_count=8,
        seed=11,
    )
    base.update(overrides)
    return SyntheticSpec(**base)


class TestParamLaw:
    def test_kind_consistency(self):
        with pytest.raises(ValueError):
            ParamLaw("constant", 0, (0,), velocity=(1,))
        with pytest.raises(ValueError):
            ParamLaw("translation", 0, (0,))
        with pytest.raises(ValueError):
            ParamLaw("scaling", 0, (0,))
        with pytest.raises(ValueError):
            ParamLaw("wiggle", 0, (0,))

    def test_evaluation(self):
        law = ParamLaw("mixed", 1, (2,), velocity=(3,), scale_step=-1)
        assert law.params(4) == (-3, (14,))


class TestValidation:
    def test_non_divergent_laws_rejected(self):
        spec = simple_spec(
            profiles=(
                PlantedProfile(unit_profile(1.0), ParamLaw("constant", 0, (0,))),
                PlantedProfile(unit_profile(0.5), ParamLaw("constant", 0, (5,))),
            )
        )
        with pytest.raises(ValueError, match="separate"):
            validate_spec(spec)

    def test_off_lattice_rejected(self):
        deep = CoeffField.from_items(1, 4.0, [(lattice_index(1, -1, 1), 1.0)])
        spec = simple_spec(
            profiles=(
                PlantedProfile(unit_profile(1.0), ParamLaw("constant", 0, (0,))),
                PlantedProfile(deep, ParamLaw("translation", 0, (1,), velocity=(2,))),
            )
        )
        with pytest.raises(ValueError, match="lattice"):
            validate_spec(spec)

    def test_support_collision_rejected(self):
        spec = simple_spec(
            profiles=(
                PlantedProfile(unit_profile(1.0), ParamLaw("constant", 0, (8,))),
                PlantedProfile(unit_profile(0.5), ParamLaw("translation", 0, (0,), velocity=(8,))),
            )
        )
        with pytest.raises(ValueError, match="collide"):
            validate_spec(spec)

    def test_noise_fields_must_pair(self):
        with pytest.raises(ValueError):
            validate_spec(simple_spec(noise_amp=1e-3))


class TestGenerate:
    def test_constant_profile_gives_identical_fields(self):
        spec = simple_spec(
            profiles=(PlantedProfile(unit_profile(1.0), ParamLaw("constant", 0, (0,))),)
        )
        fields, truth = generate(spec)
        assert all(f == fields[0] for f in fields)
        assert len(truth.groups) == 1

    def test_translation_entries(self):
        fields, _ = generate(simple_spec())
        for pos, f in enumerate(fields, start=1):
            assert set(f.entries) == {lattice_index(1, 0, 0), lattice_index(1, 0, 8 * pos)}

    def test_scale_law_entries_and_gap(self):
        spec = simple_spec(
            profiles=(
                PlantedProfile(unit_profile(1.0), ParamLaw("constant", 0, (0,))),
                PlantedProfile(unit_profile(0.5), ParamLaw("scaling", 0, (0,), scale_step=1)),
            )
        )
        fields, truth = generate(spec)
        for pos, f in enumerate(fields, start=1):
            assert {i.scale for i in f.entries} == {0, pos}
        from waveprof.dyadic import orthogonality_gap

        for pos in range(1, spec.n_count + 1):
            a = truth.groups[0].anchor_params[pos]
            b = truth.groups[1].anchor_params[pos]
            assert orthogonality_gap(a, b) == float(pos)

    def test_seeded_determinism(self):
        spec = simple_spec(noise_amp=1e-4, noise_count=3)
        first, _ = generate(spec)
        second, _ = generate(spec)
        assert list(first) == list(second)
        third, _ = generate(dataclasses.replace(spec, seed=12))
        assert list(third) != list(first)

    def test_noise_is_small_fresh_and_counted(self):
        spec = simple_spec(noise_amp=1e-4, noise_count=3)
        fields, truth = generate(spec)
        for n, f in zip(truth.retained, fields):
            planted = set()
            for g in truth.groups:
                moved = transform(g.profile, g.anchor_affine(n))
                planted |= set(moved.entries)
            extra = set(f.entries) - planted
            assert len(extra) == 3
            assert all(abs(f.entries[i]) <= 1e-4 for i in extra)
            assert planted <= set(f.entries)

    def test_sequence_is_norm_bounded(self):
        spec = simple_spec(noise_amp=1e-4, noise_count=3)
        fields, truth = generate(spec)
        budget = math.fsum(lp_norm(g.profile) for g in truth.groups) + 1e-4 * 3
        assert max(lp_norm(f) for f in fields) <= budget + 1e-12
        assert truth.input_norm_max <= budget + 1e-12

    def test_truth_remainder_is_the_noise(self):
        spec = simple_spec(noise_amp=1e-4, noise_count=2)
        fields, truth = generate(spec)
        for n in truth.retained:
            rem = remainder(truth, len(truth.groups), n)
            assert len(rem) == 2
            assert sup_amplitude(rem) <= 1e-4


class TestSeededStream:
    def test_reference_values_are_stable(self):
        stream = SeededStream(1234)
        first = [stream.next_raw() for _ in range(3)]
        again = SeededStream(1234)
        assert [again.next_raw() for _ in range(3)] == first

    def test_bounded_draws(self):
        stream = SeededStream(7)
        draws = [stream.below(10) for _ in range(200)]
        assert all(0 <= d < 10 for d in draws)
        units = [stream.unit() for _ in range(200)]
        assert all(0.0 <= u < 1.0 for u in units)


class TestAlignFrames:
    def config(self):
        return ExtractConfig(
            max_iterations=12,
            tail_window=3,
            conv_tol=1e-9,
            bound_threshold=6.0,
            stop_epsilon=1e-9,
            input_space=LpInput(4.0),
            remainder_space=(8.0, 8.0),
        )

    def test_truth_matches_itself_identically(self):
        _, truth = generate(simple_spec())
        report = align_frames(truth, truth)
        assert report.complete
        assert report.max_amplitude_deviation == 0.0
        assert all(m.frame_map.is_identity for m in report.matches)

    def test_group_order_is_irrelevant(self):
        _, truth = generate(simple_spec())
        permuted = dataclasses.replace(truth, groups=tuple(reversed(truth.groups)))
        report = align_frames(permuted, truth)
        assert report.complete
        assert {(m.truth_index, m.found_index) for m in report.matches} == {(0, 1), (1, 0)}

    def test_recovers_through_frame_change(self):
        _, truth = generate(simple_spec())
        sigma = DyadicAffine.from_lattice(1, (3,))
        moved = []
        for group in truth.groups:
            profile = transform(group.profile, invert(sigma))
            anchors = {}
            for n, (j, k) in group.anchor_params.items():
                reframed = compose(DyadicAffine.from_lattice(j, k), sigma)
                assert reframed.shift.is_integral
                anchors[n] = (reframed.scale, reframed.shift.numerators)
            moved.append(dataclasses.replace(group, anchor_params=anchors, profile=profile))
        shifted = dataclasses.replace(truth, groups=tuple(moved))
        report = align_frames(shifted, truth)
        assert report.complete
        assert all(m.frame_map == sigma for m in report.matches)
        assert report.max_amplitude_deviation == 0.0

    def test_extractor_roundtrip(self):
        fields, truth = generate(simple_spec())
        dec = extract_profiles(fields, self.config())
        report = align_frames(dec, truth)
        assert report.complete
        assert report.max_amplitude_deviation == 0.0

    def test_unmatched_groups_are_reported(self):
        _, truth = generate(simple_spec())
        only_first = dataclasses.replace(truth, groups=truth.groups[:1])
        report = align_frames(only_first, truth)
        assert not report.complete
        assert report.unmatched_truth == (1,)

    def test_dimension_mismatch(self):
        _, truth = generate(simple_spec())
        other = dataclasses.replace(truth, dim=2)
        with pytest.raises(ValueError):
            align_frames(truth, other)
