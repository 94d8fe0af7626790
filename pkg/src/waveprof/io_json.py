"""Canonical JSON serialization for fields, configs, decompositions, reports.

Output is byte-deterministic: keys are emitted sorted, containers compactly,
and every real number as a decimal with 17 significant digits, which
round-trips IEEE doubles exactly.  Infinite exponents are carried as the
strings "inf" / "-inf" since JSON numbers cannot express them.
"""

from __future__ import annotations

import json
import math
from typing import Any, Mapping

from .dyadic import DyadicAffine, DyadicRationalVec, WaveletIndex
from .extract import (
    BesovInput,
    Decomposition,
    ExtractConfig,
    GroupMember,
    LpInput,
    ProfileGroup,
    VerificationReport,
)
from .field import CoeffField, order_key
from .synth import ParamLaw, PlantedProfile, SyntheticSpec


def _float_token(value: float) -> str:
    if math.isnan(value):
        raise ValueError("NaN is not serializable")
    if math.isinf(value):
        return '"inf"' if value > 0 else '"-inf"'
    token = format(value, ".17g")
    if "e" not in token and "E" not in token and "." not in token:
        token += ".0"
    return token


def _emit(obj: Any) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float_token(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_emit(v) for v in obj) + "]"
    if isinstance(obj, Mapping):
        parts = (
            json.dumps(str(k), ensure_ascii=False) + ":" + _emit(v)
            for k, v in sorted(obj.items())
        )
        return "{" + ",".join(parts) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj: Any) -> str:
    return _emit(obj) + "\n"


def _as_float(value: Any, what: str = "value") -> float:
    if isinstance(value, bool) or value is None:
        raise ValueError(f"{what} must be a number")
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in ("inf", "+inf", "infinity"):
            return math.inf
        if lowered in ("-inf", "-infinity"):
            return -math.inf
        try:
            return float(lowered)
        except ValueError:
            raise ValueError(f"{what} must be a number, got {value!r}") from None
    return float(value)


def _as_int(value: Any, what: str = "value") -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{what} must be an integer")
    return value


# -- coefficient fields ------------------------------------------------------


def _entry_obj(index: WaveletIndex, amp: float) -> dict:
    return {
        "i": index.gen,
        "j": index.scale,
        "k": list(index.shift.numerators),
        "denom_exp": index.shift.denom_exp,
        "amp": amp,
    }


def _entry_from_obj(obj: Mapping, dim: int) -> tuple[WaveletIndex, float]:
    k = obj.get("k")
    if not isinstance(k, list) or len(k) != dim:
        raise ValueError("entry shift must be a list matching the dimension")
    shift = DyadicRationalVec(
        tuple(_as_int(c, "shift component") for c in k),
        _as_int(obj.get("denom_exp", 0), "denom_exp"),
    )
    index = WaveletIndex(_as_int(obj["i"], "generator"), _as_int(obj["j"], "scale"), shift)
    return index, _as_float(obj["amp"], "amplitude")


def field_to_obj(field: CoeffField) -> dict:
    ordered = sorted(field.entries.items(), key=lambda kv: order_key(kv[0]))
    return {
        "dimension": field.dim,
        "p": field.p,
        "entries": [_entry_obj(index, amp) for index, amp in ordered],
    }


def field_from_obj(obj: Mapping) -> CoeffField:
    dim = _as_int(obj["dimension"], "dimension")
    p = _as_float(obj["p"], "p")
    entries = obj.get("entries", [])
    if not isinstance(entries, list):
        raise ValueError("entries must be a list")
    return CoeffField.from_items(dim, p, [_entry_from_obj(e, dim) for e in entries])


# -- extraction config -------------------------------------------------------


def config_to_obj(config: ExtractConfig) -> dict:
    space = config.input_space
    if isinstance(space, LpInput):
        space_obj: dict = {"kind": "lp", "p": space.p}
    else:
        space_obj = {"kind": "besov", "p": space.p, "a": space.a, "q": space.q}
    return {
        "max_iterations": config.max_iterations,
        "tail_window": config.tail_window,
        "conv_tol": config.conv_tol,
        "bound_threshold": config.bound_threshold,
        "stop_epsilon": config.stop_epsilon,
        "space": space_obj,
        "remainder": list(config.remainder_space),
    }


def config_from_obj(obj: Mapping) -> ExtractConfig:
    space_obj = obj.get("space")
    if not isinstance(space_obj, Mapping):
        raise ValueError("config requires a space object")
    kind = space_obj.get("kind")
    p = _as_float(space_obj["p"], "p")
    if kind == "lp":
        space: LpInput | BesovInput = LpInput(p)
    elif kind == "besov":
        space = BesovInput(p, _as_float(space_obj["a"], "a"), _as_float(space_obj["q"], "q"))
    else:
        raise ValueError(f"unknown space kind {kind!r}")
    remainder = obj.get("remainder")
    if not isinstance(remainder, list) or len(remainder) != 2:
        raise ValueError("remainder must be a two-element list")
    return ExtractConfig(
        max_iterations=_as_int(obj["max_iterations"], "max_iterations"),
        tail_window=_as_int(obj["tail_window"], "tail_window"),
        conv_tol=_as_float(obj["conv_tol"], "conv_tol"),
        bound_threshold=_as_float(obj["bound_threshold"], "bound_threshold"),
        stop_epsilon=_as_float(obj["stop_epsilon"], "stop_epsilon"),
        input_space=space,
        remainder_space=(
            _as_float(remainder[0], "remainder exponent"),
            _as_float(remainder[1], "remainder exponent"),
        ),
    )


# -- decompositions and verification reports ---------------------------------


def _member_obj(member: GroupMember) -> dict:
    return {
        "gen": member.gen,
        "scale": member.rel_map.scale,
        "shift": list(member.rel_map.shift.numerators),
        "denom_exp": member.rel_map.shift.denom_exp,
        "amplitude": member.amplitude,
        "rank": member.rank,
    }


def _member_from_obj(obj: Mapping, dim: int) -> GroupMember:
    shift = obj.get("shift")
    if not isinstance(shift, list) or len(shift) != dim:
        raise ValueError("member shift must match the dimension")
    rel = DyadicAffine(
        _as_int(obj["scale"], "scale"),
        DyadicRationalVec(
            tuple(_as_int(c, "shift component") for c in shift),
            _as_int(obj.get("denom_exp", 0), "denom_exp"),
        ),
    )
    return GroupMember(
        gen=_as_int(obj["gen"], "generator"),
        rel_map=rel,
        amplitude=_as_float(obj["amplitude"], "amplitude"),
        rank=_as_int(obj["rank"], "rank"),
    )


def _group_obj(group: ProfileGroup) -> dict:
    anchor_rows = [
        [n, j, list(k)] for n, (j, k) in sorted(group.anchor_params.items())
    ]
    profile_entries = [
        _entry_obj(index, amp)
        for index, amp in sorted(group.profile.entries.items(), key=lambda kv: order_key(kv[0]))
    ]
    return {
        "anchor": anchor_rows,
        "members": [_member_obj(m) for m in group.members],
        "profile": profile_entries,
    }


def _group_from_obj(obj: Mapping, dim: int, p: float) -> ProfileGroup:
    anchors = {}
    for row in obj.get("anchor", []):
        if not (isinstance(row, list) and len(row) == 3):
            raise ValueError("anchor rows must be [n, j, k]")
        n, j, k = row
        anchors[_as_int(n, "index")] = (
            _as_int(j, "scale"),
            tuple(_as_int(c, "shift component") for c in k),
        )
    members = tuple(_member_from_obj(m, dim) for m in obj.get("members", []))
    profile = CoeffField.from_items(
        dim, p, [_entry_from_obj(e, dim) for e in obj.get("profile", [])]
    )
    return ProfileGroup(anchors, members, profile)


def decomposition_to_obj(dec: Decomposition) -> dict:
    return {
        "dimension": dec.dim,
        "p": dec.p,
        "count": len(dec.inputs),
        "retained": list(dec.retained),
        "diagnostics": list(dec.diagnostics),
        "input_norm_max": dec.input_norm_max,
        "groups": [_group_obj(g) for g in dec.groups],
    }


def decomposition_from_obj(obj: Mapping, inputs: Mapping[int, CoeffField]) -> Decomposition:
    dim = _as_int(obj["dimension"], "dimension")
    p = _as_float(obj["p"], "p")
    if len(inputs) != _as_int(obj["count"], "count"):
        raise ValueError("input count does not match the stored decomposition")
    for field in inputs.values():
        if field.dim != dim or field.p != p:
            raise ValueError("inputs do not match the stored decomposition")
    retained = tuple(_as_int(n, "retained index") for n in obj.get("retained", []))
    groups = tuple(_group_from_obj(g, dim, p) for g in obj.get("groups", []))
    for position, group in enumerate(groups):
        if any(n not in group.anchor_params for n in retained):
            raise ValueError(f"group {position} lacks anchor rows for retained indices")
    return Decomposition(
        dim=dim,
        p=p,
        inputs=dict(inputs),
        groups=groups,
        retained=retained,
        diagnostics=tuple(str(d) for d in obj.get("diagnostics", [])),
        input_norm_max=_as_float(obj["input_norm_max"], "input_norm_max"),
    )


def verification_to_obj(report: VerificationReport) -> dict:
    return {
        "retained": list(report.retained),
        "input_norms": list(report.input_norms),
        "profile_norms": list(report.profile_norms),
        "gaps": [
            {
                "first": g.first,
                "second": g.second,
                "values": list(g.values),
                "nondecreasing_tail": g.nondecreasing_tail,
                "final": g.final,
                "pass": g.passes,
            }
            for g in report.gaps
        ],
        "remainders": [
            {"level": r.level, "norms": list(r.norms), "tail_max": r.tail_max}
            for r in report.remainders
        ],
        "remainder_tail_nonincreasing": report.remainder_tail_nonincreasing,
        "stability": {
            "aggregation": report.stability.aggregation,
            "lhs": report.stability.lhs,
            "rhs": report.stability.rhs,
            "tolerance": report.stability.tolerance,
            "pass": report.stability.passes,
        },
        "margins": list(report.margins),
        "margin_max": report.margin_max,
        "cross": [
            {"first": c.first, "second": c.second, "values": list(c.values)}
            for c in report.cross
        ],
    }


def report_to_obj(
    config: ExtractConfig, dec: Decomposition, verification: VerificationReport
) -> dict:
    return {
        "config": config_to_obj(config),
        "decomposition": decomposition_to_obj(dec),
        "verification": verification_to_obj(verification),
    }


# -- synthetic specs ---------------------------------------------------------


def _law_from_obj(obj: Mapping) -> ParamLaw:
    kind = obj.get("kind")
    if not isinstance(kind, str):
        raise ValueError("law kind must be a string")
    k0 = obj.get("k0")
    if not isinstance(k0, list):
        raise ValueError("law k0 must be a list")
    velocity = obj.get("velocity", [0] * len(k0))
    return ParamLaw(
        kind=kind,
        j0=_as_int(obj.get("j0", 0), "j0"),
        k0=tuple(_as_int(c, "k0 component") for c in k0),
        velocity=tuple(_as_int(c, "velocity component") for c in velocity),
        scale_step=_as_int(obj.get("scale_step", 0), "scale_step"),
    )


def _law_to_obj(law: ParamLaw) -> dict:
    return {
        "kind": law.kind,
        "j0": law.j0,
        "k0": list(law.k0),
        "velocity": list(law.velocity),
        "scale_step": law.scale_step,
    }


def synthetic_spec_to_obj(spec: SyntheticSpec) -> dict:
    obj = {
        "dimension": spec.dim,
        "p": spec.p,
        "n_count": spec.n_count,
        "seed": spec.seed,
        "profiles": [
            {
                "entries": field_to_obj(planted.field)["entries"],
                "law": _law_to_obj(planted.law),
            }
            for planted in spec.profiles
        ],
    }
    if spec.noise_count:
        obj["noise"] = {"amp": spec.noise_amp, "count": spec.noise_count}
    return obj


def synthetic_spec_from_obj(obj: Mapping) -> SyntheticSpec:
    dim = _as_int(obj["dimension"], "dimension")
    p = _as_float(obj["p"], "p")
    profiles = []
    raw_profiles = obj.get("profiles")
    if not isinstance(raw_profiles, list) or not raw_profiles:
        raise ValueError("spec requires a nonempty profile list")
    for raw in raw_profiles:
        entries = [_entry_from_obj(e, dim) for e in raw.get("entries", [])]
        law_obj = raw.get("law")
        if not isinstance(law_obj, Mapping):
            raise ValueError("each profile requires a law object")
        profiles.append(
            PlantedProfile(CoeffField.from_items(dim, p, entries), _law_from_obj(law_obj))
        )
    noise = obj.get("noise") or {}
    return SyntheticSpec(
        dim=dim,
        p=p,
        profiles=tuple(profiles),
        n_count=_as_int(obj["n_count"], "n_count"),
        seed=_as_int(obj["seed"], "seed"),
        noise_amp=_as_float(noise.get("amp", 0.0), "noise amp"),
        noise_count=_as_int(noise.get("count", 0), "noise count"),
    )
