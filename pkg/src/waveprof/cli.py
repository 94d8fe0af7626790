"""Command-line front end: generate corpora, decompose, verify, compute norms.

Exit codes: 0 on success (verification failures live inside the report, they
are not process failures), 2 on usage or validation problems, 3 on an
internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import io_json
from .extract import BesovInput, ExtractConfig, LpInput, extract_profiles, verify
from .field import CoeffField
from .io_json import (
    config_from_obj,
    decomposition_from_obj,
    decomposition_to_obj,
    dumps_canonical,
    field_from_obj,
    field_to_obj,
)
from .norms import BesovParams, besov_norm, coeff_lp, lp_norm, sup_amplitude
from .synth import generate


def _load_json(path: Path) -> object:
    try:
        with path.open("r", encoding="utf-8") as fp:
            return json.load(fp)
    except FileNotFoundError:
        raise ValueError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON in {path}: {exc}")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _load_corpus(directory: Path) -> list[CoeffField]:
    if not directory.is_dir():
        raise ValueError(f"not a directory: {directory}")
    paths = sorted(directory.glob("field_*.json"))
    if not paths:
        raise ValueError(f"no field_*.json files in {directory}")
    return [field_from_obj(_load_json(p)) for p in paths]


def _cmd_generate(args: argparse.Namespace) -> int:
    spec = io_json.synthetic_spec_from_obj(_load_json(Path(args.spec)))
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    fields, truth = generate(spec)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for n, field in enumerate(fields, start=1):
        _write_text(out_dir / f"field_{n:04d}.json", dumps_canonical(field_to_obj(field)))
    _write_text(
        out_dir / "truth.json",
        dumps_canonical({"decomposition": decomposition_to_obj(truth)}),
    )
    print(f"wrote {len(fields)} field files and truth.json to {out_dir}")
    return 0


def _apply_overrides(config: ExtractConfig, args: argparse.Namespace) -> ExtractConfig:
    updates: dict = {}
    if args.tail_window is not None:
        updates["tail_window"] = args.tail_window
    if args.stop_epsilon is not None:
        updates["stop_epsilon"] = args.stop_epsilon
    if args.max_iterations is not None:
        updates["max_iterations"] = args.max_iterations
    space = config.input_space
    if args.space is not None:
        p = args.p if args.p is not None else space.p
        if args.space == "lp":
            space = LpInput(p)
        else:
            if args.a is None or args.q is None:
                raise ValueError("--space besov requires --a and --q")
            space = BesovInput(p, args.a, args.q)
        updates["input_space"] = space
    elif args.p is not None:
        raise ValueError("--p requires --space")
    if args.remainder is not None:
        updates["remainder_space"] = tuple(args.remainder)
    return replace(config, **updates) if updates else config


def _cmd_decompose(args: argparse.Namespace) -> int:
    config = config_from_obj(_load_json(Path(args.config)))
    config = _apply_overrides(config, args)
    fields = _load_corpus(Path(args.in_dir))
    dec = extract_profiles(fields, config)
    report = verify(dec, config)
    text = dumps_canonical(io_json.report_to_obj(config, dec, report))
    _write_text(Path(args.out), text)
    print(f"decomposed {len(fields)} fields into {len(dec.groups)} groups -> {args.out}")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    stored = _load_json(Path(args.report))
    if not isinstance(stored, dict) or "config" not in stored or "decomposition" not in stored:
        raise ValueError("report must contain config and decomposition sections")
    config = config_from_obj(stored["config"])
    fields = _load_corpus(Path(args.in_dir))
    inputs = {n: f for n, f in enumerate(fields, start=1)}
    dec = decomposition_from_obj(stored["decomposition"], inputs)
    report = verify(dec, config)
    text = dumps_canonical(io_json.report_to_obj(config, dec, report))
    if args.out:
        _write_text(Path(args.out), text)
        print(f"verification written to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _parse_besov_triple(token: str) -> BesovParams:
    parts = token.split(",")
    if len(parts) != 3:
        raise ValueError(f"--besov expects s,a,b, got {token!r}")
    values = [io_json._as_float(part.strip(), "besov exponent") for part in parts]
    return BesovParams(values[0], values[1], values[2])


def _cmd_norms(args: argparse.Namespace) -> int:
    field = field_from_obj(_load_json(Path(args.field)))
    besov_list = [_parse_besov_triple(token) for token in args.besov or []]
    obj = {
        "dimension": field.dim,
        "p": field.p,
        "lp": lp_norm(field),
        "sup": sup_amplitude(field),
        "coeff_lp": coeff_lp(field),
        "besov": [
            {
                "s": prm.s,
                "a": prm.a,
                "b": prm.b,
                "value": besov_norm(field, prm),
                "m_admissible": None,
            }
            for prm in besov_list
        ],
    }
    sys.stdout.write(dumps_canonical(obj))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waveprof",
        description="Profile decomposition of coefficient-field sequences",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a synthetic corpus from a spec")
    gen.add_argument("spec", help="synthetic spec JSON file")
    gen.add_argument("out", help="output directory")
    gen.add_argument("--seed", type=int, default=None, help="override the spec seed")
    gen.set_defaults(handler=_cmd_generate)

    dec = sub.add_parser("decompose", help="extract profiles from a corpus directory")
    dec.add_argument("in_dir", help="directory of field_*.json files")
    dec.add_argument("--config", required=True, help="extraction config JSON file")
    dec.add_argument("--out", required=True, help="report output path")
    dec.add_argument("--tail-window", dest="tail_window", type=int, default=None)
    dec.add_argument("--stop-epsilon", dest="stop_epsilon", type=float, default=None)
    dec.add_argument("--max-iterations", dest="max_iterations", type=int, default=None)
    dec.add_argument("--space", choices=("lp", "besov"), default=None)
    dec.add_argument("--p", type=float, default=None)
    dec.add_argument("--a", type=float, default=None)
    dec.add_argument("--q", type=float, default=None)
    dec.add_argument("--remainder", nargs=2, type=float, default=None, metavar=("X", "Y"))
    dec.set_defaults(handler=_cmd_decompose)

    ver = sub.add_parser("verify", help="re-run verification for a stored report")
    ver.add_argument("report", help="report JSON produced by decompose")
    ver.add_argument("in_dir", help="corpus directory the report was computed from")
    ver.add_argument("--out", default=None, help="output path (stdout when omitted)")
    ver.set_defaults(handler=_cmd_verify)

    nrm = sub.add_parser("norms", help="compute norms of one field file")
    nrm.add_argument("field", help="field JSON file")
    nrm.add_argument(
        "--besov",
        action="append",
        metavar="s,a,b",
        help="besov parameters, repeatable; use inf for infinite exponents",
    )
    nrm.set_defaults(handler=_cmd_norms)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # invariant breach or environment failure
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
