"""The ppg command line: scans, mildness, lifts, verification.

Exit codes: 0 success, 1 mathematically negative outcome (rejection,
obstruction, mismatch, nonzero cup), 2 usage error.  Every run prints a
machine-readable header line (version, command, config hash, seed) and writes
one deterministic JSON artifact: same argv and seed, same bytes.  Integers of
magnitude 2^53 or larger are serialized as strings to protect cross-language
consumers.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

from . import __version__
from .magnus import MildCertificate, MonomialOrder, Rejection, check_mild, cup_value
from .massey import (
    CharacterTuple,
    DefiningSystem,
    MasseyWitness,
    NoSurjectiveTupleError,
    Obstruction,
    PreconditionCupError,
    RankTooLargeError,
    cup_chain_ok,
    defining_system,
    full_rank_surjection,
    strong_massey_lift,
    verify_witness,
    witness_from_json,
    witness_to_json,
)
from .numtheory import (
    NumberField,
    q_ray_structure,
    rank_report,
    scan_tame,
    signature,
    wieferich_scan,
    wieferich_test,
)
from .presentations import (
    coproduct,
    demushkin,
    free,
    presentation_from_json,
    presentation_to_json,
)

BIG = 2**53


def _jsonable(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return str(obj) if abs(obj) >= BIG else obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return str(obj)


def _dump(data) -> str:
    return json.dumps(_jsonable(data), sort_keys=True, separators=(",", ":")) + "\n"


def _emit(artifact, out_path):
    text = _dump(artifact)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _header(command: str, config: dict, seed: int):
    payload = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(payload.encode()).hexdigest()[:16]
    sys.stdout.write(
        _dump(
            {
                "tool": "ppg",
                "version": __version__,
                "command": command,
                "config_hash": digest,
                "seed": seed,
            }
        )
    )


def _parse_factors(spec: str, p: int):
    parts = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        key, _, value = item.partition("=")
        if key == "q":
            parts.append(demushkin(int(value), p))
        elif key == "free":
            parts.append(free(int(value), p))
        else:
            raise ValueError(f"factor spec {item!r} (want q=INT or free=RANK)")
    if not parts:
        raise ValueError("empty factor specification")
    return coproduct(parts)


def _load_presentation(args):
    if getattr(args, "json_in", None):
        with open(args.json_in) as fh:
            return presentation_from_json(json.load(fh))
    if getattr(args, "factors", None):
        if args.p is None:
            raise ValueError("--factors requires --p")
        return _parse_factors(args.factors, args.p)
    raise ValueError("provide a presentation via --json-in or --factors")


def _parse_chis(text: str, p: int) -> CharacterTuple:
    rows = []
    for row in text.split(";"):
        row = row.strip()
        if row:
            rows.append([int(v) for v in row.split(",")])
    return CharacterTuple.make(rows, p)


def _obstruction_json(obs: Obstruction) -> dict:
    return {
        "level": obs.level,
        "defect": list(obs.defect),
        "cokernel": obs.cokernel,
        "budget_consumed": obs.budget_consumed,
        "factor_index": obs.factor_index,
        "conclusive": obs.conclusive,
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_mild(args) -> int:
    pres = _load_presentation(args)
    result = check_mild(pres, depth=args.depth)
    if isinstance(result, MildCertificate):
        _emit(
            {
                "mild": True,
                "leading": [list(t) for t in result.leading],
                "heads": sorted(result.heads),
                "tails": sorted(result.tails),
                "char2": result.char2,
            },
            args.output,
        )
        return 0
    assert isinstance(result, Rejection)
    _emit(
        {
            "mild": False,
            "relator": result.relator_index,
            "reason": result.reason,
            "leading": list(result.leading[0]) if result.leading else None,
            "inconclusive": result.inconclusive,
        },
        args.output,
    )
    return 1


def _cmd_cup(args) -> int:
    pres = _load_presentation(args)
    if args.chis:
        chis = _parse_chis(args.chis, pres.p)
        ok, fail_at = cup_chain_ok(pres, chis)
        _emit({"chain_ok": ok, "first_failure": fail_at}, args.output)
        return 0 if ok else 1
    chi_a = [int(v) for v in args.chi_a.split(",")]
    chi_b = [int(v) for v in args.chi_b.split(",")]
    values = cup_value(chi_a, chi_b, pres)
    _emit({"values": list(values), "zero": not any(values)}, args.output)
    return 0 if not any(values) else 1


def _cmd_lift(args) -> int:
    pres = _load_presentation(args)
    try:
        if args.chis:
            chis = _parse_chis(args.chis, pres.p)
            result = strong_massey_lift(pres, chis, args.m, args.budget)
        else:
            if args.n is None:
                raise ValueError("provide --n or --chis")
            result = full_rank_surjection(pres, args.n, args.m, args.budget)
    except (PreconditionCupError, RankTooLargeError, NoSurjectiveTupleError) as exc:
        _emit({"lift": False, "error": type(exc).__name__, "detail": str(exc)}, args.output)
        return 1
    if isinstance(result, Obstruction):
        _emit({"lift": False, "obstruction": _obstruction_json(result)}, args.output)
        return 1
    payload = witness_to_json(result)
    payload["solver"]["seed"] = args.seed
    _emit(payload, args.output)
    return 0


def _cmd_verify(args) -> int:
    with open(args.input) as fh:
        witness = witness_from_json(json.load(fh))
    report = verify_witness(witness)
    _emit(
        {"all_pass": report.all_pass, "checks": [dict(c) for c in report.checks]},
        args.output,
    )
    return 0 if report.all_pass else 1


def _cmd_defined(args) -> int:
    pres = _load_presentation(args)
    chis = _parse_chis(args.chis, pres.p)
    result = defining_system(pres, chis, args.budget)
    if isinstance(result, Obstruction):
        _emit({"defined": False, "obstruction": _obstruction_json(result)}, args.output)
        return 1
    assert isinstance(result, DefiningSystem)
    _emit(
        {
            "defined": True,
            "images": {
                name: result.hom.images[i].strict_upper()
                for i, name in enumerate(pres.generators)
            },
            "note": "images are U-representatives; the (1, n+1) entry is unconstrained",
        },
        args.output,
    )
    return 0


def _cmd_tame_scan(args) -> int:
    field = NumberField.create(args.poly)
    reports = scan_tame(field, args.p, args.m, args.bound)
    lines = []
    for r in reports:
        lines.append(
            {
                "ell": r.ell,
                "degrees": list(r.degrees),
                "norms": list(r.norms),
                "levels": list(r.levels),
                "max_level": r.max_level,
            }
        )
    text = "".join(_dump(line) for line in lines)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_signature(args) -> int:
    r1, r2 = signature(NumberField.create(args.poly))
    _emit({"r1": r1, "r2": r2}, args.output)
    return 0


def _cmd_rank(args) -> int:
    chosen = [int(v) for v in args.chosen.split(",")] if args.chosen else None
    report = rank_report(
        NumberField.create(args.poly), args.p, args.s_mode, args.t_size, chosen
    )
    _emit(
        {
            "p": report.p,
            "delta_s": report.delta_s,
            "t_size": report.t_size,
            "rank": report.rank,
            "unipotent_size": report.unipotent_size,
            "signature": list(report.signature),
        },
        args.output,
    )
    return 0


def _cmd_qray(args) -> int:
    primes = [int(v) for v in args.primes.split(",")]
    result = q_ray_structure(args.p, primes, args.B)
    _emit(
        {
            "p": result.p,
            "primes": list(result.tame_primes),
            "exponents": list(result.exponents),
            "B": result.truncation,
            "computed": list(result.computed),
            "predicted": list(result.predicted),
            "match": result.match,
        },
        args.output,
    )
    return 0 if result.match else 1


def _cmd_wieferich(args) -> int:
    if args.p is not None:
        hit = wieferich_test(args.base, args.p)
        _emit({"base": args.base, "p": args.p, "wieferich": hit}, args.output)
        return 0 if hit else 1
    if args.bound is None:
        raise ValueError("provide --p or --bound")
    hits = wieferich_scan(args.base, args.bound)
    _emit({"base": args.base, "bound": args.bound, "primes": hits}, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ppg",
        description="mild presentations, Massey lifts over Z/p^m, and tame-prime scans",
    )
    top.add_argument("--seed", type=int, default=0, help="recorded for reproducibility")
    sub = top.add_subparsers(dest="command", required=True)

    def common(sp, pres=True):
        sp.add_argument("-o", "--output", help="artifact path (default: stdout)")
        if pres:
            sp.add_argument("--json-in", help="presentation JSON file")
            sp.add_argument("--p", type=int, help="the prime p (with --factors)")
            sp.add_argument(
                "--factors", help="inline coproduct, e.g. q=19,q=37,free=1"
            )

    sp = sub.add_parser("mild", help="certify a presentation quadratic-mild")
    common(sp)
    sp.add_argument("--depth", type=int, default=3, help="truncation depth (2..6)")
    sp.set_defaults(func=_cmd_mild)

    sp = sub.add_parser("cup", help="evaluate cup products on the relators")
    common(sp)
    sp.add_argument("--chi-a", help="character values, comma separated")
    sp.add_argument("--chi-b", help="character values, comma separated")
    sp.add_argument("--chis", help="semicolon-separated tuple for a chain check")
    sp.set_defaults(func=_cmd_cup)

    sp = sub.add_parser("lift", help="construct a U_{n+1}(Z/p^m) witness")
    common(sp)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--n", type=int, help="matrix size parameter (canonical tuple)")
    sp.add_argument("--chis", help="explicit character tuple")
    sp.add_argument("--budget", type=int, default=512)
    sp.set_defaults(func=_cmd_lift)

    sp = sub.add_parser("verify", help="re-verify a witness artifact")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("defined", help="is the Massey product defined?")
    common(sp)
    sp.add_argument("--chis", required=True)
    sp.add_argument("--budget", type=int, default=512)
    sp.set_defaults(func=_cmd_defined)

    sp = sub.add_parser("tame-scan", help="scan rational primes for m-tame ones")
    sp.add_argument("--poly", required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--bound", type=int, required=True)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=_cmd_tame_scan)

    sp = sub.add_parser("signature", help="(r1, r2) of a number field")
    sp.add_argument("--poly", required=True)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=_cmd_signature)

    sp = sub.add_parser("rank", help="the free-rank formula")
    sp.add_argument("--poly", required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--s-mode", choices=["all", "subset"], default="all")
    sp.add_argument("--t-size", type=int, default=0)
    sp.add_argument("--chosen", help="subset-mode local degree indices")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=_cmd_rank)

    sp = sub.add_parser("qray", help="abelianization structure check over Q")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--primes", required=True, help="tame primes, comma separated")
    sp.add_argument("--B", type=int, required=True)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=_cmd_qray)

    sp = sub.add_parser("wieferich", help="Wieferich test or scan")
    sp.add_argument("--base", type=int, required=True)
    sp.add_argument("--p", type=int)
    sp.add_argument("--bound", type=int)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=_cmd_wieferich)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    config = {k: v for k, v in vars(args).items() if k not in ("func", "output") and v is not None}
    _header(args.command, config, args.seed)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(_dump({"error": type(exc).__name__, "detail": str(exc)}))
        return 2


if __name__ == "__main__":
    sys.exit(main())
