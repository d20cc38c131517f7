"""Command-line entry point: ``cubeadv <subcommand> ...``.

Exit codes: 0 ok, 2 construction retries exhausted, 3 validation failure,
4 exactness violation, 5 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .adversary import (
    ExactnessError,
    build_instance,
    instance_from_json,
    instance_from_text,
    instance_to_json,
    instance_to_text,
    offline_bound,
    universal_lower_bound,
)
from .codes import (
    Caps,
    CapExceeded,
    RetriesExhausted,
    build_separated_family,
    family_from_json,
    family_to_json,
    warmup_family,
)
from .geometry import GeometryError, format_rat, parse_rat
from .packing import (
    assemble,
    central_lemma_check,
    packing_from_json,
    packing_to_json,
    validate,
    weight,
)
from .simulator import ALGORITHMS, UnknownAlgorithm, decimal_string, run

EXIT_OK = 0
EXIT_RETRIES = 2
EXIT_INVALID = 3
EXIT_INEXACT = 4
EXIT_USAGE = 5

REPORT_COLUMNS = ["d", "S", "certifiedWeight", "targetD5lnD", "centralLemmaHolds", "ratioLB"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    d: int
    seed: int = 0
    eps: Fraction | None = None
    kind: str = "probabilistic"
    M: int = 2
    scale: str = "full"
    t: int = 1
    caps: Caps = field(default_factory=Caps)

    def __post_init__(self) -> None:
        if self.d < 2:
            raise UsageError("d must be >= 2")
        if self.eps is not None and not 0 < self.eps <= Fraction(1, self.d**2):
            raise UsageError(f"eps must lie in (0, 1/d^2] = (0, 1/{self.d**2}]")


def parse_caps(text: str | None) -> Caps:
    if not text:
        return Caps()
    names = {"explicit": "explicit_words", "ie": "ie_events", "peritem": "per_item"}
    kw = {}
    for part in text.split(","):
        key, _, val = part.partition("=")
        if key not in names:
            raise UsageError(f"unknown cap {key!r}; use {sorted(names)}")
        kw[names[key]] = int(val)
    try:
        return Caps(**kw)
    except ValueError as e:
        raise UsageError(str(e)) from None


def parse_scale(text: str) -> tuple[str, int]:
    if text == "full":
        return "full", 1
    if text.startswith("reduced"):
        _, _, t = text.partition(":")
        t = int(t) if t else 1
        if t < 1:
            raise UsageError("reduced scale needs t >= 1")
        return "reduced", t
    raise UsageError(f"scale must be 'full' or 'reduced:t', got {text!r}")


def parse_range(text: str) -> list[int]:
    """``start:stop:step`` with an inclusive stop."""
    parts = [int(x) for x in text.split(":")]
    if len(parts) == 2:
        parts.append(1)
    if len(parts) != 3 or parts[2] <= 0:
        raise UsageError(f"range must be start:stop[:step] with step > 0, got {text!r}")
    start, stop, step = parts
    return list(range(start, stop + 1, step))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _read_json(path: str):
    return json.loads(Path(path).read_text())


# --------------------------------------------------------------------------
# subcommands


def cmd_family(args) -> int:
    cfg = RunConfig(args.d, args.seed, kind=args.kind, caps=parse_caps(args.caps))
    if cfg.kind == "warmup":
        fam = warmup_family(cfg.d, cfg.caps)
    else:
        fam = build_separated_family(
            cfg.d, cfg.seed, mode=args.mode, caps=cfg.caps, max_retries=args.max_retries
        )
    _emit(_dump(family_to_json(fam)), args.out)
    return EXIT_OK


def cmd_pack(args) -> int:
    fam = family_from_json(_read_json(args.family))
    caps = parse_caps(args.caps)
    eps = parse_rat(args.eps) if args.eps else None
    RunConfig(fam.d, eps=eps, caps=caps)
    mode = args.mode
    if mode == "auto":
        small = all(c.exact for c in fam.codes.values()) and sum(
            c.count for c in fam.codes.values()
        ) <= caps.explicit_words
        mode = "materialized" if small else "counted"
    p = assemble(fam, eps, mode=mode, caps=caps)
    _emit(_dump(packing_to_json(p)), args.out)
    summary: dict[str, object] = {
        "mode": p.mode,
        "weight": format_rat(weight(p)),
        "weightKind": p.weight_kind,
    }
    code = EXIT_OK
    if p.cubes is not None:
        rep = validate(p)
        summary["validation"] = rep.to_json()
        if not rep.valid:
            code = EXIT_INVALID
    if args.report:
        Path(args.report).write_text(_dump(summary))
    elif args.out:
        sys.stdout.write(_dump(summary))
    return code


def cmd_instance(args) -> int:
    scale, t = parse_scale(args.scale)
    p = packing_from_json(_read_json(args.packing))
    M = args.M if args.M is not None else ALGORITHMS[args.alg].default_m
    i = build_instance(p, M, scale, t)
    _emit(_dump(instance_to_json(i)) if args.json else instance_to_text(i), args.out)
    return EXIT_OK


def _load_instance(path: str):
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return instance_from_json(json.loads(text))
    return instance_from_text(text)


def cmd_simulate(args) -> int:
    i = _load_instance(args.instance)
    caps = parse_caps(args.caps)
    report = run(i, args.alg, args.mode, caps.per_item)
    data = report.to_json()
    if args.cross_check:
        other = "peritem" if args.mode == "counted" else "counted"
        if run(i, args.alg, other, caps.per_item).to_json() != data:
            sys.stderr.write("counted and per-item runs disagree\n")
            _emit(_dump(data), args.out)
            return EXIT_INVALID
    _emit(_dump(data), args.out)
    return EXIT_OK


def report_row(d: int, seed: int) -> dict:
    r = central_lemma_check(d, seed)
    return {
        "d": d,
        "S": r.S,
        "weight": r.weight,
        "weightKind": r.weight_kind,
        "targetLo": r.target_lo,
        "targetHi": r.target_hi,
        "outcome": r.outcome,
        "ratioLB": r.weight / 2,
    }


def cmd_report(args) -> int:
    ds = parse_range(args.range)
    if any(d < 2 for d in ds):
        raise UsageError("every d in the range must be >= 2")
    if args.jobs > 1 and len(ds) > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            rows = list(ex.map(report_row, ds, [args.seed] * len(ds)))
    else:
        rows = [report_row(d, args.seed) for d in ds]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        holds = {"holds": "true", "fails": "false"}.get(r["outcome"], r["outcome"])
        w.writerow(
            [
                r["d"],
                r["S"],
                decimal_string(r["weight"]),
                decimal_string(r["targetHi"]),
                holds,
                decimal_string(r["ratioLB"]),
            ]
        )
    _emit(buf.getvalue(), args.out)
    if args.json_out:
        exact = {
            "seed": args.seed,
            "rows": [
                {
                    "d": r["d"],
                    "S": r["S"],
                    "certifiedWeight": format_rat(r["weight"]),
                    "weightKind": r["weightKind"],
                    "targetD5lnD": [format_rat(r["targetLo"]), format_rat(r["targetHi"])],
                    "centralLemma": r["outcome"],
                    "ratioLB": format_rat(r["ratioLB"]),
                }
                for r in rows
            ],
        }
        Path(args.json_out).write_text(_dump(exact))
    return EXIT_OK


def _sniff(path: str):
    text = Path(path).read_text()
    if not text.lstrip().startswith("{"):
        return "instance", instance_from_text(text)
    data = json.loads(text)
    if "codes" in data:
        return "family", family_from_json(data)
    if "mode" in data and "nu" in data:
        return "packing", packing_from_json(data)
    if "segments" in data:
        return "instance", instance_from_json(data)
    if "totalBins" in data:
        return "report", data
    if "rows" in data:
        return "reportJson", data
    raise UsageError(f"{path}: unrecognized file")


def cmd_verify(args) -> int:
    kind, obj = _sniff(args.file)
    out: dict[str, object] = {"file": args.file, "type": kind}
    ok = True
    if kind == "family":
        chk = obj.check(samples=args.samples, seed=args.seed)
        out["gapped"] = all(chk["gapped"].values())
        out["separated"] = {f"{a},{b}": r.kind if r.ok else "FAILED" for (a, b), r in chk["separated"].items()}
        ok = chk["ok"]
    elif kind == "packing":
        out["weight"] = format_rat(weight(obj))
        out["weightKind"] = obj.weight_kind
        if obj.cubes is not None:
            rep = validate(obj)
            out["validation"] = rep.to_json()
            ok = rep.valid
    elif kind == "instance":
        out["copies"] = str(obj.copies)
        out["weight"] = format_rat(obj.weight())
        out["offlineBound"] = str(offline_bound(obj, cap=0).bin_count)
        out["universalLB"] = str(universal_lower_bound(obj))
    elif kind == "report":
        ratio = parse_rat(obj["ratio"])
        ok = ratio == Fraction(int(obj["totalBins"]), int(obj["offlineBound"]))
        out["ratio"] = obj["ratio"]
    out["ok"] = ok
    sys.stdout.write(_dump(out))
    return EXIT_OK if ok else EXIT_INVALID


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="cubeadv", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    f = sub.add_parser("family", help="build a separated family of gapped codes")
    f.add_argument("--d", type=int, required=True)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--kind", choices=["warmup", "probabilistic"], default="probabilistic")
    f.add_argument("--mode", choices=["implicit", "explicit"], default="implicit")
    f.add_argument("--max-retries", type=int, default=100_000)
    f.add_argument("--caps")
    f.add_argument("--out")
    f.set_defaults(func=cmd_family)

    p = sub.add_parser("pack", help="assemble and validate the packing of a family")
    p.add_argument("family")
    p.add_argument("--eps")
    p.add_argument("--mode", choices=["auto", "materialized", "counted"], default="auto")
    p.add_argument("--caps")
    p.add_argument("--out")
    p.add_argument("--report", help="write the validation summary here")
    p.set_defaults(func=cmd_pack)

    i = sub.add_parser("instance", help="adversarial instance from a packing")
    i.add_argument("packing")
    i.add_argument("--M", type=int)
    i.add_argument("--alg", default="ClassNextFit")
    i.add_argument("--scale", default="full")
    i.add_argument("--json", action="store_true", help="write the JSON mirror instead")
    i.add_argument("--out")
    i.set_defaults(func=cmd_instance)

    s = sub.add_parser("simulate", help="run a bounded-space algorithm on an instance")
    s.add_argument("instance")
    s.add_argument("--alg", default="ClassNextFit")
    s.add_argument("--mode", choices=["counted", "peritem"], default="counted")
    s.add_argument("--cross-check", action="store_true")
    s.add_argument("--caps")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="certified weights over a range of d (CSV)")
    r.add_argument("--range", required=True, help="start:stop:step, stop inclusive")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--out")
    r.add_argument("--json-out")
    r.set_defaults(func=cmd_report)

    v = sub.add_parser("verify", help="re-check any file the other commands write")
    v.add_argument("file")
    v.add_argument("--samples", type=int, default=200)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RetriesExhausted as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_RETRIES
    except ExactnessError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INEXACT
    except UnknownAlgorithm as e:
        sys.stderr.write(f"error: unknown algorithm {e.args[0]!r}; known: {sorted(ALGORITHMS)}\n")
        return EXIT_USAGE
    except (UsageError, GeometryError, CapExceeded, ValueError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
