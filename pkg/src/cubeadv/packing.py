"""Placing cubes from codes, assembling eps-packings, and their weight.

A packing is *materialized* when every cube is held with its box (small
cases, fully validated geometrically) and *counted* when only the per-class
counts ``nu_k`` are known.  Counted packings are how large ``d`` is handled;
their counts come from the code size certificates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .codes import DEFAULT_CAPS, Caps, CapExceeded, CodeFamily, Word, build_separated_family, check_word
from .geometry import (
    AxisBox,
    GeometryError,
    box_in_unit,
    boxes_overlap,
    format_rat,
    grid_interval,
    interval_of,
    parse_rat,
)
from .numeric import ln_enclosure, precision_bits


@dataclass(frozen=True)
class PlacedCube:
    k: int
    word: Word
    box: AxisBox


def place(k: int, w: Iterable[int], eps: Fraction) -> PlacedCube:
    """The cube of class ``k`` addressed by word ``w``."""
    w = tuple(w)
    check_word(w, k, len(w))
    eps = Fraction(eps)
    return PlacedCube(k, w, AxisBox(tuple(interval_of(k, v, eps) for v in w)))


def place_grid(k: int, w: Iterable[int], eps: Fraction) -> PlacedCube:
    """Like :func:`place` for words in ``[k-1]^d``; admits ``eps = 1/(k-1)``."""
    w = tuple(w)
    return PlacedCube(k, w, AxisBox(tuple(grid_interval(k, v, eps) for v in w)))


@dataclass
class EpsilonPacking:
    d: int
    eps: Fraction
    nu: dict[int, int]
    cubes: list[PlacedCube] | None = None
    nu_kind: dict[int, str] = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.eps = Fraction(self.eps)
        for k, n in self.nu.items():
            # materialized candidates may be invalid; validate() reports that
            if n < 0 or (self.cubes is None and n > (k - 1) ** self.d):
                raise ValueError(f"nu_{k} = {n} outside [0, {k - 1}^{self.d}]")
            self.nu_kind.setdefault(k, "exact")

    @property
    def mode(self) -> str:
        return "materialized" if self.cubes is not None else "counted"

    @property
    def K(self) -> list[int]:
        return sorted(k for k, n in self.nu.items() if n > 0)

    @property
    def exact(self) -> bool:
        return all(self.nu_kind[k] == "exact" for k in self.K)

    @property
    def weight_kind(self) -> str:
        return "exact" if self.exact else "lowerBound"

    @classmethod
    def from_cubes(cls, d: int, eps: Fraction, cubes: list[PlacedCube], **kw) -> "EpsilonPacking":
        nu: dict[int, int] = {}
        for c in cubes:
            nu[c.k] = nu.get(c.k, 0) + 1
        return cls(d, eps, nu, list(cubes), **kw)

    def counted(self) -> "EpsilonPacking":
        return EpsilonPacking(self.d, self.eps, dict(self.nu), None, dict(self.nu_kind), dict(self.provenance))

    def words_by_class(self) -> dict[int, list[Word]]:
        if self.cubes is None:
            raise ValueError("counted packing has no cube list")
        out: dict[int, list[Word]] = {}
        for c in self.cubes:
            out.setdefault(c.k, []).append(c.word)
        return out


def homogeneous_packing(
    k: int, d: int, eps: Fraction, caps: Caps = DEFAULT_CAPS
) -> EpsilonPacking:
    """All ``(k-1)^d`` grid cubes of class ``k``."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if (k - 1) ** d > caps.explicit_words:
        raise CapExceeded(f"(k-1)^d = {(k - 1) ** d} exceeds cap {caps.explicit_words}")
    cubes = [place_grid(k, w, eps) for w in itertools.product(range(1, k), repeat=d)]
    return EpsilonPacking.from_cubes(d, eps, cubes, provenance={"homogeneous": k})


def assemble(
    family: CodeFamily,
    eps: Fraction | None = None,
    mode: str = "materialized",
    caps: Caps = DEFAULT_CAPS,
) -> EpsilonPacking:
    """Union over the family of the cubes addressed by each code.

    ``eps`` defaults to ``1/d^2`` and must not exceed ``1/S^2``.
    """
    d = family.d
    eps = Fraction(1, d * d) if eps is None else Fraction(eps)
    if not 0 < eps <= Fraction(1, family.S**2):
        raise GeometryError(f"eps={eps} must lie in (0, 1/S^2] with S={family.S}")
    prov = {"kind": family.kind, "seed": family.seed, "S": family.S}
    if mode == "counted":
        nu = {k: c.count for k, c in family.codes.items() if c.count > 0}
        kinds = {k: family.codes[k].count_kind for k in nu}
        return EpsilonPacking(d, eps, nu, None, kinds, prov)
    if mode != "materialized":
        raise ValueError(f"unknown mode {mode!r}")
    total = sum(c.count for c in family.codes.values())
    if total > caps.explicit_words:
        raise CapExceeded(f"{total} cubes exceed cap {caps.explicit_words}")
    cubes = []
    for k in sorted(family.codes):
        code = family.codes[k].materialize(caps)
        cubes.extend(place(k, w, eps) for w in code.iter_words())
    return EpsilonPacking.from_cubes(d, eps, cubes, provenance=prov)


@dataclass
class ValidationReport:
    n: int
    outside_unit: list[int]
    wrong_side: list[int]
    overlaps: list[tuple[int, int]]

    @property
    def valid(self) -> bool:
        return not (self.outside_unit or self.wrong_side or self.overlaps)

    def to_json(self) -> dict:
        return {
            "cubes": self.n,
            "valid": self.valid,
            "outsideUnit": self.outside_unit,
            "wrongSide": self.wrong_side,
            "overlaps": [list(p) for p in self.overlaps],
        }


def validate(p: EpsilonPacking) -> ValidationReport:
    """Exhaustive check: containment, side lengths, and all pairs."""
    if p.cubes is None:
        raise ValueError("validate needs a materialized packing")
    cubes = p.cubes
    outside = [i for i, c in enumerate(cubes) if not box_in_unit(c.box)]
    wrong = [
        i
        for i, c in enumerate(cubes)
        if c.box.d != p.d or any(iv.length != (1 + p.eps) / c.k for iv in c.box.dims)
    ]
    overlaps = [
        (i, j)
        for i in range(len(cubes))
        for j in range(i + 1, len(cubes))
        if boxes_overlap(cubes[i].box, cubes[j].box)
    ]
    return ValidationReport(len(cubes), outside, wrong, overlaps)


def sweep_overlaps(cubes: list[PlacedCube]) -> list[tuple[int, int]]:
    """Overlapping pairs via a sweep along the first axis.

    Independent of :func:`validate`; used to cross-check it.
    """
    events = sorted(range(len(cubes)), key=lambda i: cubes[i].box.dims[0].lo)
    active: list[int] = []
    found = []
    for i in events:
        lo = cubes[i].box.dims[0].lo
        active = [j for j in active if cubes[j].box.dims[0].hi > lo]
        for j in active:
            a, b = cubes[i].box.dims, cubes[j].box.dims
            if all(max(x.lo, y.lo) < min(x.hi, y.hi) for x, y in zip(a[1:], b[1:])):
                found.append((min(i, j), max(i, j)))
        active.append(i)
    return sorted(found)


def weight(p: EpsilonPacking) -> Fraction:
    """``sum over k of nu_k / (k-1)^d``; a certified lower bound when any
    count is itself only a lower bound (see ``p.weight_kind``)."""
    return sum((Fraction(p.nu[k], (k - 1) ** p.d) for k in p.K), Fraction(0))


@dataclass(frozen=True)
class LemmaCheck:
    d: int
    S: int
    outcome: str  # "holds" | "fails" | "inconclusive"
    weight: Fraction
    weight_kind: str
    target_lo: Fraction
    target_hi: Fraction
    bits: int

    @property
    def holds(self) -> bool:
        return self.outcome == "holds"


def compare_weight_target(W: Fraction, d: int, bits: int | None = None, max_bits: int = 8192):
    """Decide ``5 W ln d >= d`` with a doubling-precision enclosure of ``ln d``.

    Returns ``(outcome, target_lo, target_hi, bits)`` where the target is an
    enclosure of ``d / (5 ln d)``.
    """
    bits = bits or precision_bits()
    while True:
        lo, hi = ln_enclosure(d, bits)
        t_lo, t_hi = Fraction(d) / (5 * hi), Fraction(d) / (5 * lo)
        if W >= t_hi:
            return "holds", t_lo, t_hi, bits
        if W < t_lo:
            return "fails", t_lo, t_hi, bits
        if bits >= max_bits:
            return "inconclusive", t_lo, t_hi, bits
        bits *= 2


def central_lemma_check(
    d: int,
    seed: int = 0,
    eps: Fraction | None = None,
    caps: Caps = DEFAULT_CAPS,
    family: CodeFamily | None = None,
) -> LemmaCheck:
    """Build the randomized packing at ``d`` and test ``w(U) >= d / (5 ln d)``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    fam = family or build_separated_family(d, seed, caps=caps)
    p = assemble(fam, eps if eps is not None else Fraction(1, d * d), mode="counted", caps=caps)
    W = weight(p)
    outcome, t_lo, t_hi, bits = compare_weight_target(W, d)
    return LemmaCheck(d, fam.S, outcome, W, p.weight_kind, t_lo, t_hi, bits)


# --------------------------------------------------------------------------
# JSON


def packing_to_json(p: EpsilonPacking) -> dict:
    out: dict[str, object] = {"d": p.d, "eps": format_rat(p.eps), "mode": p.mode}
    if p.cubes is not None:
        out["cubes"] = [{"k": c.k, "word": list(c.word)} for c in p.cubes]
    out["nu"] = {str(k): str(p.nu[k]) for k in p.K}
    out["nuKind"] = {str(k): p.nu_kind[k] for k in p.K}
    out["weight"] = format_rat(weight(p))
    out["weightKind"] = p.weight_kind
    return out


def packing_from_json(data: Mapping) -> EpsilonPacking:
    d, eps = int(data["d"]), parse_rat(data["eps"])
    if data["mode"] == "materialized":
        cubes = [place(int(c["k"]), c["word"], eps) for c in data["cubes"]]
        p = EpsilonPacking.from_cubes(d, eps, cubes)
    elif data["mode"] == "counted":
        default = data.get("weightKind", "exact")
        kinds = data.get("nuKind", {})
        nu = {int(k): int(v) for k, v in data["nu"].items()}
        p = EpsilonPacking(d, eps, nu, None, {k: kinds.get(str(k), default) for k in nu})
    else:
        raise ValueError(f"unknown packing mode {data['mode']!r}")
    stated = data.get("weight")
    if stated is not None and parse_rat(stated) != weight(p):
        raise ValueError("weight field disagrees with the counts")
    return p
