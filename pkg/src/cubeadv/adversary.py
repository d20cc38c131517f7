"""Adversarial instances for bounded-space algorithms.

The instance takes ``2 * M * multiplier`` copies of a packing and lists its
cubes class by class, in increasing ``k``.  It is run-length encoded: one
``(k, count)`` segment per class, with counts as Python ints.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

from .codes import DEFAULT_CAPS, Caps, CapExceeded, Word
from .geometry import format_rat, parse_rat
from .packing import EpsilonPacking, place, validate

DEFAULT_MAX_DIGITS = 100_000


class ExactnessError(ValueError):
    """Raised when an operation needs exact class counts but got bounds."""


@dataclass
class InstanceStream:
    d: int
    eps: Fraction
    segments: list[tuple[int, int]]
    M: int
    multiplier: int
    scale: str = "full"
    source: EpsilonPacking | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.eps = Fraction(self.eps)
        ks = [k for k, _ in self.segments]
        if ks != sorted(set(ks)):
            raise ValueError("segments must have strictly increasing classes")
        if any(c <= 0 for _, c in self.segments):
            raise ValueError("segment counts must be positive")
        if self.M < 1 or self.multiplier < 1:
            raise ValueError("M and multiplier must be positive")

    @property
    def copies(self) -> int:
        """Number of packing copies the stream was cut from."""
        return 2 * self.M * self.multiplier

    @property
    def total_items(self) -> int:
        return sum(c for _, c in self.segments)

    def nu(self) -> dict[int, int]:
        """Per-class counts of one packing copy, recovered from the stream."""
        out = {}
        for k, c in self.segments:
            q, r = divmod(c, self.copies)
            if r:
                raise ValueError(f"segment {k} count not a multiple of {self.copies}")
            out[k] = q
        return out

    def weight(self) -> Fraction:
        return sum((Fraction(n, (k - 1) ** self.d) for k, n in self.nu().items()), Fraction(0))

    def items(self, cap: int = DEFAULT_CAPS.per_item) -> Iterator[int]:
        """Expand to one class label per item."""
        if self.total_items > cap:
            raise CapExceeded(f"{self.total_items} items exceed the per-item cap {cap}")
        for k, c in self.segments:
            for _ in range(c):
                yield k


def _check_size(counts: list[int], max_digits: int) -> None:
    # digits of c are floor(log10 c) + 1 <= bit_length * log10(2) + 1
    for c in counts:
        if (c.bit_length() * 30103) // 100000 + 1 > max_digits:
            raise CapExceeded(f"segment count exceeds {max_digits} decimal digits")


def build_instance(
    p: EpsilonPacking,
    M: int,
    scale: str = "full",
    t: int = 1,
    max_digits: int = DEFAULT_MAX_DIGITS,
) -> InstanceStream:
    """Segments ``(k, 2 * M * multiplier * nu_k)`` for ``k`` in ``K(U)``.

    ``full`` uses ``multiplier = prod (k-1)^d``; ``reduced`` uses
    ``t * lcm (k-1)^d``, which keeps every count divisible by its class
    capacity while staying small.
    """
    if not p.exact:
        raise ExactnessError("instance construction needs exact nu_k")
    if M < 1:
        raise ValueError("M must be >= 1")
    caps = [(k - 1) ** p.d for k in p.K]
    if scale == "full":
        mult = math.prod(caps)
    elif scale == "reduced":
        if t < 1:
            raise ValueError("t must be >= 1")
        mult = t * math.lcm(*caps) if caps else t
    else:
        raise ValueError(f"unknown scale {scale!r}")
    counts = [2 * M * mult * p.nu[k] for k in p.K]
    _check_size(counts, max_digits)
    return InstanceStream(p.d, p.eps, list(zip(p.K, counts)), M, mult, scale, p)


def per_class_capacity(k: int, d: int) -> int:
    """Copies of the class-``k`` cube assumed to fit in one bin."""
    if k < 2:
        raise ValueError("k must be >= 2")
    return (k - 1) ** d


def max_grid_packing(k: int, d: int, eps: Fraction, steps: int) -> int:
    """Most disjoint class-``k`` cubes with corner coordinates in
    ``{j * side / steps} | {1 - side}``, by exhaustive branch and bound.
    Tiny inputs only."""
    eps = Fraction(eps)
    side = (1 + eps) / k
    step = side / steps
    coords = list(itertools.takewhile(lambda x: x + side <= 1, (j * step for j in itertools.count())))
    if 1 - side not in coords:
        coords.append(1 - side)
    corners = list(itertools.product(coords, repeat=d))
    n = len(corners)
    if n > 400:
        raise CapExceeded(f"{n} grid positions is too many for exhaustive search")
    conflict = [0] * n
    for a in range(n):
        for b in range(n):
            if all(abs(x - y) < side for x, y in zip(corners[a], corners[b])):
                conflict[a] |= 1 << b
    best = 0

    def search(avail: int, size: int) -> None:
        nonlocal best
        if size + avail.bit_count() <= best:
            return
        if not avail:
            best = size
            return
        low = avail & -avail
        i = low.bit_length() - 1
        search(avail & ~conflict[i], size + 1)
        search(avail & ~low, size)

    search((1 << n) - 1, 0)
    return best


@dataclass
class OfflineCertificate:
    bin_count: int
    assignment: list[tuple[int, int, Word]] | None = None  # (k, bin, word) per item

    def bins(self) -> dict[int, list[tuple[int, Word]]]:
        if self.assignment is None:
            raise ValueError("no explicit assignment")
        out: dict[int, list[tuple[int, Word]]] = {}
        for k, b, w in self.assignment:
            out.setdefault(b, []).append((k, w))
        return out


def offline_bound(i: InstanceStream, cap: int = DEFAULT_CAPS.per_item) -> OfflineCertificate:
    """The stream fits in ``2 * M * multiplier`` bins, one packing copy each.

    When the source packing is materialized and the stream is small, the
    assignment is spelled out: item ``j`` of class ``k`` goes to bin
    ``j // nu_k`` at the position of the ``(j mod nu_k)``-th class-``k`` cube.
    """
    bins = i.copies
    src = i.source
    if src is None or src.cubes is None or i.total_items > cap:
        return OfflineCertificate(bins)
    words = src.words_by_class()
    assignment = []
    for k, count in i.segments:
        ws = words[k]
        for j in range(count):
            b, r = divmod(j, len(ws))
            assignment.append((k, b, ws[r]))
    return OfflineCertificate(bins, assignment)


def validate_assignment(cert: OfflineCertificate, i: InstanceStream) -> bool:
    """Every bin of an explicit assignment is a valid packing, the bin count
    matches, and every item of the stream is assigned."""
    if cert.assignment is None:
        raise ValueError("no explicit assignment")
    if len(cert.assignment) != i.total_items:
        return False
    per_class: dict[int, int] = {}
    for k, _, _ in cert.assignment:
        per_class[k] = per_class.get(k, 0) + 1
    if per_class != dict(i.segments):
        return False
    bins = cert.bins()
    if len(bins) > cert.bin_count or any(not 0 <= b < cert.bin_count for b in bins):
        return False
    seen: dict[tuple, bool] = {}
    for content in bins.values():
        key = tuple(sorted(content))
        if key not in seen:
            cubes = [place(k, w, i.eps) for k, w in key]
            seen[key] = validate(EpsilonPacking.from_cubes(i.d, i.eps, cubes)).valid
        if not seen[key]:
            return False
    return True


def universal_lower_bound(i: InstanceStream) -> int:
    """Bins any algorithm keeping at most ``M`` bins open must use.

    Segment ``l`` needs ``f(l) / (k-1)^d`` bins, of which at most ``M`` were
    already open; the per-segment excess (never negative) is summed exactly
    and floored.
    """
    total = Fraction(0)
    for k, count in i.segments:
        total += max(Fraction(0), Fraction(count, per_class_capacity(k, i.d)) - i.M)
    return math.floor(total)


# --------------------------------------------------------------------------
# serialization


def instance_to_text(i: InstanceStream) -> str:
    lines = [f"d={i.d} eps={format_rat(i.eps)} M={i.M} mult={i.multiplier}"]
    lines.extend(f"{k} {c}" for k, c in i.segments)
    return "\n".join(lines) + "\n"


def instance_from_text(text: str) -> InstanceStream:
    rows = [ln for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty instance file")
    header = dict(tok.split("=", 1) for tok in rows[0].split())
    missing = {"d", "eps", "M", "mult"} - header.keys()
    if missing:
        raise ValueError(f"instance header lacks {sorted(missing)}")
    segments = []
    for ln in rows[1:]:
        k, c = ln.split()
        segments.append((int(k), int(c)))
    return InstanceStream(
        int(header["d"]), parse_rat(header["eps"]), segments, int(header["M"]), int(header["mult"])
    )


def instance_to_json(i: InstanceStream) -> dict:
    return {
        "d": i.d,
        "eps": format_rat(i.eps),
        "M": str(i.M),
        "mult": str(i.multiplier),
        "scale": i.scale,
        "segments": [[k, str(c)] for k, c in i.segments],
    }


def instance_from_json(data: Mapping) -> InstanceStream:
    return InstanceStream(
        int(data["d"]),
        parse_rat(data["eps"]),
        [(int(k), int(c)) for k, c in data["segments"]],
        int(data["M"]),
        int(data["mult"]),
        data.get("scale", "full"),
    )
