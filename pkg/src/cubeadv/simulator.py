"""Bounded-space online packing of run-length encoded cube streams.

An algorithm receives items one by one (``on_item``) or, when it can
shortcut exactly, whole runs of identical items (``on_segment``).  Both paths
must leave identical state behind; the tests hold them to that.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from decimal import Context, Decimal
from fractions import Fraction
from typing import Callable

from .adversary import InstanceStream, offline_bound, universal_lower_bound
from .codes import DEFAULT_CAPS, CapExceeded, Word
from .geometry import format_rat
from .packing import EpsilonPacking, place_grid, validate, weight


class UnknownAlgorithm(KeyError):
    pass


class BoundedSpaceViolation(AssertionError):
    pass


@dataclass
class OpenBin:
    k: int
    capacity: int
    used: int = 0
    placed: list[Word] = field(default_factory=list)

    @property
    def remaining(self) -> int:
        return self.capacity - self.used


class Algorithm:
    """Base class for bounded-space algorithms.

    Subclasses implement ``on_item``; ``on_segment`` falls back to feeding
    items one at a time unless overridden with an exact shortcut, in which
    case ``supports_counted`` should be True.
    """

    name = "abstract"
    supports_counted = False
    default_m = 1

    def __init__(self, d: int, eps: Fraction, M: int, materialize: bool = False):
        if M < 1:
            raise ValueError("M must be >= 1")
        self.d = d
        self.eps = Fraction(eps)
        self.declared_m = M
        self.materialize = materialize
        self.closed = 0
        self.closed_bins: list[OpenBin] = []
        self.on_event: Callable[["Algorithm"], None] | None = None

    @property
    def open_count(self) -> int:
        raise NotImplementedError

    def on_item(self, k: int) -> int:
        """Place one item; return the number of bins newly opened."""
        raise NotImplementedError

    def on_segment(self, k: int, count: int) -> int:
        return sum(self.on_item(k) for _ in range(count))

    def _event(self) -> None:
        if self.open_count > self.declared_m:
            raise BoundedSpaceViolation(
                f"{self.name}: {self.open_count} open bins exceed M={self.declared_m}"
            )
        if self.on_event is not None:
            self.on_event(self)

    def total_bins(self) -> int:
        return self.closed + self.open_count


class ClassNextFit(Algorithm):
    """One open bin per class, the least recently used one closed when a new
    class needs room.  Items take the grid slots of the homogeneous packing
    in lexicographic order and a bin closes once all ``(k-1)^d`` are used."""

    name = "ClassNextFit"
    supports_counted = True
    default_m = 2

    def __init__(self, d: int, eps: Fraction, M: int, materialize: bool = False):
        super().__init__(d, eps, M, materialize)
        self.bins: OrderedDict[int, OpenBin] = OrderedDict()

    @property
    def open_count(self) -> int:
        return len(self.bins)

    def _close(self, k: int) -> None:
        b = self.bins.pop(k)
        self.closed += 1
        if self.materialize:
            self.closed_bins.append(b)

    def _open(self, k: int) -> None:
        if len(self.bins) >= self.declared_m:
            self._close(next(iter(self.bins)))
        self.bins[k] = OpenBin(k, (k - 1) ** self.d)

    def _slot(self, k: int, index: int) -> Word:
        # index-th word of [k-1]^d in lexicographic order
        digits = []
        for _ in range(self.d):
            index, r = divmod(index, k - 1)
            digits.append(r + 1)
        return tuple(reversed(digits))

    def on_item(self, k: int) -> int:
        opened = 0
        if k not in self.bins:
            self._open(k)
            opened = 1
        self.bins.move_to_end(k)
        b = self.bins[k]
        if self.materialize:
            b.placed.append(self._slot(k, b.used))
        b.used += 1
        if b.remaining == 0:
            self._close(k)
        self._event()
        return opened

    def on_segment(self, k: int, count: int) -> int:
        if count <= 0:
            return 0
        if self.materialize:
            return super().on_segment(k, count)
        cap = (k - 1) ** self.d
        if k in self.bins:
            b = self.bins[k]
            self.bins.move_to_end(k)
            take = min(count, b.remaining)
            b.used += take
            count -= take
            if b.remaining == 0:
                self._close(k)
            self._event()
        if count == 0:
            return 0
        full, rest = divmod(count, cap)
        # first new bin may evict; the ones after it reuse the slot just freed
        self._open(k)
        self._event()
        opened = full + (1 if rest else 0)
        self.closed += full - (0 if rest else 1)
        self.bins[k].used = rest if rest else cap
        if not rest:
            self._close(k)
        self._event()
        return opened


ALGORITHMS: dict[str, type[Algorithm]] = {ClassNextFit.name: ClassNextFit}


def register(cls: type[Algorithm]) -> type[Algorithm]:
    ALGORITHMS[cls.name] = cls
    return cls


def make_algorithm(name: str, d: int, eps: Fraction, M: int, materialize: bool = False) -> Algorithm:
    try:
        cls = ALGORITHMS[name]
    except KeyError:
        raise UnknownAlgorithm(name) from None
    return cls(d, eps, M, materialize)


@dataclass
class SimReport:
    alg: str
    M: int
    per_segment: list[tuple[int, int]]
    total_bins: int
    offline_bound: int
    universal_lb: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.total_bins, self.offline_bound)

    def to_json(self) -> dict:
        return {
            "alg": self.alg,
            "M": self.M,
            "totalBins": str(self.total_bins),
            "offlineBound": str(self.offline_bound),
            "universalLB": str(self.universal_lb),
            "ratio": format_rat(self.ratio),
            "ratioDecimal": decimal_string(self.ratio),
            "perSegment": [{"k": k, "binsOpened": str(n)} for k, n in self.per_segment],
        }


def decimal_string(x: Fraction, digits: int = 12) -> str:
    """``x`` to ``digits`` significant digits, for display only."""
    if x == 0:
        return "0"
    ctx = Context(prec=digits)
    return str(ctx.divide(Decimal(x.numerator), Decimal(x.denominator)))


def simulate(
    i: InstanceStream,
    a: Algorithm,
    mode: str = "counted",
    cap: int = DEFAULT_CAPS.per_item,
) -> SimReport:
    """Feed the stream to an algorithm instance and tally the bins."""
    if mode not in ("counted", "peritem"):
        raise ValueError(f"unknown mode {mode!r}")
    counted = mode == "counted" and a.supports_counted and not a.materialize
    if not counted and i.total_items > cap:
        raise CapExceeded(f"{i.total_items} items exceed the per-item cap {cap}")
    per_segment = []
    for k, count in i.segments:
        if counted:
            opened = a.on_segment(k, count)
        else:
            opened = sum(a.on_item(k) for _ in range(count))
        per_segment.append((k, opened))
    return SimReport(
        a.name,
        i.M,
        per_segment,
        a.total_bins(),
        offline_bound(i, cap=0).bin_count,
        universal_lower_bound(i),
    )


def run(
    i: InstanceStream,
    alg: str = "ClassNextFit",
    mode: str = "counted",
    cap: int = DEFAULT_CAPS.per_item,
) -> SimReport:
    """Run the registered algorithm ``alg`` with ``M = i.M`` over the stream."""
    return simulate(i, make_algorithm(alg, i.d, i.eps, i.M), mode, cap)


def check_closed_bins(a: Algorithm) -> bool:
    """Every bin a materializing run closed holds a valid packing."""
    seen: dict[tuple, bool] = {}
    for b in a.closed_bins:
        key = (b.k, tuple(sorted(b.placed)))
        if key not in seen:
            cubes = [place_grid(b.k, w, a.eps) for w in key[1]]
            seen[key] = validate(EpsilonPacking.from_cubes(a.d, a.eps, cubes)).valid
        if not seen[key]:
            return False
    return True


@dataclass(frozen=True)
class RatioCheck:
    ratio: Fraction
    weight: Fraction
    at_least_half: bool
    equals_weight: bool
    universal_ratio: Fraction
    universal_at_least_half: bool

    @property
    def ok(self) -> bool:
        return self.at_least_half and self.universal_at_least_half


def ratio_check(report: SimReport, p: EpsilonPacking | Fraction) -> RatioCheck:
    """Compare the achieved and guaranteed ratios with ``w(U) / 2``."""
    w = p if isinstance(p, Fraction) else weight(p)
    uni = Fraction(report.universal_lb, report.offline_bound)
    return RatioCheck(
        report.ratio,
        w,
        report.ratio >= w / 2,
        report.ratio == w,
        uni,
        uni >= w / 2,
    )
