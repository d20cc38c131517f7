"""Exact rational coordinates and open axis-aligned boxes in the unit cube.

Every coordinate is a :class:`fractions.Fraction`; nothing on a correctness
path touches floating point.  Intervals and boxes are *open*, so two boxes
that share a face do not overlap.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rat = Fraction

__all__ = [
    "Rat",
    "Interval",
    "AxisBox",
    "GeometryError",
    "parse_rat",
    "format_rat",
    "base_coord",
    "unadjusted_base_coord",
    "interval_of",
    "grid_interval",
    "intervals_overlap",
    "boxes_overlap",
    "box_in_unit",
    "check_gap_fact",
]

_RAT_RE = re.compile(r"^(-?\d+)/(\d+)$")


class GeometryError(ValueError):
    """Raised on violated preconditions of the geometry primitives."""


def parse_rat(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"`` (or a bare integer) into a Fraction.

    Non-canonical input such as ``"2/4"`` is accepted and reduced.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    s = text.strip()
    m = _RAT_RE.match(s)
    if m:
        den = int(m.group(2))
        if den == 0:
            raise GeometryError(f"zero denominator in {text!r}")
        return Fraction(int(m.group(1)), den)
    if re.fullmatch(r"-?\d+", s):
        return Fraction(int(s))
    raise GeometryError(f"not a rational 'p/q': {text!r}")


def format_rat(x: Fraction | int) -> str:
    """Canonical ``"p/q"`` rendering; zero is ``"0/1"``."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Interval:
    """Open interval ``(lo, hi)`` with ``lo < hi``."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if not self.lo < self.hi:
            raise GeometryError(f"degenerate interval ({self.lo}, {self.hi})")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Fraction) -> bool:
        return self.lo < x < self.hi

    def __repr__(self) -> str:
        return f"({self.lo}, {self.hi})"


@dataclass(frozen=True)
class AxisBox:
    """Product of ``d`` open intervals."""

    dims: tuple[Interval, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", tuple(self.dims))
        if not self.dims:
            raise GeometryError("a box needs at least one dimension")

    @classmethod
    def from_bounds(cls, bounds: Iterable[tuple[Fraction, Fraction]]) -> "AxisBox":
        return cls(tuple(Interval(lo, hi) for lo, hi in bounds))

    @property
    def d(self) -> int:
        return len(self.dims)

    def contains_point(self, point: Sequence[Fraction]) -> bool:
        return all(iv.contains(x) for iv, x in zip(self.dims, point))

    def __repr__(self) -> str:
        return " x ".join(repr(iv) for iv in self.dims)


def _check_k_v(k: int, v: int) -> None:
    if k < 2:
        raise GeometryError(f"k must be >= 2, got {k}")
    if not 1 <= v <= k:
        raise GeometryError(f"letter {v} outside [1, {k}]")


def _check_eps(k: int, eps: Fraction) -> None:
    if not 0 < eps < Fraction(1, k - 1):
        raise GeometryError(f"eps={eps} outside (0, 1/{k - 1})")


def _base(k: int, v: int, eps: Fraction) -> Fraction:
    side = (1 + eps) / k
    if v < k:
        return side * (v - 1)
    return 1 - side


def base_coord(k: int, v: int, eps: Fraction) -> Fraction:
    """Lower endpoint of the slot for letter ``v`` of a size-``k`` cube.

    Letters below ``k`` sit on the regular grid of step ``(1+eps)/k``;
    the letter ``k`` is snapped flush against the far wall.
    """
    eps = Fraction(eps)
    _check_k_v(k, v)
    _check_eps(k, eps)
    return _base(k, v, eps)


def unadjusted_base_coord(k: int, v: int, eps: Fraction) -> Fraction:
    """Grid coordinate ``(1+eps)(v-1)/k`` with no snapping for ``v = k``."""
    eps = Fraction(eps)
    _check_k_v(k, v)
    return (1 + eps) * (v - 1) / k


def interval_of(k: int, v: int, eps: Fraction) -> Interval:
    eps = Fraction(eps)
    _check_k_v(k, v)
    _check_eps(k, eps)
    lo = _base(k, v, eps)
    return Interval(lo, lo + (1 + eps) / k)


def grid_interval(k: int, v: int, eps: Fraction) -> Interval:
    """Interval for ``v < k`` allowing the boundary ``eps = 1/(k-1)``.

    Used by homogeneous packings, where only letters in ``[k-1]`` occur
    and the open upper end may touch 1.
    """
    eps = Fraction(eps)
    if not 1 <= v < k:
        raise GeometryError(f"grid letter {v} outside [1, {k - 1}]")
    if not 0 < eps <= Fraction(1, k - 1):
        raise GeometryError(f"eps={eps} outside (0, 1/{k - 1}]")
    side = (1 + eps) / k
    return Interval(side * (v - 1), side * v)


def intervals_overlap(a: Interval, b: Interval) -> bool:
    return max(a.lo, b.lo) < min(a.hi, b.hi)


def boxes_overlap(a: AxisBox, b: AxisBox) -> bool:
    if a.d != b.d:
        raise GeometryError(f"dimension mismatch: {a.d} vs {b.d}")
    return all(intervals_overlap(x, y) for x, y in zip(a.dims, b.dims))


def box_in_unit(a: AxisBox) -> bool:
    return all(iv.lo >= 0 and iv.hi <= 1 for iv in a.dims)


def check_gap_fact(k: int, k2: int, S: int, eps: Fraction) -> bool:
    """Evaluate ``y_k(k-1) < x_k2(k2)`` exactly.

    True whenever ``eps <= 1/S**2``; larger ``eps`` is still evaluated
    (it must stay below ``1/(k2-1)`` so both coordinates are defined), which
    is how the failure regime is exhibited.
    """
    eps = Fraction(eps)
    if not 2 <= k < k2 <= S:
        raise GeometryError(f"need 2 <= k < k2 <= S, got k={k}, k2={k2}, S={S}")
    if not 0 < eps < Fraction(1, k2 - 1):
        raise GeometryError(f"eps={eps} outside (0, 1/{k2 - 1})")
    y = interval_of(k, k - 1, eps).hi
    x = base_coord(k2, k2, eps)
    return y < x
