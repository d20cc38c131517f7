"""Rigorous enclosures of natural logarithms as pairs of rationals."""

from __future__ import annotations

import math
import os
from fractions import Fraction

from mpmath import libmp

DEFAULT_PRECISION_BITS = 128
PRECISION_ENV = "CUBEADV_PRECISION_BITS"


def precision_bits() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return DEFAULT_PRECISION_BITS
    bits = int(raw)
    if bits < 53:
        raise ValueError(f"{PRECISION_ENV} must be >= 53, got {bits}")
    return bits


def _to_fraction(x) -> Fraction:
    sign, man, exp, _ = x
    v = Fraction(int(man)) * (Fraction(2) ** exp)
    return -v if sign else v


def ln_enclosure(n: int, bits: int | None = None) -> tuple[Fraction, Fraction]:
    """Rationals ``lo <= ln(n) <= hi`` for an integer ``n >= 1``.

    Directed rounding from mpmath plus a few ulps of slack, so the enclosure
    does not rely on the last bit being correctly rounded.
    """
    if n < 1:
        raise ValueError("ln_enclosure needs n >= 1")
    if n == 1:
        return Fraction(0), Fraction(0)
    bits = bits or precision_bits()
    x = libmp.from_int(n)
    lo = _to_fraction(libmp.mpf_log(x, bits, libmp.round_floor))
    hi = _to_fraction(libmp.mpf_log(x, bits, libmp.round_ceiling))
    slack = Fraction(1, 2 ** (bits - 4)) * hi
    return lo - slack, hi + slack


def ceil_upward(lo: Fraction, hi: Fraction) -> int:
    """Ceiling of a quantity known only to lie in ``[lo, hi]``.

    If the enclosure straddles an integer the larger candidate wins.
    """
    return math.ceil(hi)
