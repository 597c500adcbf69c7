"""Unsigned Q1.f fixed-point scalars with truncate-toward-zero quantization.

The fractional width ``f`` is a run-time parameter, so a single build can
sweep bit-widths without recompiling anything. A value is stored as a plain
Python integer ``raw`` scaled by 2^f, which keeps every operation
integer-exact and bit-identical across platforms. The representable range is
[0, 2 - 2^-f]: one integer bit, ``f`` fractional bits, no sign bit.

Two policies are deliberate and load-bearing:

* quantization truncates toward zero (``floor``), never rounds; rounding-up
  can push iterative accumulations past their analytic bounds, while
  truncation only ever loses mass;
* additions and multiplications saturate at the top of the range instead of
  wrapping, and saturation events are observable through a tally object so
  callers can assert that a computation never clipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_MIN_FRAC_BITS = 1
_MAX_FRAC_BITS = 62  # raw fields stay comfortably inside 64-bit words


class NegativeInputError(ValueError):
    """Quantization input below zero; the format is unsigned."""


class RangeOverflowError(ValueError):
    """Quantization input at or beyond 2, the top of the Q1.f range."""


class FormatMismatchError(ValueError):
    """Operands carry different formats; implicit conversion is never done."""


@dataclass(frozen=True)
class FxFormat:
    """Format descriptor: one integer bit plus ``frac_bits`` fractional bits."""

    frac_bits: int

    def __post_init__(self) -> None:
        if not isinstance(self.frac_bits, int):
            raise TypeError(f"frac_bits must be int, got {type(self.frac_bits).__name__}")
        if not _MIN_FRAC_BITS <= self.frac_bits <= _MAX_FRAC_BITS:
            raise ValueError(
                f"frac_bits must be in [{_MIN_FRAC_BITS}, {_MAX_FRAC_BITS}], got {self.frac_bits}"
            )

    @property
    def total_bits(self) -> int:
        return self.frac_bits + 1

    @property
    def scale(self) -> int:
        """Integer scaling factor 2^f."""
        return 1 << self.frac_bits

    @property
    def max_raw(self) -> int:
        """Largest legal raw field, i.e. the real value 2 - 2^-f."""
        return (1 << (self.frac_bits + 1)) - 1

    @property
    def resolution(self) -> float:
        return 1.0 / self.scale

    def __str__(self) -> str:
        return f"Q1.{self.frac_bits}"


@dataclass
class SaturationTally:
    """Mutable per-computation count of saturated operations.

    Valid PageRank inputs keep every intermediate below the range maximum,
    so a non-zero tally flags a contract violation somewhere upstream.
    """

    count: int = 0

    def bump(self, n: int = 1) -> None:
        self.count += n

    def __bool__(self) -> bool:
        return self.count > 0


@dataclass(frozen=True)
class FxValue:
    """One fixed-point number: an integer raw field and its format."""

    raw: int
    fmt: FxFormat

    def __post_init__(self) -> None:
        if self.raw < 0:
            raise NegativeInputError(f"raw {self.raw} below zero for {self.fmt}")
        if self.raw > self.fmt.max_raw:
            raise RangeOverflowError(f"raw {self.raw} above {self.fmt.max_raw} for {self.fmt}")

    def __float__(self) -> float:
        return to_real(self)

    def __add__(self, other: "FxValue") -> "FxValue":
        return fx_add(self, other)

    def __mul__(self, other: "FxValue") -> "FxValue":
        return fx_mul(self, other)


def quantize(x, fmt: FxFormat) -> FxValue:
    """Convert a real number in [0, 2) to fixed point by truncation.

    The raw field is floor(x * 2^f). Accepts floats, ints and Fractions;
    exact rationals quantize exactly, which the reference oracles rely on.
    """
    if x < 0:
        raise NegativeInputError(f"cannot quantize negative value {x!r}")
    raw = math.floor(x * fmt.scale)
    if raw > fmt.max_raw:
        raise RangeOverflowError(f"value {x!r} is outside [0, 2) for {fmt}")
    return FxValue(raw, fmt)


def _check_formats(a: FxValue, b: FxValue) -> None:
    if a.fmt != b.fmt:
        raise FormatMismatchError(f"mixed formats {a.fmt} and {b.fmt}")


def fx_add(a: FxValue, b: FxValue, tally: SaturationTally | None = None) -> FxValue:
    """Saturating addition. Clips at max_raw instead of wrapping."""
    _check_formats(a, b)
    raw = a.raw + b.raw
    if raw > a.fmt.max_raw:
        raw = a.fmt.max_raw
        if tally is not None:
            tally.bump()
    return FxValue(raw, a.fmt)


def fx_mul(a: FxValue, b: FxValue, tally: SaturationTally | None = None) -> FxValue:
    """Truncating multiplication through a double-width intermediate.

    The full 2f-bit product is formed exactly (Python integers widen as
    needed), then shifted right by f, discarding the low fractional bits.
    Saturates in the rare case the product exceeds the range (both operands
    above 1).
    """
    _check_formats(a, b)
    raw = (a.raw * b.raw) >> a.fmt.frac_bits
    if raw > a.fmt.max_raw:
        raw = a.fmt.max_raw
        if tally is not None:
            tally.bump()
    return FxValue(raw, a.fmt)


def to_real(v: FxValue) -> float:
    """Raw field back to a float, raw * 2^-f.

    Exact whenever raw fits in a float64 mantissa (always true for f <= 52);
    beyond that the result is correctly rounded. Use to_fraction for oracles
    that need exactness at any width.
    """
    return v.raw / v.fmt.scale


def to_fraction(v: FxValue):
    """Exact rational value raw / 2^f, for reference computations."""
    from fractions import Fraction

    return Fraction(v.raw, v.fmt.scale)
