"""Intervals, barcodes and closed-form convolutions of interval modules.

Endpoints are exact rationals (``fractions.Fraction``) or +-inf. Closed forms
cover half-open bars [a, b), including the unbounded ones (-inf, b) and
[a, inf); other bars raise UnsupportedIntervalError and are evaluated on the
grid by ``convolution.derived.grid_convolve_barcodes``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Literal, Mapping, Optional, Tuple, Union

Value = Union[Fraction, float]
INF = math.inf

Mode = Literal["sheaf", "cosheaf"]


class UnsupportedIntervalError(ValueError):
    """Raised for endpoint combinations without a closed form."""
    pass


def to_value(v) -> Value:
    """Exact endpoint value: Fraction for finite input, +-inf otherwise."""
    if isinstance(v, float):
        if math.isinf(v):
            return v
        return Fraction(str(v))
    if isinstance(v, str):
        text = v.strip().lower()
        if text in ("inf", "+inf", "infinity"):
            return INF
        if text in ("-inf", "-infinity"):
            return -INF
        return Fraction(text)
    return Fraction(v)


def is_finite(v: Value) -> bool:
    return not (isinstance(v, float) and math.isinf(v))


@dataclass(frozen=True, order=True)
class Endpoint:
    value: Value
    closed: bool

    def __post_init__(self):
        value = to_value(self.value)
        object.__setattr__(self, "value", value)
        if not is_finite(value) and self.closed:
            raise ValueError("infinite endpoints are open")


@dataclass(frozen=True)
class Interval:
    """An interval of the real line with typed endpoints."""
    left: Endpoint
    right: Endpoint

    def __post_init__(self):
        a, b = self.left.value, self.right.value
        if a > b or (a == b and not (self.left.closed and self.right.closed)):
            raise ValueError(f"empty interval {self}")
        if a == INF or b == -INF:
            raise ValueError("interval endpoints point the wrong way")

    @classmethod
    def half_open(cls, a, b) -> "Interval":
        """[a, b), or (-inf, b) when a is -inf."""
        a, b = to_value(a), to_value(b)
        return cls(Endpoint(a, is_finite(a)), Endpoint(b, False))

    @classmethod
    def closed(cls, a, b) -> "Interval":
        return cls(Endpoint(a, True), Endpoint(b, True))

    @property
    def is_half_open(self) -> bool:
        """[a, b) shaped, counting unbounded ends as such."""
        left_ok = self.left.closed or not is_finite(self.left.value)
        return left_ok and not self.right.closed

    @property
    def length(self) -> Value:
        return self.right.value - self.left.value

    def contains(self, t) -> bool:
        t = to_value(t)
        a, b = self.left.value, self.right.value
        above = t > a or (t == a and self.left.closed)
        below = t < b or (t == b and self.right.closed)
        return above and below

    def translate(self, s) -> "Interval":
        s = to_value(s)
        return Interval(Endpoint(self.left.value + s, self.left.closed), Endpoint(self.right.value + s, self.right.closed))

    def sort_key(self):
        return (self.left.value, not self.left.closed, self.right.value, self.right.closed)

    def __str__(self) -> str:
        lb = "[" if self.left.closed else "("
        rb = "]" if self.right.closed else ")"
        return f"{lb}{format_value(self.left.value)}, {format_value(self.right.value)}{rb}"


def format_value(v: Value) -> str:
    """'p/q' for rationals, '3' for integers, 'inf' / '-inf'."""
    if not is_finite(v):
        return "inf" if v > 0 else "-inf"
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


class Barcode:
    """A finite multiset of intervals."""

    __slots__ = ("_bars",)

    def __init__(self, bars: Union[Iterable[Interval], Mapping[Interval, int]] = ()):
        counts: Counter = Counter()
        items = bars.items() if isinstance(bars, Mapping) else ((bar, 1) for bar in bars)
        for bar, mult in items:
            if mult < 0:
                raise ValueError("negative multiplicity")
            if mult:
                counts[bar] += mult
        self._bars = counts

    def items(self) -> List[Tuple[Interval, int]]:
        return sorted(self._bars.items(), key=lambda item: item[0].sort_key())

    def expanded(self) -> List[Interval]:
        return [bar for bar, mult in self.items() for _ in range(mult)]

    def multiplicity(self, bar: Interval) -> int:
        return self._bars.get(bar, 0)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.expanded())

    def __len__(self) -> int:
        return sum(self._bars.values())

    def __bool__(self) -> bool:
        return bool(self._bars)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Barcode):
            return NotImplemented
        return self._bars == other._bars

    __hash__ = None

    def __add__(self, other: "Barcode") -> "Barcode":
        return Barcode(self._bars + other._bars)

    def translate(self, s) -> "Barcode":
        return Barcode({bar.translate(s): mult for bar, mult in self._bars.items()})

    def __repr__(self) -> str:
        return "Barcode(" + ", ".join(f"{bar}x{m}" if m > 1 else str(bar) for bar, m in self.items()) + ")"


class GradedBarcode:
    """Barcodes indexed by (co)homological degree; empty degrees are dropped."""

    __slots__ = ("_degrees",)

    def __init__(self, degrees: Optional[Mapping[int, Barcode]] = None):
        self._degrees: Dict[int, Barcode] = {int(d): b for d, b in (degrees or {}).items() if b}

    def __getitem__(self, degree: int) -> Barcode:
        return self._degrees.get(degree, Barcode())

    def degrees(self) -> List[int]:
        return sorted(self._degrees)

    def items(self) -> List[Tuple[int, Barcode]]:
        return [(d, self._degrees[d]) for d in self.degrees()]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedBarcode):
            return NotImplemented
        return self._degrees == other._degrees

    __hash__ = None

    def __add__(self, other: "GradedBarcode") -> "GradedBarcode":
        keys = set(self._degrees) | set(other._degrees)
        return GradedBarcode({d: self[d] + other[d] for d in keys})

    def translate(self, s) -> "GradedBarcode":
        return GradedBarcode({d: b.translate(s) for d, b in self._degrees.items()})

    def __repr__(self) -> str:
        return "GradedBarcode(" + ", ".join(f"{d}: {b!r}" for d, b in self.items()) + ")"


def translate(barcode: Barcode, s) -> Barcode:
    """Shift every bar by s; infinite endpoints stay put."""
    return barcode.translate(s)


# ----------------------------------------------------------------------
# Closed forms
# ----------------------------------------------------------------------

def _add(x: Value, y: Value, undefined: Value) -> Value:
    # -inf + inf; the sheaf calculus treats it as -inf, the cosheaf one as +inf
    if not is_finite(x) and not is_finite(y) and x != y:
        return undefined
    return x + y


def _bar(start: Value, end: Value) -> Optional[Interval]:
    if start >= end or start == INF or end == -INF:
        return None
    return Interval.half_open(start, end)


def _endpoints(bar: Interval) -> Tuple[Value, Value]:
    if not bar.is_half_open:
        raise UnsupportedIntervalError(f"no closed form for {bar}; use the grid oracle")
    return bar.left.value, bar.right.value


def _degree0_and_1(i: Interval, j: Interval, mode: Mode) -> Tuple[Optional[Interval], Optional[Interval]]:
    a, b = _endpoints(i)
    c, d = _endpoints(j)
    undefined = -INF if mode == "sheaf" else INF
    ad, bc = _add(a, d, undefined), _add(b, c, undefined)
    ac, bd = _add(a, c, undefined), _add(b, d, undefined)
    outer = _bar(max(ad, bc), bd)
    inner = _bar(ac, min(ad, bc))
    if mode == "sheaf":
        return outer, inner
    return inner, outer


def sheaf_convolve_intervals(i: Interval, j: Interval, derived: bool = False) -> GradedBarcode:
    """k[I] * k[J]; with ``derived`` also degree 1 of the derived convolution.

    Degree 0 is [max(a+d, b+c), b+d), degree 1 is [a+c, min(a+d, b+c)).

    Raises:
        UnsupportedIntervalError: If either bar is not half-open
    """
    zero, one = _degree0_and_1(i, j, "sheaf")
    return _graded(zero, one if derived else None)


def cosheaf_convolve_intervals(i: Interval, j: Interval, derived: bool = False) -> GradedBarcode:
    """k[I] (x)_gr k[J]; with ``derived`` also Tor_1.

    Degree 0 is [a+c, min(a+d, b+c)), degree 1 is [max(a+d, b+c), b+d).

    Raises:
        UnsupportedIntervalError: If either bar is not half-open
    """
    zero, one = _degree0_and_1(i, j, "cosheaf")
    return _graded(zero, one if derived else None)


def sheaf_convolve_underived(i: Interval, j: Interval) -> Barcode:
    return sheaf_convolve_intervals(i, j)[0]


def sheaf_convolve_derived(i: Interval, j: Interval) -> GradedBarcode:
    return sheaf_convolve_intervals(i, j, derived=True)


def cosheaf_convolve_derived(i: Interval, j: Interval) -> GradedBarcode:
    return cosheaf_convolve_intervals(i, j, derived=True)


def _graded(zero: Optional[Interval], one: Optional[Interval]) -> GradedBarcode:
    degrees = {}
    if zero is not None:
        degrees[0] = Barcode([zero])
    if one is not None:
        degrees[1] = Barcode([one])
    return GradedBarcode(degrees)


def convolve_intervals(i: Interval, j: Interval, mode: Mode, derived: bool = False) -> GradedBarcode:
    if mode == "sheaf":
        return sheaf_convolve_intervals(i, j, derived)
    if mode == "cosheaf":
        return cosheaf_convolve_intervals(i, j, derived)
    raise ValueError(f"unknown convolution mode {mode!r}")


def convolve_barcodes(x: Barcode, y: Barcode, mode: Mode, derived: bool = False) -> GradedBarcode:
    """Bilinear extension of the interval closed forms to barcodes."""
    degrees: Dict[int, Counter] = {}
    for i, mi in x.items():
        for j, mj in y.items():
            for degree, bars in convolve_intervals(i, j, mode, derived).items():
                bucket = degrees.setdefault(degree, Counter())
                for bar, m in bars.items():
                    bucket[bar] += m * mi * mj
    return GradedBarcode({d: Barcode(dict(c)) for d, c in degrees.items()})
