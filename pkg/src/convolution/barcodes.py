"""Barcodes of one-parameter grid modules and their realisations.

A grid point t stands for the unit cell [t, t+1) of the real line, so a module
supported on the points a..b-1 has the half-open bar [a, b). On a refined grid
(``scale`` s) point t stands for [t/s, (t+1)/s).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Literal, Optional, Tuple

from loguru import logger

from src.algebra.exactalg import ExactMatrix, cokernel_projection, rank, solve_columns
from src.models.interval import Barcode, GradedBarcode, INF, Interval, is_finite
from src.models.pmodule import (
    ModuleError,
    PersistenceModule,
    direct_sum,
    interval_module,
    merge_flags,
    zero_module,
)
from src.models.poset import GridPoset

# The sheaf oracle on Z evaluates realised half-open bars one step to the left
SHEAF_GRID_OFFSET = 1


def _require_line(m: PersistenceModule) -> GridPoset:
    if not m.is_grid or m.base.dim != 1:
        raise ModuleError("barcodes are defined for one-parameter grid modules")
    return m.base


def _bar(first: int, last: int, left_infinite: bool, right_infinite: bool, scale: int) -> Interval:
    left = -INF if left_infinite else Fraction(first, scale)
    right = INF if right_infinite else Fraction(last + 1, scale)
    return Interval.half_open(left, right)


def barcode_extract(m: PersistenceModule, scale: int = 1) -> Barcode:
    """Barcode of a one-parameter module by inclusion-exclusion of ranks.

    A bar alive at a stabilized box face extends to infinity on that side.

    Raises:
        ModuleError: If the module is not a valid one-parameter grid module
    """
    line = _require_line(m)
    if not m.validate():
        raise ModuleError("module is not functorial")
    lo, hi = line.lo[0], line.hi[0]
    left, right = m.stabilized_left[0], m.stabilized_right[0]

    ranks: Dict[Tuple[int, int], int] = {}

    def r(i: int, j: int) -> int:
        if i > j:
            return 0
        key = (i, j)
        if key not in ranks:
            ranks[key] = rank(m.transition((i,), (j,)))
        return ranks[key]

    bars: Dict[Interval, int] = {}

    def record(bar: Interval, mult: int):
        if mult < 0:
            raise ModuleError("negative bar multiplicity; module is inconsistent")
        if mult:
            bars[bar] = bars.get(bar, 0) + mult

    for i in range(lo, hi + 1):
        for j in range(i, hi + 1):
            mult = r(i, j) - r(i - 1, j) - r(i, j + 1) + r(i - 1, j + 1)
            record(_bar(i, j, False, False, scale), mult)
    if left:
        for j in range(lo, hi + 1):
            record(_bar(lo, j, True, False, scale), r(lo - 1, j) - r(lo - 1, j + 1))
    if right:
        for i in range(lo, hi + 1):
            record(_bar(i, hi, False, True, scale), r(i, hi + 1) - r(i - 1, hi + 1))
    if left and right:
        record(_bar(lo, hi, True, True, scale), r(lo - 1, hi + 1))
    return Barcode(bars)


def graded_barcode_extract(modules: Dict[int, PersistenceModule], scale: int = 1) -> GradedBarcode:
    return GradedBarcode({degree: barcode_extract(m, scale) for degree, m in modules.items()})


def grid_to_closed_form(graded: GradedBarcode, mode: Literal["sheaf", "cosheaf"]) -> GradedBarcode:
    """Translate barcodes read off grid convolutions into closed-form conventions."""
    if mode == "sheaf":
        return graded.translate(SHEAF_GRID_OFFSET)
    return graded


def _grid_range(bar: Interval, scale: int, box: GridPoset) -> Tuple[int, int]:
    lo, hi = box.lo[0], box.hi[0]

    def scaled(v) -> int:
        value = Fraction(v) * scale
        if value.denominator != 1:
            raise ModuleError(f"endpoint {v} is not on the grid of step 1/{scale}")
        return value.numerator

    if is_finite(bar.left.value):
        first = scaled(bar.left.value) + (0 if bar.left.closed else 1)
        if first < lo:
            raise ModuleError(f"bar {bar} starts below the box")
    else:
        first = lo
    if is_finite(bar.right.value):
        last = scaled(bar.right.value) - (0 if bar.right.closed else 1)
        if last > hi:
            raise ModuleError(f"bar {bar} ends above the box")
    else:
        last = hi
    if first > last:
        raise ModuleError(f"bar {bar} contains no grid point")
    return first, last


def realize_barcode(box: GridPoset, barcode: Barcode, scale: int = 1, p: Optional[int] = None) -> PersistenceModule:
    """Direct sum of interval modules realising ``barcode`` on a one-parameter box.

    Raises:
        ModuleError: If a bar does not fit the box or the grid step
    """
    if box.dim != 1:
        raise ModuleError("barcodes realise on one-parameter boxes")
    summands = []
    for bar in barcode:
        first, last = _grid_range(bar, scale, box)
        left = (not is_finite(bar.left.value),)
        right = (not is_finite(bar.right.value),)
        summands.append(interval_module(box, [(t,) for t in range(first, last + 1)], left, right, p))
    if not summands:
        return zero_module(box, p)
    return direct_sum(merge_flags(summands))


# ----------------------------------------------------------------------
# Interval decomposition with explicit bases
# ----------------------------------------------------------------------

@dataclass
class IntervalSummand:
    """One bar of a one-parameter module with its basis vector at each point."""
    first: int
    last: int
    left_infinite: bool = False
    right_infinite: bool = False
    vectors: Dict[int, ExactMatrix] = field(default_factory=dict)

    def bar(self, scale: int = 1) -> Interval:
        return _bar(self.first, self.last, self.left_infinite, self.right_infinite, scale)

    def alive(self, t: int) -> bool:
        return t in self.vectors


def interval_basis(m: PersistenceModule) -> List[IntervalSummand]:
    """Decompose a one-parameter module into interval summands (elder rule).

    At each point the images of the live bars are reduced oldest first; a bar
    whose image depends on older ones dies, after subtracting that dependency
    along its whole lifetime so the remaining vectors stay compatible.
    """
    line = _require_line(m)
    lo, hi = line.lo[0], line.hi[0]
    p = m.p
    alive: List[IntervalSummand] = []
    finished: List[IntervalSummand] = []
    for t in range(lo, hi + 1):
        dim = m.dims[(t,)]
        kept: List[IntervalSummand] = []
        images: List[ExactMatrix] = []
        for summand in alive:
            image = m.maps[((t - 1,), (t,))] @ summand.vectors[t - 1]
            span = ExactMatrix.hstack(images, rows=dim, p=p)
            coords = solve_columns(span, image)
            if coords is None:
                summand.vectors[t] = image
                kept.append(summand)
                images.append(image)
                continue
            for r in list(summand.vectors):
                correction = ExactMatrix.zeros(summand.vectors[r].rows, 1, p)
                for k, older in enumerate(kept):
                    c = coords.entry(k, 0)
                    if c:
                        correction = correction + older.vectors[r].scale(c)
                summand.vectors[r] = summand.vectors[r] - correction
            summand.last = t - 1
            finished.append(summand)

        q = cokernel_projection(ExactMatrix.hstack(images, rows=dim, p=p))
        births = solve_columns(q, ExactMatrix.identity(q.rows, p))
        born = [
            IntervalSummand(t, t, left_infinite=(t == lo and m.stabilized_left[0]), vectors={t: births.take_columns([k])})
            for k in range(births.cols)
        ]
        alive = kept + born

    for summand in alive:
        summand.last = hi
        summand.right_infinite = m.stabilized_right[0]
    summands = finished + alive
    logger.debug(f"interval decomposition: {len(summands)} summands")
    return sorted(summands, key=lambda s: (s.first, s.last))


def decomposition_basis(m: PersistenceModule, summands: List[IntervalSummand], t: int) -> ExactMatrix:
    """Columns: the vectors at ``t`` of the summands alive there, in order."""
    columns = [s.vectors[t] for s in summands if s.alive(t)]
    return ExactMatrix.hstack(columns, rows=m.dims[(t,)], p=m.p)
