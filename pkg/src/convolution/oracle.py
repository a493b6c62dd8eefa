"""Grid oracles for the sheaf and cosheaf convolutions.

For modules M, N on boxes of Z^n, the sheaf convolution is the right Kan
extension of the external tensor M (x) N along the sum map, the cosheaf
convolution the left one:

    (M * N)_x     = lim   { M_a (x) N_b : a + b >= x }
    (M (x)_gr N)_x = colim { M_a (x) N_b : a + b <= x }

Both index sets are infinite. Each is truncated to an extended box that
contains every point whose stalk can be nonzero under the boundary policies,
and the (co)limit is taken over the two diagonal levels of the truncated set
nearest to x.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, List, Literal, Optional

from loguru import logger

from src.algebra.exactalg import ExactMatrix, solve_columns
from src.models.pmodule import (
    ColimitCone,
    LimitCone,
    ModuleError,
    NaturalTransformation,
    PersistenceModule,
    diagram_colimit,
    diagram_limit,
)
from src.models.poset import GridPoset, Point, add, step

Mode = Literal["sheaf", "cosheaf"]


class SafeWindowError(ValueError):
    """Raised when an evaluation window exceeds what the inputs determine."""
    pass


def _require_grid(m: PersistenceModule, role: str) -> GridPoset:
    if not m.is_grid:
        raise ModuleError(f"{role} module must live on a grid box")
    return m.base


@dataclass(frozen=True, eq=False)
class ProductModule:
    """The external tensor product M (x) N on the product box, evaluated lazily.

    Stalks at (a, b) are M_a (x) N_b with basis index i * dim N_b + j.
    """
    first: PersistenceModule
    second: PersistenceModule

    def __post_init__(self):
        _require_grid(self.first, "first")
        _require_grid(self.second, "second")
        if self.first.p != self.second.p:
            raise ModuleError("factors over different fields")

    @property
    def split(self) -> int:
        return self.first.base.dim

    @property
    def base(self) -> GridPoset:
        a: GridPoset = self.first.base
        b: GridPoset = self.second.base
        return GridPoset(a.lo + b.lo, a.hi + b.hi)

    def dim(self, point: Point) -> int:
        k = self.split
        return self.first.dim(point[:k]) * self.second.dim(point[k:])

    def step_map(self, point: Point, axis: int) -> ExactMatrix:
        """Map from ``point`` to ``point + e_axis``."""
        k = self.split
        a, b = point[:k], point[k:]
        p = self.first.p
        if axis < k:
            return self.first.transition(a, step(a, axis, 1)).kron(ExactMatrix.identity(self.second.dim(b), p))
        return ExactMatrix.identity(self.first.dim(a), p).kron(self.second.transition(b, step(b, axis - k, 1)))

    def transition(self, u: Point, w: Point) -> ExactMatrix:
        k = self.split
        return self.first.transition(u[:k], w[:k]).kron(self.second.transition(u[k:], w[k:]))

    def morphism_block(self, point: Point, first_map: Optional[NaturalTransformation], second_map: Optional[NaturalTransformation]) -> ExactMatrix:
        """(phi (x) psi) at ``point``; a missing map stands for the identity."""
        k = self.split
        a, b = point[:k], point[k:]
        p = self.first.p
        left = first_map.component(a) if first_map is not None else ExactMatrix.identity(self.first.dim(a), p)
        right = second_map.component(b) if second_map is not None else ExactMatrix.identity(self.second.dim(b), p)
        return left.kron(right)

    def to_module(self) -> PersistenceModule:
        box = self.base
        dims = {x: self.dim(x) for x in box.points()}
        maps = {}
        for u, w in box.generating_edges():
            axis = next(i for i in range(box.dim) if u[i] != w[i])
            maps[(u, w)] = self.step_map(u, axis)
        return PersistenceModule(
            box, dims, maps,
            self.first.stabilized_left + self.second.stabilized_left,
            self.first.stabilized_right + self.second.stabilized_right,
            self.first.p,
        )


def external_tensor(m: PersistenceModule, n: PersistenceModule) -> ProductModule:
    return ProductModule(m, n)


def safe_window(m: PersistenceModule, n: PersistenceModule) -> GridPoset:
    """Largest window the oracles evaluate: [lo_M + lo_N, hi_M + hi_N].

    Stalks there are exact for the inputs extended past their boxes by the
    boundary policies, with zero beyond an unstabilized face. The bound is
    looser than the window on which an input cut off at a nonzero
    unstabilized face agrees with the module it was cut from; boxes with a
    zero margin on such sides, like those of realised barcodes, avoid that.
    """
    a, b = _require_grid(m, "first"), _require_grid(n, "second")
    if a.dim != b.dim:
        raise ModuleError(f"convolving a {a.dim}-parameter module with a {b.dim}-parameter one")
    return GridPoset(add(a.lo, b.lo), add(a.hi, b.hi))


def check_window(window: GridPoset, m: PersistenceModule, n: PersistenceModule) -> None:
    """Raises SafeWindowError naming the first violated margin."""
    safe = safe_window(m, n)
    if window.dim != safe.dim:
        raise SafeWindowError(f"window has {window.dim} parameters, inputs have {safe.dim}")
    for i in range(safe.dim):
        if window.lo[i] < safe.lo[i]:
            raise SafeWindowError(f"window lower margin on axis {i}: {window.lo[i]} < {safe.lo[i]}")
        if window.hi[i] > safe.hi[i]:
            raise SafeWindowError(f"window upper margin on axis {i}: {window.hi[i]} > {safe.hi[i]}")


def _extended_ranges(box: GridPoset) -> List[range]:
    ranges = []
    for a, b in zip(box.lo, box.hi):
        extra = (b - a) + 2
        ranges.append(range(a - extra, b + extra + 1))
    return ranges


class ConvolutionOracle:
    """Stalkwise evaluation of M * N (sheaf) or M (x)_gr N (cosheaf) on a window.

    The cones of every stalk are kept so that morphisms in either argument
    induce morphisms of the convolutions.
    """

    def __init__(self, first: PersistenceModule, second: PersistenceModule, window: GridPoset, mode: Mode):
        if mode not in ("sheaf", "cosheaf"):
            raise ValueError(f"unknown convolution mode {mode!r}")
        check_window(window, first, second)
        self.mode = mode
        self.window = window
        self.product = ProductModule(first, second)
        self.n = window.dim
        self._ranges = _extended_ranges(first.base) + _extended_ranges(second.base)
        self._cones: Dict[Point, LimitCone | ColimitCone] = {}
        self._module: Optional[PersistenceModule] = None
        logger.debug(f"{mode} oracle on {window}")

    @property
    def first(self) -> PersistenceModule:
        return self.product.first

    @property
    def second(self) -> PersistenceModule:
        return self.product.second

    def _levels(self, x: Point, axis: int) -> range:
        """Values of a_i + b_i kept in the diagram of the stalk at x."""
        ra, rb = self._ranges[axis], self._ranges[self.n + axis]
        lowest, highest = ra.start + rb.start, ra[-1] + rb[-1]
        if self.mode == "sheaf":
            bottom = max(x[axis], lowest)
            return range(bottom, min(bottom + 1, highest) + 1)
        top = min(x[axis], highest)
        return range(max(top - 1, lowest), top + 1)

    def _band(self, x: Point) -> List[Point]:
        """The two lowest (sheaf) or highest (cosheaf) diagonal levels of the index set.

        The band is initial in {a + b >= x} and final in {a + b <= x}, so the
        limit or colimit over it is the stalk.
        """
        per_axis = []
        for i in range(self.n):
            ra, rb = self._ranges[i], self._ranges[self.n + i]
            per_axis.append([(a, s - a) for s in self._levels(x, i) for a in ra if (s - a) in rb])
        return [
            tuple(c[0] for c in combo) + tuple(c[1] for c in combo)
            for combo in itertools.product(*per_axis)
        ]

    def _band_neighbor(self, x: Point, point: Point) -> Point:
        """A band point below (sheaf) or above (cosheaf) ``point``."""
        a, b = list(point[:self.n]), list(point[self.n:])
        for i in range(self.n):
            ra, rb = self._ranges[i], self._ranges[self.n + i]
            levels = self._levels(x, i)
            if self.mode == "sheaf":
                excess = a[i] + b[i] - levels[-1]
                if excess > 0:
                    da = min(excess, a[i] - ra.start)
                    a[i] -= da
                    b[i] -= excess - da
            else:
                deficit = levels[0] - a[i] - b[i]
                if deficit > 0:
                    da = min(deficit, ra[-1] - a[i])
                    a[i] += da
                    b[i] += deficit - da
        return tuple(a) + tuple(b)

    def _leg(self, cone: LimitCone | ColimitCone, x: Point, point: Point) -> ExactMatrix:
        """Leg of the stalk at x at any point of its truncated index set."""
        if point in cone.offsets:
            return cone.project(point) if self.mode == "sheaf" else cone.inject(point)
        near = self._band_neighbor(x, point)
        if self.mode == "sheaf":
            return self.product.transition(near, point) @ cone.project(near)
        return cone.inject(near) @ self.product.transition(point, near)

    def cone(self, x: Point) -> LimitCone | ColimitCone:
        x = tuple(x)
        cached = self._cones.get(x)
        if cached is not None:
            return cached
        product = self.product
        points = self._band(x)
        dims = {pt: product.dim(pt) for pt in points}
        relations = []
        for pt in points:
            if dims[pt] == 0:
                continue
            for axis in range(2 * self.n):
                if self.mode == "sheaf":
                    # predecessors in the band; zero ones force the section to vanish
                    u = step(pt, axis, -1)
                    if u in dims:
                        relations.append((u, pt, product.step_map(u, axis)))
                else:
                    # successors in the band; zero ones kill the cosection
                    w = step(pt, axis, 1)
                    if w in dims:
                        relations.append((pt, w, product.step_map(pt, axis)))
        if self.mode == "sheaf":
            cone = diagram_limit(points, dims, relations, product.first.p)
        else:
            cone = diagram_colimit(points, dims, relations, product.first.p)
        self._cones[x] = cone
        return cone

    def _induced(self, x: Point, other: "ConvolutionOracle", y: Point,
                 block: Optional[Callable[[Point], ExactMatrix]] = None) -> ExactMatrix:
        """Map from the stalk of ``self`` at x to the stalk of ``other`` at y.

        ``block`` maps product stalks of ``self`` to those of ``other``; without
        it the two oracles share a product and the map is the structure map.
        """
        source, target = self.cone(x), other.cone(y)
        p = self.product.first.p
        if self.mode == "sheaf":
            parts = []
            for q in target.points:
                if target.dims[q] == 0:
                    continue
                leg = self._leg(source, x, q)
                parts.append(leg if block is None else block(q) @ leg)
            image = ExactMatrix.vstack(parts, cols=source.dimension, p=p)
            coords = solve_columns(target.basis, image)
            if coords is None:
                raise ModuleError(f"induced map {x} -> {y} does not land in the target limit")
            return coords
        lift = source.section()
        result = ExactMatrix.zeros(target.dimension, source.dimension, p)
        for q in source.points:
            d = source.dims[q]
            if d == 0:
                continue
            start = source.offsets[q]
            piece = lift.take_rows(range(start, start + d))
            if block is not None:
                piece = block(q) @ piece
            result = result + other._leg(target, y, q) @ piece
        return result

    def module(self) -> PersistenceModule:
        """The convolution on the window.

        The window module is stabilized on a side exactly when both inputs are.
        """
        if self._module is not None:
            return self._module
        window = self.window
        dims = {x: self.cone(x).dimension for x in window.points()}
        maps = {(x, y): self._induced(x, self, y) for x, y in window.generating_edges()}
        left = tuple(a and b for a, b in zip(self.first.stabilized_left, self.second.stabilized_left))
        right = tuple(a and b for a, b in zip(self.first.stabilized_right, self.second.stabilized_right))
        self._module = PersistenceModule(window, dims, maps, left, right, self.first.p)
        logger.debug(f"{self.mode} convolution: total dimension {self._module.total_dim()}")
        return self._module

    def morphism_to(
        self,
        other: "ConvolutionOracle",
        first_map: Optional[NaturalTransformation] = None,
        second_map: Optional[NaturalTransformation] = None,
    ) -> NaturalTransformation:
        """phi * psi (or phi (x)_gr psi) between two oracles on the same window."""
        if other.mode != self.mode or not other.window.same_as(self.window):
            raise ModuleError("oracles differ in mode or window")
        product = self.product

        def block(point):
            return product.morphism_block(point, first_map, second_map)

        components = {x: self._induced(x, other, x, block) for x in self.window.points()}
        return NaturalTransformation(self.module(), other.module(), components)


def sheaf_convolve_oracle(m: PersistenceModule, n: PersistenceModule, window: GridPoset) -> PersistenceModule:
    """M * N on ``window``.

    Raises:
        SafeWindowError: If the window leaves [lo_M + lo_N, hi_M + hi_N]
    """
    return ConvolutionOracle(m, n, window, "sheaf").module()


def cosheaf_convolve_oracle(m: PersistenceModule, n: PersistenceModule, window: GridPoset) -> PersistenceModule:
    """M (x)_gr N on ``window``.

    Raises:
        SafeWindowError: If the window leaves [lo_M + lo_N, hi_M + hi_N]
    """
    return ConvolutionOracle(m, n, window, "cosheaf").module()
