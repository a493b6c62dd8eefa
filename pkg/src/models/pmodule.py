"""Persistence modules on finite posets.

A module assigns a finite-dimensional F_p space to each point and a matrix to
each generating edge. On a grid box, every axis carries a boundary policy:
reads beyond a *stabilized* side clamp to the box face, reads beyond any other
side are zero. This is how the box stands in for all of Z^n.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Hashable, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from src.algebra.exactalg import (
    ExactMatrix,
    cokernel_projection,
    default_prime,
    inverse,
    kernel_basis,
    solve_columns,
)
from src.models.poset import (
    FinitePoset,
    GridPoset,
    MonotoneMap,
    Point,
    PosetError,
    add,
    is_interval,
    principal_points,
    PrincipalSet,
    step,
)


class ModuleError(ValueError):
    """Raised on malformed modules or operations they do not support."""
    pass


Edge = Tuple[Hashable, Hashable]


@dataclass(frozen=True, eq=False)
class PersistenceModule:
    """A functor from a finite poset to finite-dimensional F_p spaces.

    Attributes:
        base: Underlying poset
        dims: Stalk dimension per point (missing points are zero)
        maps: Matrix per generating edge (u, w), shape dims[w] x dims[u]
        stabilized_left: Per-axis flag, grid bases only
        stabilized_right: Per-axis flag, grid bases only
        p: Field characteristic
    """
    base: FinitePoset
    dims: Mapping[Hashable, int]
    maps: Mapping[Edge, ExactMatrix] = field(default_factory=dict)
    stabilized_left: Tuple[bool, ...] = ()
    stabilized_right: Tuple[bool, ...] = ()
    p: int = field(default_factory=default_prime)
    _cache: Dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        for x in self.dims:
            if not self.base.contains(x):
                raise ModuleError(f"stalk given at {x!r}, outside {self.base}")
        dims = {x: int(self.dims.get(x, 0)) for x in self.base.points()}
        if any(d < 0 for d in dims.values()):
            raise ModuleError("negative stalk dimension")

        edges = self.base.generating_edges()
        edge_set = set(edges)
        unknown = [e for e in self.maps if tuple(e) not in edge_set]
        if unknown:
            raise ModuleError(f"maps given on non-generating edges {unknown[:3]}")
        maps = {}
        for u, w in edges:
            given = self.maps.get((u, w))
            if given is None:
                maps[(u, w)] = ExactMatrix.zeros(dims[w], dims[u], self.p)
                continue
            if given.p != self.p:
                raise ModuleError(f"map on {(u, w)} is over F_{given.p}, module over F_{self.p}")
            if given.shape != (dims[w], dims[u]):
                raise ModuleError(f"map on {(u, w)} has shape {given.shape}, expected {(dims[w], dims[u])}")
            maps[(u, w)] = given

        if isinstance(self.base, GridPoset):
            n = self.base.dim
            left = tuple(bool(v) for v in self.stabilized_left) or (False,) * n
            right = tuple(bool(v) for v in self.stabilized_right) or (False,) * n
            if len(left) != n or len(right) != n:
                raise ModuleError(f"boundary flags must have length {n}")
        else:
            if any(self.stabilized_left) or any(self.stabilized_right):
                raise ModuleError("boundary flags only apply to grid bases")
            left = right = ()

        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "stabilized_left", left)
        object.__setattr__(self, "stabilized_right", right)

    # ------------------------------------------------------------------
    # Stalks and transition maps
    # ------------------------------------------------------------------

    @property
    def is_grid(self) -> bool:
        return isinstance(self.base, GridPoset)

    def resolve(self, x: Hashable) -> Optional[Hashable]:
        """Box point whose stalk is read at ``x``, or None for a zero read."""
        if not self.is_grid:
            return self.base.require(x)
        box: GridPoset = self.base
        if len(x) != box.dim:
            raise ModuleError(f"point {x} does not match a {box.dim}-parameter module")
        resolved = []
        for i, (v, a, b) in enumerate(zip(x, box.lo, box.hi)):
            if v < a:
                if not self.stabilized_left[i]:
                    return None
                v = a
            elif v > b:
                if not self.stabilized_right[i]:
                    return None
                v = b
            resolved.append(v)
        return tuple(resolved)

    def dim(self, x: Hashable) -> int:
        resolved = self.resolve(tuple(x) if self.is_grid else x)
        return 0 if resolved is None else self.dims[resolved]

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def is_zero(self) -> bool:
        return self.total_dim() == 0

    def support(self) -> List[Hashable]:
        return [x for x in self.base.points() if self.dims[x] > 0]

    def transition(self, u: Hashable, w: Hashable) -> ExactMatrix:
        """M(u <= w); reads outside a grid box follow the boundary policy.

        Raises:
            ModuleError: If u is not below w
        """
        if not self.is_grid:
            if not self.base.leq(u, w):
                raise ModuleError(f"{u!r} is not below {w!r}")
            if u == w:
                return ExactMatrix.identity(self.dims[u], self.p)
            return self.maps[(u, w)]

        u, w = tuple(u), tuple(w)
        if any(a > b for a, b in zip(u, w)):
            raise ModuleError(f"{u} is not below {w}")
        ru, rw = self.resolve(u), self.resolve(w)
        if ru is None or rw is None:
            return ExactMatrix.zeros(self.dim(w), self.dim(u), self.p)
        key = (ru, rw)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        current = ru
        result = ExactMatrix.identity(self.dims[ru], self.p)
        for axis in range(len(ru)):
            while current[axis] < rw[axis]:
                nxt = step(current, axis, 1)
                result = self.maps[(current, nxt)] @ result
                current = nxt
        self._cache[key] = result
        return result

    def validate(self) -> bool:
        """True iff the maps compose functorially."""
        if self.is_grid:
            box: GridPoset = self.base
            for x in box.points():
                for i in range(box.dim):
                    for j in range(i + 1, box.dim):
                        xi, xj = step(x, i, 1), step(x, j, 1)
                        top = step(xi, j, 1)
                        if not box.contains(top):
                            continue
                        lhs = self.maps[(xi, top)] @ self.maps[(x, xi)]
                        rhs = self.maps[(xj, top)] @ self.maps[(x, xj)]
                        if lhs != rhs:
                            logger.debug(f"square at {x} on axes {i},{j} does not commute")
                            return False
            return True

        points = self.base.points()
        for a in points:
            for b in points:
                if not self.base.leq(a, b):
                    continue
                for c in points:
                    if not self.base.leq(b, c):
                        continue
                    if self.transition(b, c) @ self.transition(a, b) != self.transition(a, c):
                        logger.debug(f"composite {a!r} <= {b!r} <= {c!r} is not functorial")
                        return False
        return True

    def same_base(self, other: "PersistenceModule") -> bool:
        return self.base.same_as(other.base)


def _require_same_base(m: PersistenceModule, n: PersistenceModule):
    if not m.same_base(n):
        raise ModuleError(f"modules live on different bases: {m.base} and {n.base}")
    if m.p != n.p:
        raise ModuleError(f"modules over different fields F_{m.p} and F_{n.p}")


# ----------------------------------------------------------------------
# Constructors
# ----------------------------------------------------------------------

def zero_module(base: FinitePoset, p: Optional[int] = None) -> PersistenceModule:
    return PersistenceModule(base, {}, {}, p=default_prime() if p is None else p)


def interval_module(
    base: FinitePoset,
    subset: Iterable[Hashable],
    stabilized_left: Sequence[bool] = (),
    stabilized_right: Sequence[bool] = (),
    p: Optional[int] = None,
) -> PersistenceModule:
    """k[A]: dimension 1 on A, identities inside A, zero elsewhere.

    Raises:
        ModuleError: If the nonempty subset is not an interval
    """
    p = default_prime() if p is None else p
    members = [tuple(x) if isinstance(base, GridPoset) else x for x in subset]
    if not members:
        return PersistenceModule(base, {}, {}, tuple(stabilized_left), tuple(stabilized_right), p)
    try:
        ok = is_interval(base, members)
    except PosetError as exc:
        raise ModuleError(str(exc)) from exc
    if not ok:
        raise ModuleError("subset is not an interval (convex and connected)")
    inside = set(members)
    maps = {
        (u, w): ExactMatrix.identity(1, p)
        for u, w in base.generating_edges()
        if u in inside and w in inside
    }
    return PersistenceModule(base, {x: 1 for x in inside}, maps, tuple(stabilized_left), tuple(stabilized_right), p)


def principal_module(base: FinitePoset, x: Hashable, kind: Literal["up", "down"], p: Optional[int] = None) -> PersistenceModule:
    """k[U_x] or k[D_x].

    On a grid the module is stabilized on the unbounded side of the principal
    set (right for up-sets, left for down-sets) and ``x`` may lie outside the box.
    """
    if isinstance(base, GridPoset):
        points = principal_points(base, PrincipalSet(tuple(x), kind, virtual=True))
        flags = (True,) * base.dim
        if kind == "up":
            return interval_module(base, points, stabilized_right=flags, p=p)
        return interval_module(base, points, stabilized_left=flags, p=p)
    points = base.up_set(x) if kind == "up" else base.down_set(x)
    return interval_module(base, points, p=p)


def constant_module(base: FinitePoset, p: Optional[int] = None) -> PersistenceModule:
    if isinstance(base, GridPoset):
        flags = (True,) * base.dim
        return interval_module(base, base.points(), flags, flags, p=p)
    p = default_prime() if p is None else p
    maps = {e: ExactMatrix.identity(1, p) for e in base.generating_edges()}
    return PersistenceModule(base, {x: 1 for x in base.points()}, maps, p=p)


def direct_sum(modules: Sequence[PersistenceModule]) -> PersistenceModule:
    """Direct sum; grid summands must share their boundary flags."""
    if not modules:
        raise ModuleError("direct sum of no modules")
    first = modules[0]
    for m in modules[1:]:
        _require_same_base(first, m)
        if m.stabilized_left != first.stabilized_left or m.stabilized_right != first.stabilized_right:
            raise ModuleError("summands have different boundary flags")
    dims = {x: sum(m.dims[x] for m in modules) for x in first.base.points()}
    maps = {
        e: ExactMatrix.block_diagonal([m.maps[e] for m in modules], first.p)
        for e in first.base.generating_edges()
    }
    return PersistenceModule(first.base, dims, maps, first.stabilized_left, first.stabilized_right, first.p)


def merge_flags(modules: Sequence[PersistenceModule]) -> List[PersistenceModule]:
    """Give grid modules common flags where that does not change them.

    A side may be marked stabilized on a module whose face there is zero.
    """
    if not modules or not modules[0].is_grid:
        return list(modules)
    n = modules[0].base.dim
    left = tuple(any(m.stabilized_left[i] for m in modules) for i in range(n))
    right = tuple(any(m.stabilized_right[i] for m in modules) for i in range(n))
    merged = []
    for m in modules:
        box: GridPoset = m.base
        for i in range(n):
            if left[i] and not m.stabilized_left[i] and any(m.dims[x] for x in box.points() if x[i] == box.lo[i]):
                raise ModuleError(f"cannot stabilize axis {i} on the left: face is nonzero")
            if right[i] and not m.stabilized_right[i] and any(m.dims[x] for x in box.points() if x[i] == box.hi[i]):
                raise ModuleError(f"cannot stabilize axis {i} on the right: face is nonzero")
        merged.append(replace(m, stabilized_left=left, stabilized_right=right))
    return merged


def shift(m: PersistenceModule, a: Point) -> PersistenceModule:
    """M(a): the module x -> M_{x+a} on the same box."""
    if not m.is_grid:
        raise ModuleError("shifts are defined on grid modules only")
    box: GridPoset = m.base
    a = tuple(a)
    dims = {x: m.dim(add(x, a)) for x in box.points()}
    maps = {(u, w): m.transition(add(u, a), add(w, a)) for u, w in box.generating_edges()}
    return PersistenceModule(box, dims, maps, m.stabilized_left, m.stabilized_right, m.p)


def conjugate(m: PersistenceModule, bases: Mapping[Hashable, ExactMatrix]) -> PersistenceModule:
    """Isomorphic module after the change of basis ``bases[x]`` at each stalk."""
    def basis(x):
        given = bases.get(x)
        return ExactMatrix.identity(m.dims[x], m.p) if given is None else given

    maps = {(u, w): basis(w) @ m.maps[(u, w)] @ inverse(basis(u)) for u, w in m.base.generating_edges()}
    return replace(m, maps=maps)


def dual(m: PersistenceModule) -> PersistenceModule:
    """Pointwise dual on the opposite poset; boundary flags swap sides."""
    opposite, to_opposite = m.base.opposite()
    dims = {to_opposite(x): d for x, d in m.dims.items()}
    maps = {(to_opposite(w), to_opposite(u)): a.T for (u, w), a in m.maps.items()}
    return PersistenceModule(opposite, dims, maps, m.stabilized_right, m.stabilized_left, m.p)


# ----------------------------------------------------------------------
# Morphisms
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NaturalTransformation:
    """A morphism of modules, one matrix per point."""
    source: PersistenceModule
    target: PersistenceModule
    components: Mapping[Hashable, ExactMatrix] = field(default_factory=dict)

    def __post_init__(self):
        _require_same_base(self.source, self.target)
        components = {}
        for x in self.source.base.points():
            shape = (self.target.dims[x], self.source.dims[x])
            given = self.components.get(x)
            if given is None:
                components[x] = ExactMatrix.zeros(*shape, self.source.p)
            elif given.shape != shape:
                raise ModuleError(f"component at {x!r} has shape {given.shape}, expected {shape}")
            else:
                components[x] = given
        object.__setattr__(self, "components", components)

    @classmethod
    def identity(cls, m: PersistenceModule) -> "NaturalTransformation":
        return cls(m, m, {x: ExactMatrix.identity(d, m.p) for x, d in m.dims.items()})

    @classmethod
    def zero(cls, source: PersistenceModule, target: PersistenceModule) -> "NaturalTransformation":
        return cls(source, target, {})

    def component(self, x: Hashable) -> ExactMatrix:
        """Component at any point, reading outside a grid box like the modules do."""
        src, tgt = self.source, self.target
        if not src.is_grid:
            return self.components[x]
        x = tuple(x)
        if src.dim(x) == 0 or tgt.dim(x) == 0:
            return ExactMatrix.zeros(tgt.dim(x), src.dim(x), src.p)
        return self.components[src.resolve(x)]

    def is_natural(self) -> bool:
        for u, w in self.source.base.generating_edges():
            lhs = self.target.maps[(u, w)] @ self.components[u]
            rhs = self.components[w] @ self.source.maps[(u, w)]
            if lhs != rhs:
                logger.debug(f"naturality fails on edge {u!r} -> {w!r}")
                return False
        return True

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components.values())

    def compose(self, first: "NaturalTransformation") -> "NaturalTransformation":
        """self after first."""
        return NaturalTransformation(
            first.source, self.target,
            {x: self.components[x] @ first.components[x] for x in self.source.base.points()},
        )

    def dual(self) -> "NaturalTransformation":
        dual_source, dual_target = dual(self.target), dual(self.source)
        _, to_opposite = self.source.base.opposite()
        return NaturalTransformation(
            dual_source, dual_target,
            {to_opposite(x): c.T for x, c in self.components.items()},
        )


# ----------------------------------------------------------------------
# Limits and colimits of finite diagrams
# ----------------------------------------------------------------------

def _layout(points: Sequence[Hashable], dims: Mapping[Hashable, int]) -> Tuple[Dict[Hashable, int], int]:
    offsets, total = {}, 0
    for x in points:
        offsets[x] = total
        total += dims[x]
    return offsets, total


@dataclass(frozen=True, eq=False)
class LimitCone:
    """A limit, as a basis of its subspace of the product of the stalks."""
    points: Tuple[Hashable, ...]
    dims: Dict[Hashable, int]
    offsets: Dict[Hashable, int]
    basis: ExactMatrix

    @property
    def dimension(self) -> int:
        return self.basis.cols

    def project(self, x: Hashable) -> ExactMatrix:
        """Leg of the cone at ``x``."""
        start = self.offsets[x]
        return self.basis.take_rows(range(start, start + self.dims[x]))

    def map_to(self, other: "LimitCone", blocks: Optional[Callable[[Hashable], ExactMatrix]] = None) -> ExactMatrix:
        """Map lim(self) -> lim(other) induced by maps at the points of ``other``.

        With no ``blocks`` the induced map is the restriction to a subdiagram.

        Raises:
            ModuleError: If the componentwise maps do not define a cone over ``other``
        """
        p = self.basis.p
        parts = []
        for q in other.points:
            d = other.dims[q]
            if d == 0:
                continue
            if q in self.offsets and self.dims[q] > 0:
                leg = self.project(q)
                parts.append(leg if blocks is None else blocks(q) @ leg)
            else:
                parts.append(ExactMatrix.zeros(d, self.dimension, p))
        image = ExactMatrix.vstack(parts, cols=self.dimension, p=p)
        coords = solve_columns(other.basis, image)
        if coords is None:
            raise ModuleError("induced map does not land in the target limit")
        return coords


@dataclass(frozen=True, eq=False)
class ColimitCone:
    """A colimit, as a quotient of the direct sum of the stalks."""
    points: Tuple[Hashable, ...]
    dims: Dict[Hashable, int]
    offsets: Dict[Hashable, int]
    projection: ExactMatrix
    _section: List = field(default_factory=list, init=False, repr=False)

    @property
    def dimension(self) -> int:
        return self.projection.rows

    def inject(self, x: Hashable) -> ExactMatrix:
        """Leg of the cocone at ``x``."""
        start = self.offsets[x]
        return self.projection.take_columns(range(start, start + self.dims[x]))

    def section(self) -> ExactMatrix:
        """A right inverse of the projection."""
        if not self._section:
            lift = solve_columns(self.projection, ExactMatrix.identity(self.dimension, self.projection.p))
            self._section.append(lift)
        return self._section[0]

    def map_to(self, other: "ColimitCone", blocks: Optional[Callable[[Hashable], ExactMatrix]] = None) -> ExactMatrix:
        """Map colim(self) -> colim(other) induced by maps at the points of ``self``.

        With no ``blocks`` the induced map is the corestriction to a larger diagram.
        """
        p = self.projection.p
        lift = self.section()
        result = ExactMatrix.zeros(other.dimension, self.dimension, p)
        for q in self.points:
            d = self.dims[q]
            if d == 0 or q not in other.offsets or other.dims[q] == 0:
                continue
            start = self.offsets[q]
            piece = lift.take_rows(range(start, start + d))
            if blocks is not None:
                piece = blocks(q) @ piece
            result = result + other.inject(q) @ piece
        return result


Relation = Tuple[Hashable, Hashable, ExactMatrix]


def diagram_limit(points: Sequence[Hashable], dims: Mapping[Hashable, int], relations: Iterable[Relation], p: int) -> LimitCone:
    """Limit of a finite diagram given by its points and relations u -> w.

    The limit is the kernel of (v_x) -> (v_w - A v_u) over all relations.
    """
    points = tuple(points)
    offsets, total = _layout(points, dims)
    blocks = []
    for u, w, a in relations:
        if dims[w] == 0:
            continue
        row = np.zeros((dims[w], total), dtype=np.int64)
        row[:, offsets[w]:offsets[w] + dims[w]] += np.eye(dims[w], dtype=np.int64)
        row[:, offsets[u]:offsets[u] + dims[u]] -= a.array
        blocks.append(row)
    if blocks:
        constraints = ExactMatrix(np.vstack(blocks), p)
    else:
        constraints = ExactMatrix.zeros(0, total, p)
    return LimitCone(points, {x: dims[x] for x in points}, offsets, kernel_basis(constraints))


def diagram_colimit(points: Sequence[Hashable], dims: Mapping[Hashable, int], relations: Iterable[Relation], p: int) -> ColimitCone:
    """Colimit of a finite diagram: the direct sum modulo v_u ~ A v_u."""
    points = tuple(points)
    offsets, total = _layout(points, dims)
    columns = []
    for u, w, a in relations:
        if dims[u] == 0:
            continue
        col = np.zeros((total, dims[u]), dtype=np.int64)
        col[offsets[w]:offsets[w] + dims[w], :] += a.array
        col[offsets[u]:offsets[u] + dims[u], :] -= np.eye(dims[u], dtype=np.int64)
        columns.append(col)
    if columns:
        relations_matrix = ExactMatrix(np.hstack(columns), p)
    else:
        relations_matrix = ExactMatrix.zeros(total, 0, p)
    return ColimitCone(points, {x: dims[x] for x in points}, offsets, cokernel_projection(relations_matrix))


def _subset_relations(m: PersistenceModule, subset: Sequence[Hashable]) -> List[Relation]:
    return [(u, w, m.transition(u, w)) for u, w in m.base.comparable_pairs(subset)]


def _checked_subset(m: PersistenceModule, subset: Iterable[Hashable]) -> List[Hashable]:
    members = list(dict.fromkeys(tuple(x) if m.is_grid else x for x in subset))
    if not members:
        raise ModuleError("sections over an empty set are not defined")
    for x in members:
        if not m.base.contains(x):
            raise ModuleError(f"point {x!r} is outside {m.base}")
    return members


def section_cone(m: PersistenceModule, subset: Iterable[Hashable]) -> LimitCone:
    members = _checked_subset(m, subset)
    return diagram_limit(members, m.dims, _subset_relations(m, members), m.p)


def cosection_cone(m: PersistenceModule, subset: Iterable[Hashable]) -> ColimitCone:
    members = _checked_subset(m, subset)
    return diagram_colimit(members, m.dims, _subset_relations(m, members), m.p)


def sections(m: PersistenceModule, subset: Iterable[Hashable]) -> int:
    """dim lim of M over the subposet ``subset``."""
    return section_cone(m, subset).dimension


def cosections(m: PersistenceModule, subset: Iterable[Hashable]) -> int:
    """dim colim of M over the subposet ``subset``."""
    return cosection_cone(m, subset).dimension


# ----------------------------------------------------------------------
# Hom spaces and internal hom
# ----------------------------------------------------------------------

HomLayout = Dict[Hashable, Tuple[int, int, int]]


def _hom_system(m: PersistenceModule, n: PersistenceModule) -> Tuple[HomLayout, ExactMatrix]:
    """Basis of Hom(M, N) as vectors of row-major component blocks."""
    _require_same_base(m, n)
    p = m.p
    layout: HomLayout = {}
    total = 0
    for x in m.base.points():
        rows, cols = n.dims[x], m.dims[x]
        layout[x] = (total, rows, cols)
        total += rows * cols

    # vec(A X B) = (A kron B^T) vec(X) for row-major vectorization
    blocks = []
    for u, w in m.base.generating_edges():
        ou, nu, mu = layout[u]
        ow, nw, mw = layout[w]
        height = nw * mu
        if height == 0:
            continue
        row = np.zeros((height, total), dtype=np.int64)
        if nu * mu:
            row[:, ou:ou + nu * mu] += n.maps[(u, w)].kron(ExactMatrix.identity(mu, p)).array
        if nw * mw:
            row[:, ow:ow + nw * mw] -= ExactMatrix.identity(nw, p).kron(m.maps[(u, w)].T).array
        blocks.append(row)
    system = ExactMatrix(np.vstack(blocks), p) if blocks else ExactMatrix.zeros(0, total, p)
    return layout, kernel_basis(system)


def _components_from_vector(layout: HomLayout, vector: np.ndarray, p: int) -> Dict[Hashable, ExactMatrix]:
    return {
        x: ExactMatrix(vector[offset:offset + rows * cols], p, shape=(rows, cols))
        for x, (offset, rows, cols) in layout.items()
    }


def hom_basis(m: PersistenceModule, n: PersistenceModule) -> List[NaturalTransformation]:
    """A basis of the space of natural transformations M -> N."""
    layout, basis = _hom_system(m, n)
    return [
        NaturalTransformation(m, n, _components_from_vector(layout, basis.array[:, k], m.p))
        for k in range(basis.cols)
    ]


def hom_space(m: PersistenceModule, n: PersistenceModule) -> int:
    return _hom_system(m, n)[1].cols


def internal_hom(m: PersistenceModule, n: PersistenceModule) -> PersistenceModule:
    """Hom(M, N) with stalk Hom(M, N(x)) at x, N(x) the shift by x.

    A stabilized side of N carries over to the result when every shift past
    that face reads N in its stabilized region only: for the right side when
    the box starts at or above 0, for the left side when it ends at or below 0.
    """
    _require_same_base(m, n)
    if not m.is_grid:
        raise ModuleError("internal hom is defined on grid modules only")
    box: GridPoset = m.base
    points = box.points()
    systems = {x: _hom_system(m, shift(n, x)) for x in points}

    maps = {}
    for x, y in box.generating_edges():
        layout_x, basis_x = systems[x]
        layout_y, basis_y = systems[y]
        images = np.zeros((basis_y.rows, basis_x.cols), dtype=np.int64)
        for k in range(basis_x.cols):
            phi = _components_from_vector(layout_x, basis_x.array[:, k], m.p)
            for z in points:
                offset, rows, cols = layout_y[z]
                if rows * cols == 0:
                    continue
                psi = n.transition(add(z, x), add(z, y)) @ phi[z]
                images[offset:offset + rows * cols, k] = psi.array.reshape(-1)
        coords = solve_columns(basis_y, ExactMatrix(images, m.p))
        if coords is None:
            raise ModuleError(f"post-composition {x} -> {y} leaves the hom space")
        maps[(x, y)] = coords

    dims = {x: systems[x][1].cols for x in points}
    left = tuple(n.stabilized_left[i] and box.hi[i] <= 0 for i in range(box.dim))
    right = tuple(n.stabilized_right[i] and box.lo[i] >= 0 for i in range(box.dim))
    return PersistenceModule(box, dims, maps, left, right, m.p)


# ----------------------------------------------------------------------
# Direct and inverse images
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DirectImage:
    """f_* F (sheaf) or f_dagger F (cosheaf) together with the cones it was built from."""
    variant: Literal["sheaf", "cosheaf"]
    map: MonotoneMap
    source_module: PersistenceModule
    module: PersistenceModule
    cones: Dict[Hashable, object]

    def morphism_to(self, other: "DirectImage", phi: NaturalTransformation) -> NaturalTransformation:
        """f_* phi (or f_dagger phi) for phi: F -> G, with ``other`` the image of G."""
        if self.variant != other.variant or self.map is not other.map:
            raise ModuleError("direct images of different kinds or maps")
        components = {
            x: self.cones[x].map_to(other.cones[x], phi.components.__getitem__)
            for x in self.module.base.points()
        }
        return NaturalTransformation(self.module, other.module, components)


def push_forward(f: MonotoneMap, module: PersistenceModule, variant: Literal["sheaf", "cosheaf"] = "sheaf") -> DirectImage:
    """Direct image along a monotone map.

    Sheaf: stalk Gamma(f^{-1}(U_x); F) with restriction maps. Cosheaf: stalk
    L(f^{-1}(D_x); F) with corestriction maps.

    Raises:
        NonMonotoneMapError: If ``f`` is not monotone
    """
    f.require_monotone()
    if not f.source.same_as(module.base):
        raise ModuleError("module does not live on the source of the map")
    target = f.target
    cones = {}
    for x in target.points():
        if variant == "sheaf":
            pre = f.preimage_up(x)
            cones[x] = diagram_limit(pre, module.dims, _subset_relations(module, pre), module.p)
        elif variant == "cosheaf":
            pre = f.preimage_down(x)
            cones[x] = diagram_colimit(pre, module.dims, _subset_relations(module, pre), module.p)
        else:
            raise ModuleError(f"unknown direct image variant {variant!r}")

    maps = {(x, y): cones[x].map_to(cones[y]) for x, y in target.generating_edges()}
    dims = {x: cone.dimension for x, cone in cones.items()}
    if isinstance(target, GridPoset):
        # f lands in the box, so f^{-1}(U_x) only changes inside it
        flags = (True,) * target.dim, (False,) * target.dim
        left, right = flags if variant == "sheaf" else flags[::-1]
    else:
        left = right = ()
    image = PersistenceModule(target, dims, maps, left, right, module.p)
    logger.debug(f"{variant} direct image: total dimension {image.total_dim()}")
    return DirectImage(variant, f, module, image, cones)


def direct_image_sheaf(f: MonotoneMap, module: PersistenceModule) -> PersistenceModule:
    return push_forward(f, module, "sheaf").module


def direct_image_cosheaf(f: MonotoneMap, module: PersistenceModule) -> PersistenceModule:
    return push_forward(f, module, "cosheaf").module


def direct_image(f: MonotoneMap, module: PersistenceModule, variant: Literal["sheaf", "cosheaf"] = "sheaf") -> PersistenceModule:
    return push_forward(f, module, variant).module


def inverse_image(f: MonotoneMap, module: PersistenceModule) -> PersistenceModule:
    """f^{-1} G: stalk G_{f(s)} at s."""
    f.require_monotone()
    if not f.target.same_as(module.base):
        raise ModuleError("module does not live on the target of the map")
    source = f.source
    dims = {s: module.dim(f(s)) for s in source.points()}
    maps = {(s, t): module.transition(f(s), f(t)) for s, t in source.generating_edges()}
    return PersistenceModule(source, dims, maps, p=module.p)


def inverse_image_morphism(f: MonotoneMap, phi: NaturalTransformation, source: PersistenceModule, target: PersistenceModule) -> NaturalTransformation:
    """f^{-1} phi between the already computed inverse images."""
    return NaturalTransformation(source, target, {s: phi.component(f(s)) for s in f.source.points()})
