"""Finite posets: integer grid boxes and finite preorders.

A ``GridPoset`` is the box [lo, hi] of Z^n with the product order; it stands
in for the whole parameter space R^n, modules on it carry per-axis boundary
policies (see ``pmodule``). A ``FinitePreorder`` is an arbitrary finite
preorder, i.e. a finite Alexandrov space.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Hashable, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

Point = Tuple[int, ...]


class PosetError(ValueError):
    """Raised on invalid posets or points outside a poset."""
    pass


class NonMonotoneMapError(PosetError):
    """Raised when a map that must be order-preserving is not."""
    pass


class FinitePoset(ABC):
    """Common interface of the finite posets modules live on."""

    @abstractmethod
    def points(self) -> List[Hashable]:
        """All points, in a linear extension of the order."""
        pass

    @abstractmethod
    def contains(self, x: Hashable) -> bool:
        pass

    @abstractmethod
    def leq(self, a: Hashable, b: Hashable) -> bool:
        pass

    @abstractmethod
    def generating_edges(self) -> List[Tuple[Hashable, Hashable]]:
        """Pairs u < w whose maps determine a module (covering relations on a grid)."""
        pass

    @abstractmethod
    def lower_neighbors(self, x: Hashable) -> List[Hashable]:
        """Points whose images generate everything below ``x`` reaching ``x``."""
        pass

    @abstractmethod
    def opposite(self) -> Tuple["FinitePoset", Callable[[Hashable], Hashable]]:
        """Opposite poset together with the point correspondence (an involution)."""
        pass

    @abstractmethod
    def same_as(self, other: "FinitePoset") -> bool:
        pass

    def require(self, x: Hashable) -> Hashable:
        if not self.contains(x):
            raise PosetError(f"point {x!r} is not in {self}")
        return x

    def up_set(self, x: Hashable) -> List[Hashable]:
        return [y for y in self.points() if self.leq(x, y)]

    def down_set(self, x: Hashable) -> List[Hashable]:
        return [y for y in self.points() if self.leq(y, x)]

    def comparable_pairs(self, subset: Sequence[Hashable]) -> List[Tuple[Hashable, Hashable]]:
        """Pairs (u, w), u != w, u <= w, inside ``subset``."""
        return [(u, w) for u in subset for w in subset if u != w and self.leq(u, w)]


@dataclass(frozen=True)
class GridPoset(FinitePoset):
    """The integer box [lo, hi] in Z^n with the product order."""
    lo: Point
    hi: Point

    def __post_init__(self):
        lo, hi = tuple(int(v) for v in self.lo), tuple(int(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise PosetError(f"box corners {lo} and {hi} must have the same positive length")
        if any(a > b for a, b in zip(lo, hi)):
            raise PosetError(f"empty box: lo={lo} is not <= hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def line(cls, lo: int, hi: int) -> "GridPoset":
        return cls((lo,), (hi,))

    @classmethod
    def cube(cls, lo: int, hi: int, n: int) -> "GridPoset":
        return cls((lo,) * n, (hi,) * n)

    def __str__(self) -> str:
        return f"GridPoset({list(self.lo)}..{list(self.hi)})"

    @property
    def dim(self) -> int:
        return len(self.lo)

    @cached_property
    def _points(self) -> List[Point]:
        return list(itertools.product(*[range(a, b + 1) for a, b in zip(self.lo, self.hi)]))

    @cached_property
    def _index(self) -> Dict[Point, int]:
        return {x: i for i, x in enumerate(self._points)}

    def points(self) -> List[Point]:
        return list(self._points)

    def index(self, x: Point) -> int:
        return self._index[tuple(x)]

    def contains(self, x) -> bool:
        return len(x) == self.dim and all(a <= v <= b for a, v, b in zip(self.lo, x, self.hi))

    def leq(self, a: Point, b: Point) -> bool:
        self.require(a)
        self.require(b)
        return all(u <= v for u, v in zip(a, b))

    def generating_edges(self) -> List[Tuple[Point, Point]]:
        return [(x, y) for x in self._points for y in self.upper_covers(x)]

    def upper_covers(self, x: Point) -> List[Point]:
        return [y for y in (step(x, i, 1) for i in range(self.dim)) if self.contains(y)]

    def lower_neighbors(self, x: Point) -> List[Point]:
        return [y for y in (step(x, i, -1) for i in range(self.dim)) if self.contains(y)]

    def opposite(self) -> Tuple["GridPoset", Callable[[Point], Point]]:
        return GridPoset(negate(self.hi), negate(self.lo)), negate

    def same_as(self, other: FinitePoset) -> bool:
        return isinstance(other, GridPoset) and other.lo == self.lo and other.hi == self.hi

    def clamp(self, x: Point) -> Point:
        return tuple(min(max(v, a), b) for a, v, b in zip(self.lo, x, self.hi))

    def up_set(self, x: Point) -> List[Point]:
        return principal_points(self, PrincipalSet(tuple(x), "up", virtual=True))

    def down_set(self, x: Point) -> List[Point]:
        return principal_points(self, PrincipalSet(tuple(x), "down", virtual=True))


def step(x: Point, axis: int, amount: int) -> Point:
    return tuple(v + amount if i == axis else v for i, v in enumerate(x))


def negate(x: Point) -> Point:
    return tuple(-v for v in x)


def add(x: Point, y: Point) -> Point:
    return tuple(a + b for a, b in zip(x, y))


def join(a: Point, b: Point) -> Point:
    """Componentwise max."""
    if len(a) != len(b):
        raise PosetError(f"points {a} and {b} have different lengths")
    return tuple(max(u, v) for u, v in zip(a, b))


def meet(a: Point, b: Point) -> Point:
    """Componentwise min."""
    if len(a) != len(b):
        raise PosetError(f"points {a} and {b} have different lengths")
    return tuple(min(u, v) for u, v in zip(a, b))


@dataclass(frozen=True)
class PrincipalSet:
    """U_base = {y >= base} or D_base = {y <= base}."""
    base: Point
    kind: Literal["up", "down"]
    # base may lie outside the box; only its trace on the box is used
    virtual: bool = False


def principal_points(box: GridPoset, s: PrincipalSet) -> List[Point]:
    """Points of the box lying in ``s``.

    Raises:
        PosetError: If the base is outside the box and ``s`` is not virtual
    """
    if len(s.base) != box.dim:
        raise PosetError(f"base {s.base} does not match a {box.dim}-parameter box")
    if not s.virtual:
        box.require(s.base)
    if s.kind == "up":
        ranges = [range(max(a, v), b + 1) for a, v, b in zip(box.lo, s.base, box.hi)]
    elif s.kind == "down":
        ranges = [range(a, min(b, v) + 1) for a, v, b in zip(box.lo, s.base, box.hi)]
    else:
        raise PosetError(f"unknown principal set kind {s.kind!r}")
    return list(itertools.product(*ranges))


@dataclass(frozen=True, eq=False)
class FinitePreorder(FinitePoset):
    """A finite preorder given by its reflexive, transitive relation matrix.

    ``relation[i, j]`` is True iff ``elements[i] <= elements[j]``.
    """
    elements: Tuple[Hashable, ...]
    relation: np.ndarray = field(repr=False)

    def __post_init__(self):
        elements = tuple(self.elements)
        rel = np.array(self.relation, dtype=bool)
        n = len(elements)
        if len(set(elements)) != n:
            raise PosetError("preorder elements must be distinct")
        if rel.shape != (n, n):
            raise PosetError(f"relation of shape {rel.shape} for {n} elements")
        if not rel.diagonal().all():
            raise PosetError("relation is not reflexive")
        composed = (rel.astype(np.int64) @ rel.astype(np.int64)) > 0
        if (composed & ~rel).any():
            raise PosetError("relation is not transitive")
        rel.setflags(write=False)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "relation", rel)

    @classmethod
    def from_pairs(cls, elements: Iterable[Hashable], pairs: Iterable[Tuple[Hashable, Hashable]]) -> "FinitePreorder":
        """Preorder generated by ``pairs`` (reflexive-transitive closure)."""
        graph = nx.DiGraph()
        graph.add_nodes_from(elements)
        graph.add_edges_from(pairs)
        closure = nx.transitive_closure(graph, reflexive=True)
        ordered = _linear_extension(graph)
        index = {x: i for i, x in enumerate(ordered)}
        rel = np.zeros((len(ordered), len(ordered)), dtype=bool)
        for u, w in closure.edges:
            rel[index[u], index[w]] = True
        np.fill_diagonal(rel, True)
        return cls(tuple(ordered), rel)

    @classmethod
    def chain(cls, n: int) -> "FinitePreorder":
        return cls.from_pairs(range(n), [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def discrete(cls, elements: Iterable[Hashable]) -> "FinitePreorder":
        elements = tuple(elements)
        return cls(elements, np.eye(len(elements), dtype=bool))

    @classmethod
    def indiscrete(cls, elements: Iterable[Hashable]) -> "FinitePreorder":
        elements = tuple(elements)
        return cls(elements, np.ones((len(elements), len(elements)), dtype=bool))

    def __str__(self) -> str:
        return f"FinitePreorder({len(self.elements)} elements)"

    @cached_property
    def _index(self) -> Dict[Hashable, int]:
        return {x: i for i, x in enumerate(self.elements)}

    def points(self) -> List[Hashable]:
        return list(self.elements)

    def contains(self, x) -> bool:
        try:
            return x in self._index
        except TypeError:
            return False

    def leq(self, a, b) -> bool:
        return bool(self.relation[self._index[self.require(a)], self._index[self.require(b)]])

    def equivalent(self, a, b) -> bool:
        return self.leq(a, b) and self.leq(b, a)

    def generating_edges(self) -> List[Tuple[Hashable, Hashable]]:
        rows, cols = np.nonzero(self.relation)
        return [(self.elements[i], self.elements[j]) for i, j in zip(rows, cols) if i != j]

    def lower_neighbors(self, x) -> List[Hashable]:
        return [y for y in self.elements if self.leq(y, x) and not self.leq(x, y)]

    def representative(self, x) -> Hashable:
        """First element (in ``points()`` order) equivalent to ``x``."""
        return next(y for y in self.elements if self.equivalent(x, y))

    def opposite(self) -> Tuple["FinitePreorder", Callable]:
        return FinitePreorder(self.elements, self.relation.T.copy()), _identity

    def same_as(self, other: FinitePoset) -> bool:
        return other is self or (
            isinstance(other, FinitePreorder)
            and other.elements == self.elements
            and bool(np.array_equal(other.relation, self.relation))
        )


def _identity(x):
    return x


def _linear_extension(graph: nx.DiGraph) -> List[Hashable]:
    """Topological order of the strongly connected components, members kept together."""
    condensed = nx.condensation(graph)
    order: List[Hashable] = []
    nodes = list(graph.nodes)
    for component in nx.lexicographical_topological_sort(condensed, key=lambda c: min(nodes.index(m) for m in condensed.nodes[c]["members"])):
        members = condensed.nodes[component]["members"]
        order.extend(sorted(members, key=nodes.index))
    return order


def is_interval(poset: FinitePoset, subset: Iterable[Hashable]) -> bool:
    """True iff ``subset`` is nonempty, convex and connected.

    Connectivity is taken in the comparability graph restricted to the subset.

    Raises:
        PosetError: If some point is outside the poset
    """
    members = list(dict.fromkeys(subset))
    if not members:
        return False
    for x in members:
        poset.require(x)
    inside = set(members)

    # convexity
    for a in members:
        for b in members:
            if a == b or not poset.leq(a, b):
                continue
            if isinstance(poset, GridPoset):
                between = itertools.product(*[range(u, v + 1) for u, v in zip(a, b)])
            else:
                between = (c for c in poset.points() if poset.leq(a, c) and poset.leq(c, b))
            if any(c not in inside for c in between):
                return False

    # connectivity
    index = {x: i for i, x in enumerate(members)}
    pairs = poset.comparable_pairs(members)
    rows = [index[u] for u, _ in pairs]
    cols = [index[w] for _, w in pairs]
    graph = csr_matrix((np.ones(len(pairs)), (rows, cols)), shape=(len(members), len(members)))
    n_components, _ = connected_components(graph, directed=False)
    return n_components == 1


@dataclass(frozen=True, eq=False)
class MonotoneMap:
    """A map from a finite poset into another one, stored pointwise.

    Monotonicity is checked by ``is_monotone``; construction does not enforce it.
    """
    source: FinitePoset
    target: FinitePoset
    assignment: Mapping[Hashable, Hashable]

    def __post_init__(self):
        assignment = {x: (tuple(v) if isinstance(self.target, GridPoset) else v) for x, v in self.assignment.items()}
        missing = [x for x in self.source.points() if x not in assignment]
        if missing:
            raise PosetError(f"map undefined on {missing[:5]}")
        for x in self.source.points():
            self.target.require(assignment[x])
        object.__setattr__(self, "assignment", assignment)

    def __call__(self, x: Hashable) -> Hashable:
        return self.assignment[x]

    def is_monotone(self) -> bool:
        return all(self.target.leq(self(u), self(w)) for u, w in self.source.generating_edges())

    def require_monotone(self) -> "MonotoneMap":
        if not self.is_monotone():
            raise NonMonotoneMapError("map does not preserve the order")
        return self

    def preimage_up(self, x: Hashable) -> List[Hashable]:
        """f^{-1}(U_x), in source order."""
        return [s for s in self.source.points() if _leq_virtual(self.target, x, self(s))]

    def preimage_down(self, x: Hashable) -> List[Hashable]:
        """f^{-1}(D_x), in source order."""
        return [s for s in self.source.points() if _leq_virtual(self.target, self(s), x)]

    def sup_distance(self, other: "MonotoneMap") -> int:
        """max_s |f(s) - g(s)|_inf for grid-valued maps on the same source."""
        if not self.source.same_as(other.source):
            raise PosetError("maps have different sources")
        if not (isinstance(self.target, GridPoset) and isinstance(other.target, GridPoset)):
            raise PosetError("sup distance needs grid-valued maps")
        return max((abs(a - b) for s in self.source.points() for a, b in zip(self(s), other(s))), default=0)


def _leq_virtual(poset: FinitePoset, a, b) -> bool:
    # grid points outside the box still compare componentwise
    if isinstance(poset, GridPoset):
        return all(u <= v for u, v in zip(a, b))
    return poset.leq(a, b)


def pullback_preorder(
    space: FinitePreorder,
    maps: Sequence[Mapping[Hashable, Point]],
    base: Optional[FinitePreorder] = None,
) -> FinitePreorder:
    """Coarsest preorder on ``space`` making every map monotone.

    x <= y iff f(x) <= f(y) componentwise for every map; with ``base`` the
    relation is further intersected with the base preorder.
    """
    elements = space.elements
    n = len(elements)
    rel = np.ones((n, n), dtype=bool)
    for f in maps:
        values = np.array([f[x] for x in elements], dtype=np.int64).reshape(n, -1)
        rel &= (values[:, None, :] <= values[None, :, :]).all(axis=2)
    if base is not None:
        if base.elements != elements:
            raise PosetError("base preorder lives on a different set")
        rel &= base.relation
    return FinitePreorder(elements, rel)
