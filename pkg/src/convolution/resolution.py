"""Projective and injective resolutions of modules on finite posets.

Projective resolutions are built from minimal free covers: the generators at
x complement the images of the lower neighbours of x, the cover is a sum of
principal up-set modules k[U_g], and the next step resolves the kernel.
Injective resolutions are the duals of free resolutions of dual modules. On
grids these may use generators at -inf along stabilized axes, so the dual
terms include down-sets unbounded above, such as the constant module.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, Hashable, List, Literal, Optional, Sequence, Tuple

from loguru import logger

from src.algebra.exactalg import (
    ExactMatrix,
    cokernel_projection,
    kernel_basis,
    rank,
    solve_columns,
)
from src.config import config
from src.models.pmodule import (
    ModuleError,
    NaturalTransformation,
    PersistenceModule,
    dual,
)
from src.models.poset import FinitePreorder, GridPoset


class ResolutionError(ValueError):
    """Raised for modules these resolutions do not cover."""
    pass


class ResolutionCapError(RuntimeError):
    """Raised when a resolution does not terminate within the length cap."""
    pass


@dataclass(frozen=True, eq=False)
class Resolution:
    """A projective resolution P_. -> M or an injective resolution M -> I^.

    Attributes:
        kind: 'projective' or 'injective'
        module: The resolved module
        terms: P_0, P_1, ... or I^0, I^1, ...
        differentials: projective d_i: P_{i+1} -> P_i; injective d^i: I^i -> I^{i+1}
        augmentation: P_0 -> M or M -> I^0
        generators: Per term, the points of its principal summands in order
    """
    kind: Literal["projective", "injective"]
    module: PersistenceModule
    terms: Tuple[PersistenceModule, ...]
    differentials: Tuple[NaturalTransformation, ...]
    augmentation: NaturalTransformation
    generators: Tuple[Tuple[Hashable, ...], ...]

    @property
    def length(self) -> int:
        return len(self.terms)

    def is_exact(self) -> bool:
        """Pointwise exactness of the augmented complex."""
        for x in self.module.base.points():
            if self.kind == "projective":
                # ... -> P_1 -> P_0 -> M -> 0
                maps = [self.augmentation.components[x]] + [d.components[x] for d in self.differentials]
            else:
                # 0 -> M -> I^0 -> I^1 -> ...
                maps = [d.components[x] for d in reversed(self.differentials)] + [self.augmentation.components[x]]
            if rank(maps[0]) != maps[0].rows or rank(maps[-1]) != maps[-1].cols:
                return False
            for outgoing, incoming in zip(maps, maps[1:]):
                if not (outgoing @ incoming).is_zero():
                    return False
                if outgoing.cols - rank(outgoing) != rank(incoming):
                    return False
        return True


def default_cap(module: PersistenceModule) -> int:
    if config.resolution.length_cap is not None:
        return config.resolution.length_cap
    if isinstance(module.base, GridPoset):
        return 2 * module.base.dim + 1
    return len(module.base.points()) + 1


def free_module(base, generators: Sequence[Hashable], p: int, stabilized_left: Optional[Tuple[bool, ...]] = None) -> PersistenceModule:
    """Direct sum of k[U_g] over the generators, in order.

    On a grid, ``stabilized_left`` marks axes along which generators on the
    lower face sit at -inf.
    """
    points = base.points()
    active: Dict[Hashable, List[int]] = {
        y: [j for j, g in enumerate(generators) if base.leq(g, y)] for y in points
    }
    maps = {}
    for u, w in base.generating_edges():
        rows, cols = active[w], active[u]
        position = {j: r for r, j in enumerate(rows)}
        matrix = [[0] * len(cols) for _ in rows]
        for c, j in enumerate(cols):
            matrix[position[j]][c] = 1
        maps[(u, w)] = ExactMatrix.from_rows(matrix, len(cols), p)
    dims = {y: len(active[y]) for y in points}
    if isinstance(base, GridPoset):
        left = stabilized_left if stabilized_left is not None else (False,) * base.dim
        return PersistenceModule(base, dims, maps, tuple(left), (True,) * base.dim, p)
    return PersistenceModule(base, dims, maps, p=p)


def _generators_at(module: PersistenceModule, x: Hashable) -> ExactMatrix:
    """Vectors of M_x completing the images of the lower neighbours to a basis."""
    base = module.base
    p = module.p
    if isinstance(base, FinitePreorder) and base.representative(x) != x:
        return ExactMatrix.zeros(module.dims[x], 0, p)
    images = [module.transition(u, x) for u in base.lower_neighbors(x)]
    incoming = ExactMatrix.hstack(images, rows=module.dims[x], p=p)
    q = cokernel_projection(incoming)
    return solve_columns(q, ExactMatrix.identity(q.rows, p))


def _check_resolvable(module: PersistenceModule, open_below: bool) -> None:
    if not module.is_grid:
        return
    box: GridPoset = module.base
    if not open_below and any(module.stabilized_left):
        raise ResolutionError("module is stabilized towards -inf and has no finite free resolution")
    for i, stable in enumerate(module.stabilized_right):
        if not stable and any(module.dims[x] for x in box.points() if x[i] == box.hi[i]):
            raise ResolutionError(f"module is cut off above the box on axis {i}; enlarge the box")


def pointwise_kernel(phi: NaturalTransformation) -> Tuple[PersistenceModule, NaturalTransformation]:
    """ker(phi) as a module with its inclusion into the source."""
    source = phi.source
    p = source.p
    bases = {x: kernel_basis(phi.components[x]) for x in source.base.points()}
    maps = {}
    for u, w in source.base.generating_edges():
        coords = solve_columns(bases[w], source.maps[(u, w)] @ bases[u])
        if coords is None:
            raise ModuleError("kernel is not preserved by the structure maps")
        maps[(u, w)] = coords
    kernel = PersistenceModule(
        source.base, {x: b.cols for x, b in bases.items()}, maps,
        source.stabilized_left, source.stabilized_right, p,
    )
    return kernel, NaturalTransformation(kernel, source, bases)


def projective_resolution(module: PersistenceModule, length_cap: Optional[int] = None) -> Resolution:
    """Minimal free resolution of a finitely presented module.

    Raises:
        ResolutionError: If a grid module is stabilized towards -inf, or cut off above the box
        ResolutionCapError: If more than ``length_cap`` steps would be needed
    """
    return _free_resolution(module, length_cap, open_below=False)


def _free_resolution(module: PersistenceModule, length_cap: Optional[int], open_below: bool) -> Resolution:
    _check_resolvable(module, open_below)
    cap = default_cap(module) if length_cap is None else length_cap
    base, p = module.base, module.p

    terms: List[PersistenceModule] = []
    covers: List[NaturalTransformation] = []
    inclusions: List[NaturalTransformation] = []
    generators: List[Tuple[Hashable, ...]] = []
    current = module
    while not current.is_zero():
        if len(terms) > cap:
            raise ResolutionCapError(f"resolution needs more than {cap + 1} terms")
        points: List[Hashable] = []
        vectors: List[ExactMatrix] = []
        for x in base.points():
            found = _generators_at(current, x)
            for k in range(found.cols):
                points.append(x)
                vectors.append(found.take_columns([k]))
        free = free_module(base, points, p, current.stabilized_left if open_below and current.is_grid else None)
        components = {}
        for y in base.points():
            columns = [current.transition(points[j], y) @ vectors[j] for j in range(len(points)) if base.leq(points[j], y)]
            components[y] = ExactMatrix.hstack(columns, rows=current.dims[y], p=p)
        cover = NaturalTransformation(free, current, components)
        kernel, inclusion = pointwise_kernel(cover)

        terms.append(free)
        covers.append(cover)
        inclusions.append(inclusion)
        generators.append(tuple(points))
        logger.debug(f"projective step {len(terms) - 1}: {len(points)} generators")
        current = kernel

    differentials = tuple(inclusions[i].compose(covers[i + 1]) for i in range(len(terms) - 1))
    augmentation = covers[0] if covers else NaturalTransformation.zero(free_module(base, [], p), module)
    return Resolution("projective", module, tuple(terms), differentials, augmentation, tuple(generators))


def injective_resolution(module: PersistenceModule, length_cap: Optional[int] = None) -> Resolution:
    """Injective resolution by down-set modules k[D], dual to a free one.

    A module stabilized towards +inf is resolved by down-sets unbounded above,
    e.g. 0 -> k[a,inf) -> k(-inf,inf) -> k(-inf,a) -> 0.

    Raises:
        ResolutionError: If a grid module is cut off below the box
        ResolutionCapError: If more than ``length_cap`` steps would be needed
    """
    try:
        projective = _free_resolution(dual(module), length_cap, open_below=True)
    except ResolutionError as exc:
        raise ResolutionError(f"dual module: {exc}") from exc
    _, to_opposite = module.base.opposite()
    terms = tuple(dual(t) for t in projective.terms)
    differentials = tuple(
        replace(d.dual(), source=terms[i], target=terms[i + 1])
        for i, d in enumerate(projective.differentials)
    )
    if projective.terms:
        augmentation = replace(projective.augmentation.dual(), source=module, target=terms[0])
    else:
        augmentation = NaturalTransformation.zero(module, dual(free_module(dual(module).base, [], module.p)))
    generators = tuple(tuple(to_opposite(g) for g in gens) for gens in projective.generators)
    return Resolution("injective", module, terms, differentials, augmentation, generators)
