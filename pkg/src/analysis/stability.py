"""Stability of sublevel persistence and of derived direct images.

Classical check: for vertex functions f, g on a simplicial complex, the
bottleneck distance of the degree-n sublevel barcodes is at most ||f - g||_inf.

Sheaf-theoretic check: for monotone maps f, g from a finite preorder Q to a
grid and a module F on Q, the (co)homology of Rf_* F and Rg_* F is
||f - g||_inf-interleaved. The interleaving is built from restriction maps of
the pushed-forward resolutions and validated exactly; on one-parameter grids
the barcodes are compared as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, Hashable, List, Literal, Mapping, Optional, Sequence, Tuple

from loguru import logger

from src.algebra.exactalg import default_prime
from src.analysis.distance import EpsilonCertificate, bottleneck, certificate_validate
from src.convolution.barcodes import barcode_extract
from src.convolution.derived import DerivedImage, derived_direct_image
from src.convolution.resolution import injective_resolution, projective_resolution
from src.models.interval import Barcode, Interval, Value, INF, format_value, to_value
from src.models.pmodule import (
    NaturalTransformation,
    PersistenceModule,
    constant_module,
    inverse_image,
    shift,
)
from src.models.poset import FinitePreorder, GridPoset, MonotoneMap, Point, PosetError, pullback_preorder

Simplex = Tuple[int, ...]


class StabilityInputError(ValueError):
    """Raised on malformed complexes, vertex functions or maps."""
    pass


# ----------------------------------------------------------------------
# Simplicial complexes and sublevel persistence
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SimplicialComplex:
    """A finite abstract simplicial complex, closed under taking faces."""
    simplices: frozenset

    def __post_init__(self):
        normalized = frozenset(tuple(sorted(s)) for s in self.simplices)
        for s in normalized:
            if not s:
                raise StabilityInputError("empty simplex")
            if len(set(s)) != len(s):
                raise StabilityInputError(f"repeated vertex in {s}")
            for face in _faces(s):
                if face not in normalized:
                    raise StabilityInputError(f"missing face {face} of {s}")
        object.__setattr__(self, "simplices", normalized)

    @classmethod
    def closure(cls, maximal: Sequence[Sequence[int]]) -> "SimplicialComplex":
        """The complex generated by the given simplices."""
        simplices = set()
        for s in maximal:
            s = tuple(sorted(s))
            for k in range(1, len(s) + 1):
                simplices.update(combinations(s, k))
        return cls(frozenset(simplices))

    @property
    def vertices(self) -> List[int]:
        return sorted(s[0] for s in self.simplices if len(s) == 1)

    def face_poset(self) -> FinitePreorder:
        """Simplices ordered by inclusion."""
        ordered = sorted(self.simplices, key=lambda s: (len(s), s))
        pairs = [(face, s) for s in ordered for face in _faces(s)]
        return FinitePreorder.from_pairs(ordered, pairs)


def _faces(s: Simplex) -> List[Simplex]:
    if len(s) == 1:
        return []
    return [s[:k] + s[k + 1:] for k in range(len(s))]


def _filtration_value(s: Simplex, f: Mapping[int, Value]) -> Value:
    return max(f[v] for v in s)


def sublevel_persistence(complex_: SimplicialComplex, f: Mapping[int, object], degree: int, p: Optional[int] = None) -> Barcode:
    """Degree-n barcode of the lower-star filtration of ``f``.

    Simplices enter at the max of their vertex values; ties are broken by
    dimension, then lexicographically. Zero-length bars are dropped.

    Raises:
        StabilityInputError: If ``f`` misses a vertex or the degree is negative
    """
    if degree < 0:
        raise StabilityInputError("degree must be non-negative")
    p = default_prime() if p is None else p
    values = {v: to_value(f[v]) for v in complex_.vertices if v in f}
    missing = [v for v in complex_.vertices if v not in values]
    if missing:
        raise StabilityInputError(f"vertex function undefined on {missing}")

    order = sorted(complex_.simplices, key=lambda s: (_filtration_value(s, values), len(s), s))
    index = {s: i for i, s in enumerate(order)}
    pivot_of: Dict[int, int] = {}
    columns: List[Dict[int, int]] = []
    for j, s in enumerate(order):
        column: Dict[int, int] = {}
        for k, face in enumerate(_faces(s)):
            column[index[face]] = (-1) ** k % p
        while column:
            low = max(column)
            owner = pivot_of.get(low)
            if owner is None:
                pivot_of[low] = j
                break
            other = columns[owner]
            factor = column[low] * pow(other[low], -1, p) % p
            for row, v in other.items():
                updated = (column.get(row, 0) - factor * v) % p
                if updated:
                    column[row] = updated
                else:
                    column.pop(row, None)
        columns.append(column)

    bars: List[Interval] = []
    for low, j in pivot_of.items():
        birth, death = order[low], order[j]
        if len(birth) - 1 != degree:
            continue
        start, end = _filtration_value(birth, values), _filtration_value(death, values)
        if start < end:
            bars.append(Interval.half_open(start, end))
    for i, s in enumerate(order):
        if len(s) - 1 == degree and i not in pivot_of and not columns[i]:
            bars.append(Interval.half_open(_filtration_value(s, values), INF))
    return Barcode(bars)


def sup_norm(f: Mapping[int, object], g: Mapping[int, object]) -> Value:
    if set(f) != set(g):
        raise StabilityInputError("vertex functions have different domains")
    return max((abs(to_value(f[v]) - to_value(g[v])) for v in f), default=Fraction(0))


@dataclass(frozen=True)
class StabilityReport:
    degree: int
    distance: Value
    sup_norm: Value
    holds: bool

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "distance": format_value(self.distance),
            "sup_norm": format_value(self.sup_norm),
            "holds": self.holds,
        }


def stability_check(complex_: SimplicialComplex, f: Mapping[int, object], g: Mapping[int, object], degree: int) -> StabilityReport:
    """d_B(PH_n(f), PH_n(g)) <= ||f - g||_inf."""
    distance = bottleneck(sublevel_persistence(complex_, f, degree), sublevel_persistence(complex_, g, degree))
    norm = sup_norm(f, g)
    report = StabilityReport(degree, distance, norm, distance <= norm)
    if not report.holds:
        logger.warning(f"stability violated in degree {degree}: {format_value(distance)} > {format_value(norm)}")
    return report


# ----------------------------------------------------------------------
# Direct images
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DegreeStability:
    degree: int
    epsilon: int
    bottleneck: Optional[Value]
    certificate_valid: bool

    @property
    def holds(self) -> bool:
        within = self.bottleneck is None or self.bottleneck <= self.epsilon
        return within and self.certificate_valid

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "epsilon": self.epsilon,
            "bottleneck": None if self.bottleneck is None else format_value(self.bottleneck),
            "certificate_valid": self.certificate_valid,
            "holds": self.holds,
        }


@dataclass(frozen=True)
class DirectImageStabilityReport:
    variant: str
    epsilon: int
    degrees: Tuple[DegreeStability, ...]
    # checks are sufficient, not necessary: only the inequality is tested
    conservative: bool = True

    @property
    def holds(self) -> bool:
        return all(d.holds for d in self.degrees)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "epsilon": self.epsilon,
            "holds": self.holds,
            "conservative": self.conservative,
            "degrees": [d.to_dict() for d in self.degrees],
        }


def _comparison_map(source: DerivedImage, target: DerivedImage, degree: int, epsilon: int) -> NaturalTransformation:
    """Homology of the chain map f_*E(-eps) -> g_*E given by (co)restriction."""
    box: GridPoset = target.complex.terms[degree].base
    back = (-epsilon,) * box.dim
    src_image = source.images[degree]
    tgt_image = target.images[degree]
    src_sub = source.subquotients[degree]
    tgt_sub = target.subquotients[degree]
    shifted = shift(src_sub.module, back)
    components = {}
    for x in box.points():
        resolved = src_image.module.resolve(tuple(a + b for a, b in zip(x, back)))
        if resolved is None:
            continue
        chain = src_image.cones[resolved].map_to(tgt_image.cones[x])
        components[x] = tgt_sub.classes(x, chain @ src_sub.representatives(resolved))
    return NaturalTransformation(shifted, tgt_sub.module, components)


def direct_image_stability_check(
    f: MonotoneMap,
    g: MonotoneMap,
    module: PersistenceModule,
    variant: Literal["sheaf", "cosheaf"] = "sheaf",
    length_cap: Optional[int] = None,
) -> DirectImageStabilityReport:
    """Check that R f_* F and R g_* F (or L f_dagger, L g_dagger) are ||f-g||-interleaved.

    Raises:
        StabilityInputError: If the maps do not share a grid target or are not monotone
    """
    if not (isinstance(f.target, GridPoset) and f.target.same_as(g.target)):
        raise StabilityInputError("maps must land in the same grid box")
    try:
        f.require_monotone()
        g.require_monotone()
    except PosetError as exc:
        raise StabilityInputError(str(exc)) from exc
    epsilon = f.sup_distance(g)

    if variant == "sheaf":
        resolution = injective_resolution(module, length_cap)
    elif variant == "cosheaf":
        resolution = projective_resolution(module, length_cap)
    else:
        raise StabilityInputError(f"unknown variant {variant!r}")
    image_f = derived_direct_image(f, resolution, variant)
    image_g = derived_direct_image(g, resolution, variant)

    one_parameter = f.target.dim == 1
    results = []
    for degree in range(len(image_f.images)):
        hf = image_f.subquotients[degree].module
        hg = image_g.subquotients[degree].module
        certificate = EpsilonCertificate(
            epsilon, hf, hg,
            _comparison_map(image_f, image_g, degree, epsilon),
            _comparison_map(image_g, image_f, degree, epsilon),
        )
        valid = certificate_validate(certificate)
        distance = bottleneck(barcode_extract(hf), barcode_extract(hg)) if one_parameter else None
        results.append(DegreeStability(degree, epsilon, distance, valid))
        logger.debug(f"{variant} degree {degree}: certificate {'valid' if valid else 'INVALID'}")
    return DirectImageStabilityReport(variant, epsilon, tuple(results))


def pullback_stability_check(
    space: FinitePreorder,
    f_values: Mapping[Hashable, Point],
    g_values: Mapping[Hashable, Point],
    target: GridPoset,
    module: Optional[PersistenceModule] = None,
    variant: Literal["sheaf", "cosheaf"] = "sheaf",
) -> DirectImageStabilityReport:
    """Stability for maps that need not be monotone on ``space``.

    The space is given the coarsest topology making both maps continuous,
    intersected with its own; ``module`` (constant by default) is pulled back
    to it along the identity.
    """
    refined = pullback_preorder(space, [f_values, g_values], base=space)
    if module is None:
        pulled = constant_module(refined)
    else:
        identity = MonotoneMap(refined, module.base, {x: x for x in refined.points()})
        pulled = inverse_image(identity, module)
    f = MonotoneMap(refined, target, f_values)
    g = MonotoneMap(refined, target, g_values)
    return direct_image_stability_check(f, g, pulled, variant)


def square_circle_projection() -> MonotoneMap:
    """Projection of a square circle onto the x-axis, on its face poset.

    Coordinates are doubled so edge midpoints are integral. Vertices lie below
    the edges containing them; the projection is not monotone for this order.
    """
    corners = {0: (0, 0), 1: (2, 0), 2: (2, 2), 3: (0, 2)}
    complex_ = SimplicialComplex.closure([(0, 1), (1, 2), (2, 3), (0, 3)])
    faces = complex_.face_poset()

    def x_coordinate(simplex: Simplex) -> Tuple[int]:
        xs = [corners[v][0] for v in simplex]
        return (sum(xs) // len(xs),)

    return MonotoneMap(faces, GridPoset.line(0, 2), {s: x_coordinate(s) for s in faces.points()})
