"""Graded complexes of modules and the derived convolutions.

The derived sheaf convolution M *^R N is computed by resolving N injectively
and convolving termwise, the derived cosheaf convolution M (x)^L_gr N by
resolving N projectively. Cohomology and homology are taken stalk by stalk.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Hashable, Literal, Mapping, Optional, Tuple

from loguru import logger

from src.algebra.exactalg import (
    ExactMatrix,
    cokernel_projection,
    kernel_basis,
    solve_columns,
)
from src.convolution.barcodes import graded_barcode_extract, grid_to_closed_form, realize_barcode
from src.convolution.oracle import ConvolutionOracle, safe_window
from src.convolution.resolution import Resolution, ResolutionError, injective_resolution, projective_resolution
from src.models.pmodule import (
    ModuleError,
    NaturalTransformation,
    PersistenceModule,
    push_forward,
    zero_module,
)
from src.models.interval import Barcode, GradedBarcode, is_finite
from src.models.poset import GridPoset, MonotoneMap


@dataclass(frozen=True, eq=False)
class GradedComplex:
    """Modules C^n with differentials.

    Cohomological complexes have d^n: C^n -> C^{n+1}; homological ones have
    d_n: C_n -> C_{n-1}. Missing differentials are zero.
    """
    terms: Mapping[int, PersistenceModule]
    differentials: Mapping[int, NaturalTransformation] = field(default_factory=dict)
    cohomological: bool = True

    def __post_init__(self):
        if not self.terms:
            raise ModuleError("complex without terms")
        for degree, d in self.differentials.items():
            if degree not in self.terms or self._next(degree) not in self.terms:
                raise ModuleError(f"differential in degree {degree} has no matching terms")
            if d.source is not self.terms[degree] or d.target is not self.terms[self._next(degree)]:
                raise ModuleError(f"differential in degree {degree} does not connect its terms")

    def _next(self, degree: int) -> int:
        return degree + 1 if self.cohomological else degree - 1

    def degrees(self):
        return sorted(self.terms)

    def has_zero_differentials(self) -> bool:
        return all(d.is_zero() for d in self.differentials.values())

    def is_complex(self) -> bool:
        """d after d vanishes."""
        for degree, d in self.differentials.items():
            following = self.differentials.get(self._next(degree))
            if following is not None and not following.compose(d).is_zero():
                return False
        return True

    def outgoing(self, degree: int) -> Optional[NaturalTransformation]:
        return self.differentials.get(degree)

    def incoming(self, degree: int) -> Optional[NaturalTransformation]:
        previous = degree - 1 if self.cohomological else degree + 1
        return self.differentials.get(previous)

    def homology(self) -> "GradedComplex":
        """Degreewise (co)homology, as a complex with zero differentials."""
        return GradedComplex(
            {n: subquotient(self.terms[n], self.incoming(n), self.outgoing(n)).module for n in self.degrees()},
            {},
            self.cohomological,
        )


@dataclass(frozen=True, eq=False)
class Subquotient:
    """ker(outgoing) / im(incoming), with the data needed to map classes.

    Attributes:
        module: The homology module
        cycles: Per point, a basis of the cycles inside the ambient stalk
        projection: Per point, cycle coordinates -> homology
        lift: Per point, a right inverse of ``projection``
    """
    ambient: PersistenceModule
    module: PersistenceModule
    cycles: Dict[Hashable, ExactMatrix]
    projection: Dict[Hashable, ExactMatrix]
    lift: Dict[Hashable, ExactMatrix]

    def representatives(self, x: Hashable) -> ExactMatrix:
        """Ambient vectors representing the homology basis at ``x``."""
        return self.cycles[x] @ self.lift[x]

    def classes(self, x: Hashable, vectors: ExactMatrix) -> ExactMatrix:
        """Homology classes of ambient cycles at ``x``."""
        coords = solve_columns(self.cycles[x], vectors)
        if coords is None:
            raise ModuleError(f"vectors at {x!r} are not cycles")
        return self.projection[x] @ coords


def subquotient(
    module: PersistenceModule,
    incoming: Optional[NaturalTransformation],
    outgoing: Optional[NaturalTransformation],
) -> Subquotient:
    p = module.p
    cycles, projection, lift = {}, {}, {}
    for x in module.base.points():
        z = kernel_basis(outgoing.components[x]) if outgoing is not None else ExactMatrix.identity(module.dims[x], p)
        if incoming is not None:
            boundaries = solve_columns(z, incoming.components[x])
            if boundaries is None:
                raise ModuleError(f"boundaries at {x!r} are not cycles; not a complex")
        else:
            boundaries = ExactMatrix.zeros(z.cols, 0, p)
        q = cokernel_projection(boundaries)
        cycles[x] = z
        projection[x] = q
        lift[x] = solve_columns(q, ExactMatrix.identity(q.rows, p))

    maps = {}
    for u, w in module.base.generating_edges():
        moved = solve_columns(cycles[w], module.maps[(u, w)] @ cycles[u] @ lift[u])
        maps[(u, w)] = projection[w] @ moved
    homology = PersistenceModule(
        module.base, {x: q.rows for x, q in projection.items()}, maps,
        module.stabilized_left, module.stabilized_right, p,
    )
    return Subquotient(module, homology, cycles, projection, lift)


def induced_subquotient_map(chain_map: NaturalTransformation, source: Subquotient, target: Subquotient) -> NaturalTransformation:
    """The map on homology induced by a chain map component."""
    components = {
        x: target.classes(x, chain_map.components[x] @ source.representatives(x))
        for x in source.module.base.points()
    }
    return NaturalTransformation(source.module, target.module, components)


# ----------------------------------------------------------------------
# Derived convolutions
# ----------------------------------------------------------------------

Side = Literal["first", "second"]


def _resolve(target: PersistenceModule, mode: str, length_cap: Optional[int]) -> Resolution:
    if mode == "sheaf":
        return injective_resolution(target, length_cap)
    return projective_resolution(target, length_cap)


def convolution_complex(
    m: PersistenceModule,
    n: PersistenceModule,
    mode: Literal["sheaf", "cosheaf"],
    window: Optional[GridPoset] = None,
    resolve: Side = "second",
    length_cap: Optional[int] = None,
) -> GradedComplex:
    """The complex whose (co)homology is the derived convolution.

    Sheaf: M * I^0 -> M * I^1 -> ... for an injective resolution I of N.
    Cosheaf: ... -> M (x) P_1 -> M (x) P_0 for a projective resolution P of N.
    If the requested argument has no resolution on its box the other one is
    resolved instead.
    """
    if mode not in ("sheaf", "cosheaf"):
        raise ValueError(f"unknown convolution mode {mode!r}")
    window = window or safe_window(m, n)
    other: Side = "first" if resolve == "second" else "second"
    try:
        resolution = _resolve(n if resolve == "second" else m, mode, length_cap)
    except ResolutionError as exc:
        # either side may be resolved
        logger.debug(f"{mode}: cannot resolve the {resolve} argument ({exc}); resolving the {other}")
        resolve = other
        resolution = _resolve(n if resolve == "second" else m, mode, length_cap)
    logger.debug(f"{mode}: resolved the {resolve} argument in {resolution.length} terms")

    def oracle(term: PersistenceModule) -> ConvolutionOracle:
        if resolve == "second":
            return ConvolutionOracle(m, term, window, mode)
        return ConvolutionOracle(term, n, window, mode)

    oracles = [oracle(term) for term in resolution.terms]
    terms = {i: o.module() for i, o in enumerate(oracles)}
    differentials = {}
    for i, d in enumerate(resolution.differentials):
        if mode == "sheaf":
            source, dest, degree = oracles[i], oracles[i + 1], i
        else:
            source, dest, degree = oracles[i + 1], oracles[i], i + 1
        if resolve == "second":
            differentials[degree] = source.morphism_to(dest, second_map=d)
        else:
            differentials[degree] = source.morphism_to(dest, first_map=d)
    if not terms:
        terms = {0: zero_module(window, m.p)}
    return GradedComplex(terms, differentials, cohomological=(mode == "sheaf"))


def derived_sheaf_convolve(
    m: PersistenceModule,
    n: PersistenceModule,
    window: Optional[GridPoset] = None,
    resolve: Side = "second",
    length_cap: Optional[int] = None,
) -> Dict[int, PersistenceModule]:
    """Cohomology modules of M *^R N, by degree.

    Raises:
        ResolutionError: If neither argument has an injective resolution on its box
        ResolutionCapError: If the resolution exceeds the length cap
        SafeWindowError: If the window leaves the safe window
    """
    complex_ = convolution_complex(m, n, "sheaf", window, resolve, length_cap)
    return dict(complex_.homology().terms)


def derived_cosheaf_convolve(
    m: PersistenceModule,
    n: PersistenceModule,
    window: Optional[GridPoset] = None,
    resolve: Side = "second",
    length_cap: Optional[int] = None,
) -> Dict[int, PersistenceModule]:
    """Homology modules of M (x)^L_gr N, by degree.

    Raises:
        ResolutionError: If neither argument has a projective resolution on its box
        ResolutionCapError: If the resolution exceeds the length cap
        SafeWindowError: If the window leaves the safe window
    """
    complex_ = convolution_complex(m, n, "cosheaf", window, resolve, length_cap)
    return dict(complex_.homology().terms)


def grid_convolve_barcodes(
    x: Barcode,
    y: Barcode,
    mode: Literal["sheaf", "cosheaf"],
    derived: bool = False,
    p: Optional[int] = None,
) -> GradedBarcode:
    """Convolution of barcodes with integer endpoints through the grid oracles.

    Covers bars without a closed form (closed or open ends): every bar is
    replaced by the integer points it contains, and the result is reported
    in half-open form like the closed forms.

    Raises:
        ModuleError: If an endpoint is not an integer
        ResolutionError: If neither realised barcode can be resolved
    """
    ends = [int(v) for bar in list(x) + list(y) for v in (bar.left.value, bar.right.value) if is_finite(v)]
    lo, hi = (min(ends), max(ends)) if ends else (0, 0)
    box = GridPoset.line(lo - 1, hi + 1)
    m, n = realize_barcode(box, x, p=p), realize_barcode(box, y, p=p)
    if mode == "sheaf":
        modules = derived_sheaf_convolve(m, n)
    elif mode == "cosheaf":
        modules = derived_cosheaf_convolve(m, n)
    else:
        raise ValueError(f"unknown convolution mode {mode!r}")
    result = grid_to_closed_form(graded_barcode_extract(modules), mode)
    logger.info(f"{mode} convolution on {box}: degrees {result.degrees()}")
    return result if derived else GradedBarcode({0: result[0]})


# ----------------------------------------------------------------------
# Derived direct images
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DerivedImage:
    """f_* of an injective resolution (or f_dagger of a projective one)."""
    complex: GradedComplex
    images: Tuple
    subquotients: Dict[int, Subquotient]

    def homology(self) -> Dict[int, PersistenceModule]:
        return {n: s.module for n, s in self.subquotients.items()}


def derived_direct_image(
    f: MonotoneMap,
    resolution: Resolution,
    variant: Literal["sheaf", "cosheaf"] = "sheaf",
) -> DerivedImage:
    """Rf_* from an injective resolution, or Lf_dagger from a projective one."""
    images = tuple(push_forward(f, term, variant) for term in resolution.terms)
    terms = {i: image.module for i, image in enumerate(images)}
    differentials = {}
    for i, d in enumerate(resolution.differentials):
        if variant == "sheaf":
            differentials[i] = images[i].morphism_to(images[i + 1], d)
        else:
            differentials[i + 1] = images[i + 1].morphism_to(images[i], d)
    if not terms:
        terms = {0: zero_module(f.target, resolution.module.p)}
    complex_ = GradedComplex(terms, differentials, cohomological=(variant == "sheaf"))
    subquotients = {
        n: subquotient(complex_.terms[n], complex_.incoming(n), complex_.outgoing(n))
        for n in complex_.degrees()
    }
    return DerivedImage(complex_, images, subquotients)
