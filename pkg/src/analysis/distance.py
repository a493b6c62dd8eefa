"""Bottleneck, interleaving and convolution distances.

Interleavings on a grid box use an integer epsilon and the shift M(-eps)
reading M at x - eps. Identities whose components would sit below the box are
not imposed; for modules vanishing on an eps-margin below the box this is the
usual notion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from src.algebra.exactalg import ExactMatrix, FieldElement, inverse, solve_columns
from src.config import config
from src.convolution.barcodes import barcode_extract, decomposition_basis, interval_basis
from src.convolution.derived import GradedComplex
from src.models.interval import INF, Barcode, GradedBarcode, Interval, Value, is_finite
from src.models.pmodule import ModuleError, NaturalTransformation, PersistenceModule, hom_basis, shift
from src.models.poset import GridPoset, add


class NonzeroDifferentialError(ValueError):
    """Raised when a distance needs split complexes but got nonzero differentials."""
    pass


class InterleavingSearchError(RuntimeError):
    """Raised when the interleaving search space exceeds the configured cap."""
    pass


Pair = Tuple[Optional[Interval], Optional[Interval]]


@dataclass(frozen=True, eq=False)
class EpsilonCertificate:
    """An eps-interleaving: forward M(-eps) -> N and backward N(-eps) -> M."""
    epsilon: int
    first: PersistenceModule
    second: PersistenceModule
    forward: NaturalTransformation
    backward: NaturalTransformation


@dataclass(frozen=True)
class DistanceResult:
    value: Value
    bound_only: bool = False
    certificate: Optional[EpsilonCertificate] = None
    matching: Tuple[Pair, ...] = ()
    per_degree: Tuple[Tuple[int, Value], ...] = ()


# ----------------------------------------------------------------------
# Bottleneck distance
# ----------------------------------------------------------------------

def _gap(u: Value, v: Value) -> Value:
    if is_finite(u) and is_finite(v):
        return abs(u - v)
    return 0 if u == v else INF


def matching_cost(i: Interval, j: Interval) -> Value:
    """l-infinity distance between the endpoint pairs."""
    return max(_gap(i.left.value, j.left.value), _gap(i.right.value, j.right.value))


def diagonal_cost(i: Interval) -> Value:
    """Cost of leaving ``i`` unmatched: half its length."""
    length = i.length
    return length / 2 if is_finite(length) else INF


def _matching_indices(a: Sequence[Interval], b: Sequence[Interval], epsilon: Value) -> Optional[List[Tuple[Optional[int], Optional[int]]]]:
    """Pairs of indices (None for the diagonal) of an eps-matching, if any."""
    n, m = len(a), len(b)
    size = n + m
    if size == 0:
        return []
    rows: List[int] = []
    cols: List[int] = []
    for i in range(n):
        for j in range(m):
            if matching_cost(a[i], b[j]) <= epsilon:
                rows.append(i)
                cols.append(j)
        if diagonal_cost(a[i]) <= epsilon:
            rows.append(i)
            cols.append(m + i)
    for j in range(m):
        if diagonal_cost(b[j]) <= epsilon:
            rows.append(n + j)
            cols.append(j)
        for i in range(n):
            rows.append(n + j)
            cols.append(m + i)
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size))
    matched = maximum_bipartite_matching(graph, perm_type="column")
    if (matched < 0).any():
        return None
    pairs: List[Tuple[Optional[int], Optional[int]]] = []
    for i in range(n):
        c = int(matched[i])
        pairs.append((i, c if c < m else None))
    for j in range(m):
        if int(matched[n + j]) == j:
            pairs.append((None, j))
    return pairs


def _candidates(a: Sequence[Interval], b: Sequence[Interval]) -> List[Value]:
    values = {Fraction(0)}
    values.update(matching_cost(i, j) for i in a for j in b)
    values.update(diagonal_cost(i) for i in list(a) + list(b))
    return sorted(v for v in values if is_finite(v))


def interleaving_distance_barcodes(a: Barcode, b: Barcode) -> DistanceResult:
    """Bottleneck distance with an optimal matching."""
    bars_a, bars_b = a.expanded(), b.expanded()
    candidates = _candidates(bars_a, bars_b)
    lo, hi = 0, len(candidates) - 1
    best: Optional[Tuple[Value, list]] = None
    while lo <= hi:
        mid = (lo + hi) // 2
        pairs = _matching_indices(bars_a, bars_b, candidates[mid])
        if pairs is not None:
            best = (candidates[mid], pairs)
            hi = mid - 1
        else:
            lo = mid + 1
    if best is None:
        return DistanceResult(INF)
    value, pairs = best
    matching = tuple(
        (bars_a[i] if i is not None else None, bars_b[j] if j is not None else None) for i, j in pairs
    )
    return DistanceResult(value, matching=matching)


def bottleneck(a: Barcode, b: Barcode) -> Value:
    """Bottleneck distance between barcodes; may be infinite."""
    return interleaving_distance_barcodes(a, b).value


# ----------------------------------------------------------------------
# Interleavings
# ----------------------------------------------------------------------

def _shift_vector(box: GridPoset, epsilon: int) -> Tuple[int, ...]:
    return (-epsilon,) * box.dim


def _triangle_points(box: GridPoset, epsilon: int) -> List[Tuple[int, ...]]:
    back = _shift_vector(box, epsilon)
    return [x for x in box.points() if box.contains(add(x, back))]


def certificate_validate(certificate: EpsilonCertificate) -> bool:
    """Exact check of naturality and both triangle identities."""
    m, n, eps = certificate.first, certificate.second, certificate.epsilon
    f, g = certificate.forward, certificate.backward
    if not (f.is_natural() and g.is_natural()):
        logger.debug("interleaving maps are not natural")
        return False
    box: GridPoset = m.base
    back = _shift_vector(box, eps)
    for x in _triangle_points(box, eps):
        y = add(x, back)
        z = add(y, back)
        if g.components[x] @ f.components[y] != m.transition(z, x):
            logger.debug(f"backward-forward triangle fails at {x}")
            return False
        if f.components[x] @ g.components[y] != n.transition(z, x):
            logger.debug(f"forward-backward triangle fails at {x}")
            return False
    return True


def _check_pair(m: PersistenceModule, n: PersistenceModule, epsilon: int) -> GridPoset:
    if not (m.is_grid and n.is_grid and m.base.same_as(n.base)):
        raise ModuleError("interleavings compare modules on the same grid box")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    box: GridPoset = m.base
    width = max(b - a for a, b in zip(box.lo, box.hi)) + 1
    if epsilon > width:
        raise ValueError(f"epsilon {epsilon} is out of the window (box width {width})")
    return box


def _bar_map(source: PersistenceModule, target: PersistenceModule, source_summands, target_summands,
             pairs, epsilon: int) -> NaturalTransformation:
    """source(-eps) -> target sending matched bars to each other."""
    shifted = shift(source, (-epsilon,))
    matched = {i: j for i, j in pairs if i is not None and j is not None}
    p = source.p
    components = {}
    for (t,) in target.base.points():
        resolved = source.resolve((t - epsilon,))
        if resolved is None or shifted.dims[(t,)] == 0 or target.dims[(t,)] == 0:
            continue
        r = resolved[0]
        rows = [j for j, s in enumerate(target_summands) if s.alive(t)]
        cols = [i for i, s in enumerate(source_summands) if s.alive(r)]
        row_pos = {j: k for k, j in enumerate(rows)}
        bar_matrix = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for c, i in enumerate(cols):
            j = matched.get(i)
            if j is not None and j in row_pos:
                bar_matrix[row_pos[j], c] = 1
        components[(t,)] = (
            decomposition_basis(target, target_summands, t)
            @ ExactMatrix(bar_matrix, p)
            @ inverse(decomposition_basis(source, source_summands, r))
        )
    return NaturalTransformation(shifted, target, components)


def _one_parameter_certificate(m: PersistenceModule, n: PersistenceModule, epsilon: int) -> Optional[EpsilonCertificate]:
    sm, sn = interval_basis(m), interval_basis(n)
    pairs = _matching_indices([s.bar() for s in sm], [s.bar() for s in sn], epsilon)
    if pairs is None:
        return None
    forward = _bar_map(m, n, sm, sn, pairs, epsilon)
    backward = _bar_map(n, m, sn, sm, [(j, i) for i, j in pairs], epsilon)
    return EpsilonCertificate(epsilon, m, n, forward, backward)


def _combine(basis: Sequence[NaturalTransformation], coeffs: Sequence[Union[int, FieldElement]], source, target) -> NaturalTransformation:
    components = {}
    for x in source.base.points():
        total = ExactMatrix.zeros(target.dims[x], source.dims[x], source.p)
        for phi, c in zip(basis, coeffs):
            if c:
                total = total + phi.components[x].scale(c)
        components[x] = total
    return NaturalTransformation(source, target, components)


def _solve_backward(f: NaturalTransformation, candidates: Sequence[NaturalTransformation],
                    m: PersistenceModule, n: PersistenceModule, epsilon: int) -> Optional[NaturalTransformation]:
    """Solve the triangle identities, affine in the backward map, for a fixed forward map."""
    box: GridPoset = m.base
    back = _shift_vector(box, epsilon)
    p = m.p
    columns: List[List[np.ndarray]] = [[] for _ in candidates]
    rhs: List[np.ndarray] = []
    for x in _triangle_points(box, epsilon):
        y = add(x, back)
        z = add(y, back)
        rhs.append(m.transition(z, x).array.reshape(-1))
        rhs.append(n.transition(z, x).array.reshape(-1))
        for k, g in enumerate(candidates):
            columns[k].append((g.components[x] @ f.components[y]).array.reshape(-1))
            columns[k].append((f.components[x] @ g.components[y]).array.reshape(-1))
    target = np.concatenate(rhs) if rhs else np.zeros(0, dtype=np.int64)
    if candidates:
        system = np.column_stack([np.concatenate(c) if c else np.zeros(0, dtype=np.int64) for c in columns])
    else:
        system = np.zeros((target.shape[0], 0), dtype=np.int64)
    coeffs = solve_columns(ExactMatrix(system.reshape(target.shape[0], len(candidates)), p),
                           ExactMatrix(target.reshape(-1, 1), p))
    if coeffs is None:
        return None
    shifted_n = shift(n, back)
    return _combine(candidates, [coeffs.entry(k, 0) for k in range(coeffs.rows)], shifted_n, m)


def _search_certificate(m: PersistenceModule, n: PersistenceModule, epsilon: int) -> Optional[EpsilonCertificate]:
    box: GridPoset = m.base
    back = _shift_vector(box, epsilon)
    shifted_m, shifted_n = shift(m, back), shift(n, back)
    forwards = hom_basis(shifted_m, n)
    backwards = hom_basis(shifted_n, m)
    count = m.p ** len(forwards)
    if count > config.interleaving.max_enumeration:
        raise InterleavingSearchError(
            f"{count} candidate forward maps exceed the cap of {config.interleaving.max_enumeration}"
        )
    logger.debug(f"searching {count} forward maps at epsilon={epsilon}")
    for coeffs in itertools.product(range(m.p), repeat=len(forwards)):
        f = _combine(forwards, coeffs, shifted_m, n)
        g = _solve_backward(f, backwards, m, n, epsilon)
        if g is not None:
            return EpsilonCertificate(epsilon, m, n, f, g)
    return None


def interleaving_feasible(m: PersistenceModule, n: PersistenceModule, epsilon: int,
                          strategy: str = "auto") -> Optional[EpsilonCertificate]:
    """An eps-interleaving certificate between M and N, or None if there is none.

    One-parameter modules are decomposed into bars and interleaved along a
    bottleneck matching; otherwise forward maps are enumerated and the
    backward map is solved exactly.

    Raises:
        InterleavingSearchError: If the enumeration exceeds the configured cap
        ValueError: If epsilon is negative or larger than the box
    """
    box = _check_pair(m, n, int(epsilon))
    epsilon = int(epsilon)
    if strategy not in ("auto", "bars", "search"):
        raise ValueError(f"unknown interleaving strategy {strategy!r}")
    if strategy == "bars" or (strategy == "auto" and box.dim == 1):
        if box.dim != 1:
            raise ModuleError("bar matching needs one-parameter modules")
        certificate = _one_parameter_certificate(m, n, epsilon)
    else:
        certificate = _search_certificate(m, n, epsilon)
    if certificate is not None and not certificate_validate(certificate):
        raise ModuleError("constructed interleaving failed validation")
    return certificate


def interleaving_distance(m: PersistenceModule, n: PersistenceModule, strategy: str = "auto") -> Optional[int]:
    """Smallest integer epsilon admitting an interleaving, None if none fits the box."""
    box = _check_pair(m, n, 0)
    width = max(b - a for a, b in zip(box.lo, box.hi)) + 1
    for epsilon in range(width + 1):
        if interleaving_feasible(m, n, epsilon, strategy) is not None:
            return epsilon
    return None


# ----------------------------------------------------------------------
# Convolution distance
# ----------------------------------------------------------------------

Graded = Union[GradedBarcode, GradedComplex]


def _as_graded_barcode(x: Graded, scale: int) -> GradedBarcode:
    if isinstance(x, GradedBarcode):
        return x
    if not x.has_zero_differentials():
        raise NonzeroDifferentialError("convolution distance needs a complex with zero differentials")
    return GradedBarcode({d: barcode_extract(m, scale) for d, m in x.terms.items()})


def _combine_degrees(x: GradedBarcode, y: GradedBarcode, exact: bool) -> DistanceResult:
    degrees = sorted(set(x.degrees()) | set(y.degrees()))
    per_degree = tuple((d, bottleneck(x[d], y[d])) for d in degrees)
    value = max((v for _, v in per_degree), default=Fraction(0))
    return DistanceResult(value, bound_only=not (exact or value == 0), per_degree=per_degree)


def convolution_distance(x: Graded, y: Graded, scale: int = 1) -> DistanceResult:
    """max over degrees of the bottleneck distances.

    The value is exact when all bars sit in a single degree, and an upper
    bound (``bound_only``) otherwise.

    Raises:
        NonzeroDifferentialError: If a complex has a nonzero differential
    """
    bx, by = _as_graded_barcode(x, scale), _as_graded_barcode(y, scale)
    concentrated = len(set(bx.degrees()) | set(by.degrees())) <= 1
    return _combine_degrees(bx, by, concentrated)


def homology_distance_bound(x: GradedComplex, y: GradedComplex, scale: int = 1) -> DistanceResult:
    """Upper bound on the distance of the (co)homology of two complexes."""
    hx = GradedBarcode({d: barcode_extract(m, scale) for d, m in x.homology().terms.items()})
    hy = GradedBarcode({d: barcode_extract(m, scale) for d, m in y.homology().terms.items()})
    return _combine_degrees(hx, hy, False)
