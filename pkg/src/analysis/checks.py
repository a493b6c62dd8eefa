"""Randomized verification suites.

Each suite is deterministic for a given seed and returns plain counts plus a
description of every failure, ready to be printed as JSON.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Literal, Optional, Sequence

import numpy as np
from loguru import logger

from src.algebra.exactalg import ExactMatrix, is_invertible
from src.analysis.distance import bottleneck, convolution_distance, interleaving_distance
from src.analysis.stability import SimplicialComplex, direct_image_stability_check, stability_check
from src.config import config
from src.convolution.barcodes import barcode_extract, graded_barcode_extract, grid_to_closed_form, realize_barcode
from src.convolution.derived import GradedComplex, derived_cosheaf_convolve, derived_sheaf_convolve
from src.convolution.oracle import cosheaf_convolve_oracle, safe_window, sheaf_convolve_oracle
from src.models.interval import INF, Barcode, Interval, convolve_intervals
from src.models.pmodule import (
    PersistenceModule,
    conjugate,
    cosections,
    direct_image_cosheaf,
    direct_image_sheaf,
    direct_sum,
    hom_space,
    interval_module,
    principal_module,
    internal_hom,
    inverse_image,
    sections,
    zero_module,
)
from src.models.poset import FinitePreorder, GridPoset, MonotoneMap, principal_points, PrincipalSet


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    failures: List[dict] = field(default_factory=list)

    def record(self, ok: bool, detail: dict):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            self.failures.append(detail)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> dict:
        return {"suite": self.name, "pass": self.passed, "fail": self.failed, "failures": self.failures}


# ----------------------------------------------------------------------
# Random instances
# ----------------------------------------------------------------------

def random_half_open(rng: np.random.Generator, lo: int, hi: int) -> Interval:
    """[a, b) with lo <= a < b <= hi."""
    a, b = sorted(rng.choice(np.arange(lo, hi + 1), size=2, replace=False))
    return Interval.half_open(int(a), int(b))


def random_invertible(rng: np.random.Generator, n: int, p: int) -> ExactMatrix:
    while True:
        candidate = ExactMatrix(rng.integers(0, p, size=(n, n)), p)
        if is_invertible(candidate):
            return candidate


def random_box_module(rng: np.random.Generator, box: GridPoset, summands: int, p: int) -> PersistenceModule:
    """Sum of random rectangle modules, hidden behind a random change of basis."""
    parts = []
    for _ in range(summands):
        lo = tuple(int(rng.integers(a, b + 1)) for a, b in zip(box.lo, box.hi))
        hi = tuple(int(rng.integers(a, b + 1)) for a, b in zip(lo, box.hi))
        up = principal_points(box, PrincipalSet(lo, "up"))
        points = [x for x in up if all(v <= h for v, h in zip(x, hi))]
        parts.append(interval_module(box, points, p=p))
    module = direct_sum(parts) if parts else zero_module(box, p)
    return conjugate(module, {x: random_invertible(rng, d, p) for x, d in module.dims.items() if d})


def random_preorder(rng: np.random.Generator, size: int, density: float = 0.3) -> FinitePreorder:
    """Random relation closed up to a preorder; back edges are rarer, so cycles stay small."""
    pairs = [(i, j) for i in range(size) for j in range(size) if i != j and rng.random() < (density if i < j else density / 4)]
    return FinitePreorder.from_pairs(range(size), pairs)


def random_preorder_module(rng: np.random.Generator, q: FinitePreorder, summands: int, p: int) -> PersistenceModule:
    """Sum of random principal up-set and down-set modules, after a change of basis."""
    parts = []
    for _ in range(summands):
        x = q.points()[int(rng.integers(0, len(q.points())))]
        points = q.up_set(x) if rng.random() < 0.5 else q.down_set(x)
        parts.append(interval_module(q, points, p=p))
    module = direct_sum(parts) if parts else zero_module(q, p)
    return conjugate(module, {x: random_invertible(rng, d, p) for x, d in module.dims.items() if d})


def random_monotone_map(rng: np.random.Generator, q: FinitePreorder, target: GridPoset) -> MonotoneMap:
    """Monotone map built along a linear extension, clamped to the box."""
    values: Dict[Hashable, tuple] = {}
    for x in q.points():
        twin = next((y for y in values if q.equivalent(x, y)), None)
        if twin is not None:
            values[x] = values[twin]
            continue
        below = [values[y] for y in values if q.leq(y, x)]
        floor = tuple(max([a] + [v[i] for v in below]) for i, a in enumerate(target.lo))
        values[x] = tuple(min(v + int(rng.integers(0, 3)), b) for v, b in zip(floor, target.hi))
    return MonotoneMap(q, target, values)


# ----------------------------------------------------------------------
# Suites
# ----------------------------------------------------------------------

Mode = Literal["sheaf", "cosheaf"]


def closed_form_trial(i: Interval, j: Interval, mode: Mode, box: GridPoset,
                      window: Optional[GridPoset] = None, derived: bool = True, p: Optional[int] = None):
    """Closed form and grid oracle for one pair; returns (expected, observed)."""
    m = realize_barcode(box, Barcode([i]), p=p)
    n = realize_barcode(box, Barcode([j]), p=p)
    if mode == "sheaf":
        modules = derived_sheaf_convolve(m, n, window)
    else:
        modules = derived_cosheaf_convolve(m, n, window)
    if not derived:
        modules = {0: modules.get(0, zero_module(window or box, m.p))}
    observed = grid_to_closed_form(graded_barcode_extract(modules), mode)
    expected = convolve_intervals(i, j, mode, derived)
    return expected, observed


def oracle_suite(trials: Optional[int] = None, seed: Optional[int] = None,
                 window: Optional[GridPoset] = None, modes: Sequence[Mode] = ("sheaf", "cosheaf")) -> SuiteResult:
    """Closed forms against the grid oracles on random half-open pairs."""
    trials = config.oracle.trials if trials is None else trials
    seed = config.oracle.seed if seed is None else seed
    lo, hi = config.oracle.endpoint_lo, config.oracle.endpoint_hi
    box = GridPoset.line(lo - 1, hi + 1)
    if window is None:
        window = GridPoset.line(config.oracle.window_lo, config.oracle.window_hi)
    rng = np.random.default_rng(seed)
    result = SuiteResult("oracle")
    for trial in range(trials):
        i, j = random_half_open(rng, lo, hi), random_half_open(rng, lo, hi)
        for mode in modes:
            expected, observed = closed_form_trial(i, j, mode, box, window)
            result.record(expected == observed, {
                "trial": trial, "mode": mode, "first": str(i), "second": str(j),
                "expected": repr(expected), "observed": repr(observed),
            })
    logger.info(f"oracle suite: {result.passed} passed, {result.failed} failed")
    return result


def adjunction_suite(trials: int = 10, seed: int = 0, parameters: int = 1, p: Optional[int] = None) -> SuiteResult:
    """Dimension equalities of the inverse/direct image and tensor/hom adjunctions."""
    p = config.field.prime if p is None else p
    rng = np.random.default_rng(seed)
    box = GridPoset.cube(0, 3, parameters)
    result = SuiteResult("adjunction")
    for trial in range(trials):
        q = random_preorder(rng, int(rng.integers(3, 6)))
        f = random_monotone_map(rng, q, box)
        sheaf = random_preorder_module(rng, q, 2, p)
        g = random_box_module(rng, box, 2, p)

        pulled = inverse_image(f, g)
        lhs, rhs = hom_space(pulled, sheaf), hom_space(g, direct_image_sheaf(f, sheaf))
        result.record(lhs == rhs, {"trial": trial, "check": "inverse image / direct image", "lhs": lhs, "rhs": rhs})

        lhs, rhs = hom_space(direct_image_cosheaf(f, sheaf), g), hom_space(sheaf, pulled)
        result.record(lhs == rhs, {"trial": trial, "check": "cosheaf direct image / inverse image", "lhs": lhs, "rhs": rhs})

        m, n, target = (random_box_module(rng, box, 2, p) for _ in range(3))
        tensor = cosheaf_convolve_oracle(m, n, box)
        left = hom_space(tensor, target)
        first = hom_space(m, internal_hom(n, target))
        second = hom_space(n, internal_hom(m, target))
        result.record(left == first == second, {
            "trial": trial, "check": "tensor / internal hom", "lhs": left, "rhs": [first, second],
        })
    logger.info(f"adjunction suite: {result.passed} passed, {result.failed} failed")
    return result


def curry_suite(module: PersistenceModule) -> SuiteResult:
    """Sections over U_x and cosections over D_x recover the stalk at x."""
    result = SuiteResult("curry")
    for x in module.base.points():
        up, down = module.base.up_set(x), module.base.down_set(x)
        got = (sections(module, up), cosections(module, down))
        want = module.dims[x]
        result.record(got == (want, want), {"point": list(x) if isinstance(x, tuple) else x, "stalk": want, "got": list(got)})
    return result


def stability_suite(trials: int = 10, seed: int = 0, p: Optional[int] = None) -> SuiteResult:
    """Sublevel stability on random complexes and direct-image stability on random preorders."""
    p = config.field.prime if p is None else p
    rng = np.random.default_rng(seed)
    result = SuiteResult("stability")
    for trial in range(trials):
        vertices = int(rng.integers(3, 7))
        maximal = [tuple(sorted(rng.choice(vertices, size=int(rng.integers(2, 4)), replace=False).tolist()))
                   for _ in range(vertices)]
        complex_ = SimplicialComplex.closure(maximal + [(v,) for v in range(vertices)])
        f = {v: Fraction(int(rng.integers(0, 20)), 2) for v in complex_.vertices}
        g = {v: f[v] + Fraction(int(rng.integers(-3, 4)), 2) for v in complex_.vertices}
        for degree in (0, 1):
            report = stability_check(complex_, f, g, degree)
            result.record(report.holds, {"trial": trial, "check": "sublevel", **report.to_dict()})

        q = random_preorder(rng, int(rng.integers(3, 6)))
        parameters = 1 if trial % 2 == 0 else 2
        target = GridPoset.cube(0, 4, parameters)
        module = random_preorder_module(rng, q, 2, p)
        first, second = random_monotone_map(rng, q, target), random_monotone_map(rng, q, target)
        for variant in ("sheaf", "cosheaf"):
            report = direct_image_stability_check(first, second, module, variant)
            result.record(report.holds, {"trial": trial, "check": "direct image", **report.to_dict()})
    logger.info(f"stability suite: {result.passed} passed, {result.failed} failed")
    return result


def translation_suite(trials: int = 20, seed: int = 0, p: Optional[int] = None) -> SuiteResult:
    """Convolving with k[U_s] (cosheaf) or k[D_s] (sheaf) shifts barcodes by s."""
    p = config.field.prime if p is None else p
    rng = np.random.default_rng(seed)
    lo, hi = config.oracle.endpoint_lo, config.oracle.endpoint_hi
    box = GridPoset.line(lo - 1, hi + 1)
    result = SuiteResult("translation")
    for trial in range(trials):
        bar = random_half_open(rng, lo, hi)
        s, t = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        m = realize_barcode(box, Barcode([bar]), p=p)
        want = Barcode([bar.translate(s)])

        up = principal_module(box, (s,), "up", p)
        got = barcode_extract(cosheaf_convolve_oracle(m, up, safe_window(m, up)))
        result.record(got == want, {"trial": trial, "check": "cosheaf unit shift", "bar": str(bar), "s": s, "got": repr(got)})

        down = principal_module(box, (s,), "down", p)
        got = barcode_extract(sheaf_convolve_oracle(m, down, safe_window(m, down)))
        result.record(got == want, {"trial": trial, "check": "sheaf unit shift", "bar": str(bar), "s": s, "got": repr(got)})

        once = cosheaf_convolve_oracle(m, up, safe_window(m, up))
        again = principal_module(box, (t,), "up", p)
        got = barcode_extract(cosheaf_convolve_oracle(once, again, safe_window(once, again)))
        want = Barcode([bar.translate(s + t)])
        result.record(got == want, {"trial": trial, "check": "composition", "bar": str(bar), "s": s, "t": t, "got": repr(got)})
    logger.info(f"translation suite: {result.passed} passed, {result.failed} failed")
    return result


def symmetry_suite(trials: int = 20, seed: int = 0, p: Optional[int] = None) -> SuiteResult:
    """Both convolutions give the same barcode for (M, N) and (N, M)."""
    p = config.field.prime if p is None else p
    rng = np.random.default_rng(seed)
    lo, hi = config.oracle.endpoint_lo, config.oracle.endpoint_hi
    box = GridPoset.line(lo - 1, hi + 1)
    result = SuiteResult("symmetry")
    for trial in range(trials):
        i, j = random_half_open(rng, lo, hi), random_half_open(rng, lo, hi)
        m, n = realize_barcode(box, Barcode([i]), p=p), realize_barcode(box, Barcode([j]), p=p)
        window = safe_window(m, n)
        for mode, oracle in (("sheaf", sheaf_convolve_oracle), ("cosheaf", cosheaf_convolve_oracle)):
            first, second = barcode_extract(oracle(m, n, window)), barcode_extract(oracle(n, m, window))
            result.record(first == second, {
                "trial": trial, "mode": mode, "first": str(i), "second": str(j),
                "mn": repr(first), "nm": repr(second),
            })
    logger.info(f"symmetry suite: {result.passed} passed, {result.failed} failed")
    return result


def three_way_suite(trials: int = 10, seed: int = 0, p: Optional[int] = None) -> SuiteResult:
    """Bottleneck, convolution distance and the interleaving search agree.

    Barcodes have integer endpoints and are realised at grid step 1/2, so every
    bottleneck value is a whole number of grid steps.
    """
    p = config.field.prime if p is None else p
    rng = np.random.default_rng(seed)
    box = GridPoset.line(-1, 7)
    result = SuiteResult("three-way")
    for trial in range(trials):
        x = Barcode([random_half_open(rng, 0, 3) for _ in range(int(rng.integers(1, 3)))])
        y = Barcode([random_half_open(rng, 0, 3) for _ in range(int(rng.integers(1, 3)))])
        m, n = realize_barcode(box, x, scale=2, p=p), realize_barcode(box, y, scale=2, p=p)
        expected = bottleneck(x, y)
        through = convolution_distance(GradedComplex({0: m}), GradedComplex({0: n}), scale=2).value
        steps = interleaving_distance(m, n, strategy="search")
        searched = None if steps is None else Fraction(steps, 2)
        result.record(expected == through == searched, {
            "trial": trial, "first": repr(x), "second": repr(y),
            "bottleneck": str(expected), "convolution": str(through), "search": str(searched),
        })
    logger.info(f"three-way suite: {result.passed} passed, {result.failed} failed")
    return result


def global_sections_suite(trials: int = 10, seed: int = 0, p: Optional[int] = None) -> SuiteResult:
    """Global sections of M * k[D_d] and global cosections of M (x)_gr k[U_d] do not depend on d.

    Each random barcode carries rays towards -inf (sheaf side) or +inf
    (cosheaf side), one global (co)section per ray.
    """
    p = config.field.prime if p is None else p
    rng = np.random.default_rng(seed)
    box = GridPoset.line(-1, 6)
    result = SuiteResult("sections")
    for trial in range(trials):
        finite = [random_half_open(rng, 0, 5) for _ in range(int(rng.integers(0, 3)))]
        rays = int(rng.integers(1, 3))
        below = Barcode(finite + [Interval.half_open(-INF, int(rng.integers(1, 6))) for _ in range(rays)])
        above = Barcode(finite + [Interval.half_open(int(rng.integers(0, 5)), INF) for _ in range(rays)])
        m, n = realize_barcode(box, below, p=p), realize_barcode(box, above, p=p)
        base_sections, base_cosections = sections(m, box.points()), cosections(n, box.points())
        for delta in range(3):
            down = principal_module(box, (delta,), "down", p)
            convolved = sheaf_convolve_oracle(m, down, safe_window(m, down))
            got = sections(convolved, convolved.base.points())
            result.record(got == base_sections == rays, {
                "trial": trial, "check": "sheaf sections", "barcode": repr(below), "delta": delta,
                "expected": rays, "got": [base_sections, got],
            })

            up = principal_module(box, (delta,), "up", p)
            convolved = cosheaf_convolve_oracle(n, up, safe_window(n, up))
            got = cosections(convolved, convolved.base.points())
            result.record(got == base_cosections == rays, {
                "trial": trial, "check": "cosheaf cosections", "barcode": repr(above), "delta": delta,
                "expected": rays, "got": [base_cosections, got],
            })
    logger.info(f"sections suite: {result.passed} passed, {result.failed} failed")
    return result
