from fractions import Fraction

import pytest

from src.analysis.checks import random_box_module, random_half_open, random_invertible
from src.analysis.distance import (
    EpsilonCertificate,
    InterleavingSearchError,
    NonzeroDifferentialError,
    bottleneck,
    interleaving_distance_barcodes,
    certificate_validate,
    convolution_distance,
    homology_distance_bound,
    interleaving_distance,
    interleaving_feasible,
)
from src.config import InterleavingConfig, config
from src.convolution.barcodes import realize_barcode
from src.convolution.derived import GradedComplex
from src.models.interval import INF, Barcode, GradedBarcode, Interval
from src.models.pmodule import NaturalTransformation, conjugate, interval_module, zero_module
from src.models.poset import GridPoset

H = Interval.half_open


def test_bottleneck_examples():
    assert bottleneck(Barcode([H(0, 2)]), Barcode()) == 1
    assert bottleneck(Barcode([H(0, 4)]), Barcode([H(1, 5)])) == 1
    assert bottleneck(Barcode(), Barcode()) == 0
    assert bottleneck(Barcode([H(0, 1), H(0, 10)]), Barcode([H(0, 10)])) == Fraction(1, 2)


def test_bottleneck_with_infinite_bars():
    assert bottleneck(Barcode([H(0, INF)]), Barcode()) == INF
    assert bottleneck(Barcode([H(0, INF)]), Barcode([H(2, INF)])) == 2
    assert bottleneck(Barcode([H(0, INF)]), Barcode([H(-INF, 2)])) == INF


def test_bottleneck_matching_is_returned():
    result = interleaving_distance_barcodes(Barcode([H(0, 4), H(7, 8)]), Barcode([H(1, 5)]))
    assert result.value == 1
    assert (H(0, 4), H(1, 5)) in result.matching
    assert (H(7, 8), None) in result.matching


def test_convolution_distance_is_a_bound_across_degrees():
    x = GradedBarcode({0: Barcode([H(0, 2)])})
    y = GradedBarcode({0: Barcode([H(0, 2)]), 1: Barcode([H(5, 6)])})
    result = convolution_distance(x, y)
    assert result.value == Fraction(1, 2)
    assert result.bound_only
    assert dict(result.per_degree) == {0: 0, 1: Fraction(1, 2)}

    same = convolution_distance(y, y)
    assert same.value == 0
    assert not same.bound_only


def test_convolution_distance_in_one_degree_is_exact():
    result = convolution_distance(GradedBarcode({0: Barcode([H(0, 2)])}), GradedBarcode({}))
    assert result.value == 1
    assert not result.bound_only


def test_complexes_need_zero_differentials():
    line = GridPoset.line(0, 3)
    m = interval_module(line, [(1,), (2,)])
    complex_ = GradedComplex({0: m, 1: m}, {0: NaturalTransformation.identity(m)})
    with pytest.raises(NonzeroDifferentialError):
        convolution_distance(complex_, complex_)
    zero = GradedComplex({0: zero_module(line)})
    assert homology_distance_bound(complex_, zero).value == 0

    split = GradedComplex({0: m})
    assert convolution_distance(split, zero).value == 1


def test_interleaving_with_zero():
    line = GridPoset.line(0, 4)
    m = interval_module(line, [(0,), (1,)])
    zero = zero_module(line)
    assert interleaving_feasible(m, zero, 1) is not None
    assert interleaving_feasible(m, zero, 0) is None
    assert interleaving_distance(m, zero) == 1
    assert interleaving_distance(m, zero, strategy="search") == 1


def test_interleaving_of_overlapping_bars():
    line = GridPoset.line(0, 8)
    m = realize_barcode(line, Barcode([H(1, 5)]))
    n = realize_barcode(line, Barcode([H(2, 6)]))
    certificate = interleaving_feasible(m, n, 1)
    assert certificate is not None
    assert certificate_validate(certificate)
    assert interleaving_distance(m, n) == 1


def test_refined_grid_distance():
    line = GridPoset.line(0, 8)
    m = realize_barcode(line, Barcode([H(0, Fraction(1, 2))]), scale=2)
    assert interleaving_distance(m, zero_module(line)) == 1


def test_two_parameter_search():
    box = GridPoset.cube(0, 2, 2)
    m = interval_module(box, [(0, 0)])
    assert interleaving_distance(m, zero_module(box)) == 1


def test_isomorphic_modules_are_zero_apart(rng):
    box = GridPoset.cube(0, 2, 2)
    m = random_box_module(rng, box, 2, 2)
    c = conjugate(m, {x: random_invertible(rng, d, 2) for x, d in m.dims.items() if d})
    assert interleaving_distance(m, c) == 0


def test_broken_certificate_is_rejected():
    line = GridPoset.line(0, 3)
    m = interval_module(line, [(0,), (1,), (2,)])
    zero_map = NaturalTransformation.zero(m, m)
    assert not certificate_validate(EpsilonCertificate(0, m, m, zero_map, zero_map))
    identity = NaturalTransformation.identity(m)
    assert certificate_validate(EpsilonCertificate(0, m, m, identity, identity))


def test_epsilon_range():
    line = GridPoset.line(0, 4)
    m = zero_module(line)
    with pytest.raises(ValueError):
        interleaving_feasible(m, m, -1)
    with pytest.raises(ValueError):
        interleaving_feasible(m, m, 6)


def test_search_cap():
    config.interleaving = InterleavingConfig(max_enumeration=1)
    box = GridPoset.cube(0, 1, 2)
    m = interval_module(box, box.points())
    try:
        with pytest.raises(InterleavingSearchError):
            interleaving_feasible(m, m, 0)
    finally:
        config.interleaving = InterleavingConfig()


def random_barcode(rng):
    bars = [random_half_open(rng, 0, 8) for _ in range(int(rng.integers(0, 4)))]
    if rng.random() < 0.5:
        bars.append(H(int(rng.integers(0, 8)), INF))
    return Barcode(bars)


def test_bottleneck_is_a_pseudometric(rng):
    for _ in range(30):
        a, b, c = (random_barcode(rng) for _ in range(3))
        ab = interleaving_distance_barcodes(a, b).value
        assert interleaving_distance_barcodes(a, a).value == 0
        assert ab == interleaving_distance_barcodes(b, a).value
        assert interleaving_distance_barcodes(a, c).value <= ab + interleaving_distance_barcodes(b, c).value


def test_feasibility_is_monotone_in_epsilon(rng):
    line = GridPoset.line(0, 4)
    for _ in range(4):
        m, n = random_box_module(rng, line, 2, 2), random_box_module(rng, line, 2, 2)
        by_bars = [interleaving_feasible(m, n, eps) is not None for eps in range(6)]
        by_search = [interleaving_feasible(m, n, eps, strategy="search") is not None for eps in range(6)]
        assert by_bars == by_search
        assert by_bars == sorted(by_bars)
        assert by_bars[-1]
