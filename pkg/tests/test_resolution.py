import pytest

from src.analysis.checks import random_invertible
from src.convolution.barcodes import realize_barcode
from src.convolution.resolution import (
    ResolutionCapError,
    ResolutionError,
    free_module,
    injective_resolution,
    projective_resolution,
)
from src.models.interval import Barcode, Interval
from src.models.pmodule import conjugate, constant_module, direct_sum, interval_module, principal_module, zero_module
from src.models.poset import FinitePreorder, GridPoset

H = Interval.half_open


def test_injective_resolution_of_a_finite_bar():
    line = GridPoset.line(0, 6)
    m = realize_barcode(line, Barcode([H(2, 4)]))
    resolution = injective_resolution(m)
    assert resolution.length == 2
    assert resolution.generators == (((3,),), ((1,),))
    first = resolution.terms[0]
    assert first.support() == [(t,) for t in range(4)]
    assert first.stabilized_left == (True,)
    assert resolution.terms[1].support() == [(0,), (1,)]
    assert resolution.is_exact()


def test_projective_resolution_of_a_finite_bar():
    line = GridPoset.line(0, 6)
    resolution = projective_resolution(realize_barcode(line, Barcode([H(2, 4)])))
    assert resolution.generators == (((2,),), ((4,),))
    assert resolution.terms[1].stabilized_right == (True,)
    assert resolution.is_exact()


def test_principal_up_module_is_free(line):
    resolution = projective_resolution(principal_module(line, (2,), "up"))
    assert resolution.length == 1
    assert resolution.is_exact()


def test_left_stabilized_module_has_no_projective_resolution(line):
    with pytest.raises(ResolutionError):
        projective_resolution(principal_module(line, (2,), "down"))


def test_injective_resolution_of_an_up_ray(line):
    resolution = injective_resolution(principal_module(line, (2,), "up"))
    assert resolution.length == 2
    assert resolution.generators == (((5,),), ((1,),))
    first = resolution.terms[0]
    assert first.support() == line.points()
    assert first.stabilized_left == (True,)
    assert first.stabilized_right == (True,)
    assert resolution.terms[1].support() == [(0,), (1,)]
    assert resolution.is_exact()


def test_module_cut_off_above_the_box(line):
    with pytest.raises(ResolutionError):
        projective_resolution(interval_module(line, [(4,), (5,)]))


def test_length_cap():
    m = realize_barcode(GridPoset.line(0, 6), Barcode([H(2, 4)]))
    with pytest.raises(ResolutionCapError):
        injective_resolution(m, length_cap=0)
    with pytest.raises(ResolutionCapError):
        projective_resolution(m, length_cap=0)


def test_zero_module_has_the_empty_resolution(line):
    resolution = projective_resolution(zero_module(line))
    assert resolution.length == 0
    assert resolution.is_exact()


def test_resolutions_of_two_parameter_modules(rng):
    box = GridPoset.cube(0, 4, 2)
    parts = []
    for _ in range(3):
        lo = tuple(int(v) for v in rng.integers(1, 4, size=2))
        hi = tuple(int(rng.integers(v, 4)) for v in lo)
        points = [(a, b) for a in range(lo[0], hi[0] + 1) for b in range(lo[1], hi[1] + 1)]
        parts.append(interval_module(box, points, p=3))
    m = direct_sum(parts)
    m = conjugate(m, {x: random_invertible(rng, d, 3) for x, d in m.dims.items() if d})
    projective = projective_resolution(m)
    assert projective.length <= 3
    assert projective.is_exact()
    injective = injective_resolution(m)
    assert injective.length <= 3
    assert injective.is_exact()


def test_resolutions_on_preorders():
    fork = FinitePreorder.from_pairs("abc", [("a", "b"), ("a", "c")])
    resolution = projective_resolution(constant_module(fork))
    assert resolution.generators == (("a",),)
    assert resolution.is_exact()

    cycle = FinitePreorder.indiscrete(["x", "y"])
    resolution = projective_resolution(constant_module(cycle))
    assert resolution.generators == (("x",),)
    assert resolution.is_exact()

    split = direct_sum([interval_module(fork, ["b"]), interval_module(fork, ["c"])])
    resolution = injective_resolution(split)
    assert resolution.is_exact()
    assert sorted(resolution.generators[0]) == ["b", "c"]


def test_free_module_stalks():
    line = GridPoset.line(0, 3)
    free = free_module(line, [(1,), (2,)], 2)
    assert [free.dims[x] for x in line.points()] == [0, 1, 2, 2]
    assert free.validate()
