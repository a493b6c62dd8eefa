from fractions import Fraction

import pytest

from src.algebra.exactalg import is_invertible
from src.analysis.checks import random_box_module, random_invertible
from src.convolution.barcodes import (
    SHEAF_GRID_OFFSET,
    barcode_extract,
    decomposition_basis,
    grid_to_closed_form,
    interval_basis,
    realize_barcode,
)
from src.models.interval import INF, Barcode, GradedBarcode, Interval
from src.models.pmodule import ModuleError, conjugate, constant_module
from src.models.poset import GridPoset

H = Interval.half_open


def test_realize_then_extract():
    line = GridPoset.line(-1, 6)
    barcode = Barcode({H(0, 2): 2, H(1, 4): 1, H(3, INF): 1})
    m = realize_barcode(line, barcode)
    assert m.stabilized_right == (True,)
    assert barcode_extract(m) == barcode


def test_left_infinite_bar():
    line = GridPoset.line(0, 5)
    barcode = Barcode([H(-INF, 2), H(1, 3)])
    assert barcode_extract(realize_barcode(line, barcode)) == barcode


def test_constant_module_is_one_infinite_bar():
    assert barcode_extract(constant_module(GridPoset.line(0, 3))) == Barcode([H(-INF, INF)])


def test_refined_grid():
    line = GridPoset.line(0, 8)
    barcode = Barcode([H(Fraction(1, 2), 2)])
    m = realize_barcode(line, barcode, scale=2)
    assert m.support() == [(1,), (2,), (3,)]
    assert barcode_extract(m, scale=2) == barcode


def test_bars_off_the_grid_or_box():
    line = GridPoset.line(0, 4)
    with pytest.raises(ModuleError):
        realize_barcode(line, Barcode([H(Fraction(1, 3), 1)]), scale=2)
    with pytest.raises(ModuleError):
        realize_barcode(line, Barcode([H(-1, 2)]))
    with pytest.raises(ModuleError):
        realize_barcode(line, Barcode([H(2, 9)]))


def test_extract_needs_one_parameter():
    with pytest.raises(ModuleError):
        barcode_extract(constant_module(GridPoset.cube(0, 1, 2)))


def test_sheaf_grid_offset():
    graded = GradedBarcode({0: Barcode([H(2, 4)])})
    assert grid_to_closed_form(graded, "sheaf")[0] == Barcode([H(2 + SHEAF_GRID_OFFSET, 4 + SHEAF_GRID_OFFSET)])
    assert grid_to_closed_form(graded, "cosheaf") == graded


def test_interval_basis_of_a_hidden_sum(rng):
    line = GridPoset.line(0, 6)
    m = random_box_module(rng, line, 4, 3)
    summands = interval_basis(m)
    assert Barcode([s.bar() for s in summands]) == barcode_extract(m)
    for (t,) in line.points():
        basis = decomposition_basis(m, summands, t)
        assert basis.shape == (m.dims[(t,)], m.dims[(t,)])
        assert is_invertible(basis)
    for s in summands:
        for t in range(s.first, s.last):
            assert m.maps[((t,), (t + 1,))] @ s.vectors[t] == s.vectors[t + 1]


def test_extract_agrees_with_the_interval_decomposition(rng):
    line = GridPoset.line(-1, 6)
    for _ in range(15):
        m = random_box_module(rng, line, int(rng.integers(1, 5)), 3)
        assert barcode_extract(m) == Barcode([s.bar() for s in interval_basis(m)])

    rays = realize_barcode(line, Barcode([H(-INF, 2), H(0, 3), H(1, INF), H(-INF, INF)]), p=3)
    hidden = conjugate(rays, {x: random_invertible(rng, d, 3) for x, d in rays.dims.items() if d})
    assert barcode_extract(hidden) == Barcode([s.bar() for s in interval_basis(hidden)])
    assert barcode_extract(hidden) == Barcode([H(-INF, 2), H(0, 3), H(1, INF), H(-INF, INF)])
