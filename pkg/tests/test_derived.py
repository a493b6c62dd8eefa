from fractions import Fraction

import pytest

from src.analysis.checks import closed_form_trial
from src.convolution.barcodes import graded_barcode_extract, realize_barcode
from src.convolution.derived import (
    GradedComplex,
    convolution_complex,
    derived_cosheaf_convolve,
    derived_direct_image,
    derived_sheaf_convolve,
    grid_convolve_barcodes,
    induced_subquotient_map,
    subquotient,
)
from src.convolution.resolution import ResolutionError, injective_resolution, projective_resolution
from src.models.interval import INF, Barcode, Endpoint, GradedBarcode, Interval, convolve_barcodes
from src.models.pmodule import ModuleError, NaturalTransformation, constant_module, principal_module
from src.models.poset import FinitePreorder, GridPoset, MonotoneMap

H = Interval.half_open
BOX = GridPoset.line(-1, 5)


@pytest.mark.parametrize("i, j, mode, expected", [
    (H(1, 3), H(0, 2), "sheaf", {0: [H(3, 5)], 1: [H(1, 3)]}),
    (H(0, 2), H(0, 3), "cosheaf", {0: [H(0, 2)], 1: [H(3, 5)]}),
    (H(0, 4), H(1, 2), "sheaf", {0: [H(5, 6)], 1: [H(1, 2)]}),
    (H(2, 3), H(2, 3), "cosheaf", {0: [H(4, 5)], 1: [H(5, 6)]}),
    (H(0, 2), H(0, INF), "sheaf", {1: [H(0, 2)]}),
    (H(0, INF), H(0, 2), "sheaf", {1: [H(0, 2)]}),
    (H(0, INF), H(1, INF), "sheaf", {1: [H(1, INF)]}),
])
def test_grid_matches_closed_form(i, j, mode, expected):
    want, got = closed_form_trial(i, j, mode, BOX)
    assert want == GradedBarcode({d: Barcode(bars) for d, bars in expected.items()})
    assert got == want


def test_cosheaf_complex_is_a_complex():
    m = realize_barcode(BOX, Barcode([H(0, 2)]))
    n = realize_barcode(BOX, Barcode([H(1, 4)]))
    complex_ = convolution_complex(m, n, "cosheaf")
    assert not complex_.cohomological
    assert complex_.degrees() == [0, 1]
    assert complex_.is_complex()
    assert complex_.homology().has_zero_differentials()


def test_resolving_either_argument_agrees():
    m = realize_barcode(BOX, Barcode([H(0, 3)]))
    n = realize_barcode(BOX, Barcode([H(1, 2)]))
    second = graded_barcode_extract(derived_sheaf_convolve(m, n))
    first = graded_barcode_extract(derived_sheaf_convolve(m, n, resolve="first"))
    assert first == second


def test_tensoring_with_the_unit_is_underived():
    m = realize_barcode(BOX, Barcode([H(1, 3)]))
    up = principal_module(BOX, (0,), "up")
    modules = derived_cosheaf_convolve(m, up)
    barcodes = graded_barcode_extract(modules)
    assert barcodes.degrees() == [0]
    assert barcodes[0] == Barcode([H(1, 3)])


def test_unresolved_side_falls_back_to_the_other():
    m = realize_barcode(BOX, Barcode([H(1, 3)]))
    below = realize_barcode(BOX, Barcode([H(-1, 2)]))
    with pytest.raises(ResolutionError):
        injective_resolution(below)
    second = graded_barcode_extract(derived_sheaf_convolve(below, m))
    first = graded_barcode_extract(derived_sheaf_convolve(m, below))
    assert first == second


def test_unresolvable_argument():
    below = realize_barcode(BOX, Barcode([H(-1, 2)]))
    with pytest.raises(ResolutionError):
        derived_sheaf_convolve(below, below)


def test_grid_convolution_of_open_bars():
    open_bar = Interval(Endpoint(Fraction(0), False), Endpoint(Fraction(2), False))
    got = grid_convolve_barcodes(Barcode([open_bar]), Barcode([H(0, 2)]), "sheaf", derived=True)
    assert got == convolve_barcodes(Barcode([H(1, 2)]), Barcode([H(0, 2)]), "sheaf", derived=True)
    assert grid_convolve_barcodes(Barcode([open_bar]), Barcode([H(0, 2)]), "sheaf") == GradedBarcode({0: got[0]})


def test_subquotient_of_an_exact_sequence():
    resolution = projective_resolution(realize_barcode(BOX, Barcode([H(1, 3)])))
    d = resolution.differentials[0]
    homology = subquotient(resolution.terms[0], d, resolution.augmentation)
    assert homology.module.is_zero()
    top = subquotient(resolution.terms[0], d, None)
    assert [top.module.dims[x] for x in BOX.points()] == [0, 0, 1, 1, 0, 0, 0]


def test_induced_map_of_identity():
    m = realize_barcode(BOX, Barcode([H(0, 2)]))
    sub = subquotient(m, None, None)
    induced = induced_subquotient_map(NaturalTransformation.identity(m), sub, sub)
    assert induced.is_natural()
    assert all(c.rows == c.cols for c in induced.components.values())


def test_complex_rejects_mismatched_differentials():
    a = realize_barcode(BOX, Barcode([H(0, 2)]))
    b = realize_barcode(BOX, Barcode([H(0, 2)]))
    with pytest.raises(ModuleError):
        GradedComplex({0: a, 1: b}, {0: NaturalTransformation.identity(a)})
    with pytest.raises(ModuleError):
        GradedComplex({})


def test_derived_direct_image_of_a_constant_sheaf():
    chain = FinitePreorder.chain(3)
    box = GridPoset.line(0, 2)
    f = MonotoneMap(chain, box, {i: (i,) for i in range(3)})
    image = derived_direct_image(f, injective_resolution(constant_module(chain)), "sheaf")
    homology = image.homology()
    assert sorted(homology) == [0]
    assert [homology[0].dims[x] for x in box.points()] == [1, 1, 1]


def test_derived_direct_image_of_a_constant_cosheaf():
    chain = FinitePreorder.chain(3)
    box = GridPoset.line(0, 2)
    f = MonotoneMap(chain, box, {0: (0,), 1: (0,), 2: (2,)})
    image = derived_direct_image(f, projective_resolution(constant_module(chain)), "cosheaf")
    homology = image.homology()
    assert [homology[0].dims[x] for x in box.points()] == [1, 1, 1]
    assert all(m.is_zero() for d, m in homology.items() if d > 0)
