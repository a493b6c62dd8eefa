import pytest

from src.convolution.barcodes import barcode_extract, realize_barcode
from src.convolution.oracle import (
    ConvolutionOracle,
    ProductModule,
    SafeWindowError,
    cosheaf_convolve_oracle,
    external_tensor,
    safe_window,
    sheaf_convolve_oracle,
)
from src.analysis.checks import random_box_module
from src.models.interval import Barcode, Interval
from src.models.pmodule import NaturalTransformation, cosections, direct_sum, interval_module, principal_module, sections
from src.models.poset import GridPoset

H = Interval.half_open
BOX = GridPoset.line(-1, 5)


def bar_module(a, b):
    return realize_barcode(BOX, Barcode([H(a, b)]))


def test_external_tensor_dims():
    line = GridPoset.line(0, 1)
    product = ProductModule(interval_module(line, [(0,), (1,)]), interval_module(line, [(0,)]))
    m = product.to_module()
    assert m.base.same_as(GridPoset((0, 0), (1, 1)))
    assert {x: m.dims[x] for x in m.base.points()} == {(0, 0): 1, (0, 1): 0, (1, 0): 1, (1, 1): 0}
    assert m.validate()
    assert external_tensor(product.first, product.second).dim((1, 0)) == 1


def test_safe_window_is_the_sum_of_boxes():
    m, n = bar_module(0, 2), bar_module(1, 3)
    assert safe_window(m, n).same_as(GridPoset.line(-2, 10))
    with pytest.raises(SafeWindowError):
        cosheaf_convolve_oracle(m, n, GridPoset.line(-3, 4))
    with pytest.raises(SafeWindowError):
        sheaf_convolve_oracle(m, n, GridPoset.line(0, 11))


def test_cosheaf_unit():
    m = bar_module(1, 3)
    up = principal_module(BOX, (0,), "up")
    result = cosheaf_convolve_oracle(m, up, safe_window(m, up))
    assert barcode_extract(result) == Barcode([H(1, 3)])


def test_cosheaf_shift_by_up_set():
    m = bar_module(1, 3)
    up = principal_module(BOX, (2,), "up")
    assert barcode_extract(cosheaf_convolve_oracle(m, up, safe_window(m, up))) == Barcode([H(3, 5)])


def test_sheaf_unit():
    m = bar_module(1, 3)
    down = principal_module(BOX, (0,), "down")
    result = sheaf_convolve_oracle(m, down, safe_window(m, down))
    assert barcode_extract(result) == Barcode([H(1, 3)])


def test_cosheaf_unit_in_two_parameters(rng):
    box = GridPoset.cube(0, 2, 2)
    m = random_box_module(rng, box, 2, 2)
    result = cosheaf_convolve_oracle(m, principal_module(box, (0, 0), "up"), box)
    assert result.dims == m.dims
    assert result.validate()


def test_identity_induces_identity():
    m = bar_module(0, 3)
    up = principal_module(BOX, (1,), "up")
    oracle = ConvolutionOracle(m, up, safe_window(m, up), "cosheaf")
    induced = oracle.morphism_to(oracle, first_map=NaturalTransformation.identity(m))
    assert induced.is_natural()
    for x, c in induced.components.items():
        assert c == NaturalTransformation.identity(oracle.module()).components[x]


def test_unknown_mode():
    m = bar_module(0, 1)
    with pytest.raises(ValueError):
        ConvolutionOracle(m, m, safe_window(m, m), "tensor")


def test_result_flags_need_both_inputs():
    m = bar_module(1, 3)
    up = principal_module(BOX, (0,), "up")
    result = cosheaf_convolve_oracle(m, up, safe_window(m, up))
    assert result.stabilized_right == (False,)
    both = cosheaf_convolve_oracle(up, up, safe_window(up, up))
    assert both.stabilized_right == (True,)


@pytest.mark.parametrize("mode", ["sheaf", "cosheaf"])
def test_stalks_match_sections_over_the_whole_index_set(mode):
    line = GridPoset.line(0, 6)
    m = direct_sum([interval_module(line, [(1,), (2,), (3,)]), interval_module(line, [(2,), (3,)])])
    n = direct_sum([interval_module(line, [(2,), (3,), (4,)]), interval_module(line, [(5,)])])
    product = external_tensor(m, n).to_module()
    window = safe_window(m, n)
    oracle = ConvolutionOracle(m, n, window, mode)
    for (x,) in window.points():
        if mode == "sheaf":
            index_set = [pt for pt in product.base.points() if pt[0] + pt[1] >= x]
            want = sections(product, index_set)
        else:
            index_set = [pt for pt in product.base.points() if pt[0] + pt[1] <= x]
            want = cosections(product, index_set)
        assert oracle.cone((x,)).dimension == want, x
    assert oracle.module().validate()


@pytest.mark.parametrize("mode", ["sheaf", "cosheaf"])
def test_cut_off_inputs_read_as_zero_past_the_box(mode):
    small, large = GridPoset.line(0, 2), GridPoset.line(0, 4)
    window = GridPoset.line(0, 4)
    cut = ConvolutionOracle(
        interval_module(small, [(1,), (2,)]), interval_module(small, [(0,), (1,)]), window, mode,
    ).module()
    padded = ConvolutionOracle(
        interval_module(large, [(1,), (2,)]), interval_module(large, [(0,), (1,)]), window, mode,
    ).module()
    assert cut.dims == padded.dims
    assert barcode_extract(cut) == barcode_extract(padded)
