from fractions import Fraction

import pytest

from src.models.interval import (
    INF,
    Barcode,
    GradedBarcode,
    Interval,
    UnsupportedIntervalError,
    convolve_barcodes,
    convolve_intervals,
    cosheaf_convolve_derived,
    cosheaf_convolve_intervals,
    format_value,
    sheaf_convolve_derived,
    sheaf_convolve_intervals,
    sheaf_convolve_underived,
    to_value,
    translate,
)

H = Interval.half_open


def graded(**degrees):
    return GradedBarcode({int(k[1:]): Barcode(v) for k, v in degrees.items()})


def test_values_and_formatting():
    assert to_value("1/2") == Fraction(1, 2)
    assert to_value("-inf") == -INF
    assert to_value(0.25) == Fraction(1, 4)
    assert format_value(Fraction(3)) == "3"
    assert format_value(Fraction(-1, 2)) == "-1/2"
    assert format_value(INF) == "inf"
    assert str(H(0, 2)) == "[0, 2)"
    assert str(H("-inf", 1)) == "(-inf, 1)"


def test_empty_intervals_are_rejected():
    with pytest.raises(ValueError):
        H(2, 2)
    with pytest.raises(ValueError):
        H(3, 1)


def test_sheaf_convolution_of_finite_bars():
    result = sheaf_convolve_intervals(H(1, 3), H(0, 2), derived=True)
    assert result == graded(d0=[H(3, 5)], d1=[H(1, 3)])
    assert sheaf_convolve_intervals(H(1, 3), H(0, 2)) == graded(d0=[H(3, 5)])
    assert sheaf_convolve_underived(H(1, 3), H(0, 2)) == Barcode([H(3, 5)])
    assert sheaf_convolve_derived(H(1, 3), H(0, 2)) == result


def test_cosheaf_convolution_of_finite_bars():
    result = cosheaf_convolve_intervals(H(0, 2), H(0, 3), derived=True)
    assert result == graded(d0=[H(0, 2)], d1=[H(3, 5)])
    assert cosheaf_convolve_derived(H(0, 2), H(0, 3)) == result


def test_sheaf_convolution_with_infinite_bars():
    assert sheaf_convolve_intervals(H(0, INF), H(0, 2), derived=True) == graded(d1=[H(0, 2)])
    assert sheaf_convolve_intervals(H(0, 2), H(-INF, 1), derived=True) == graded(d0=[H(1, 3)])


def test_cosheaf_unit_is_the_up_ray():
    for bar in [H(0, 2), H(-1, 5), H(Fraction(1, 2), 3)]:
        assert cosheaf_convolve_intervals(bar, H(0, INF), derived=True) == graded(d0=[bar])


def test_sheaf_unit_is_the_down_ray():
    for bar in [H(0, 2), H(-1, 5)]:
        assert sheaf_convolve_intervals(bar, H(-INF, 0), derived=True) == graded(d0=[bar])


def test_convolution_is_symmetric():
    bars = [H(0, 2), H(1, 4), H(-INF, 1), H(2, INF), H(-1, 0)]
    for i in bars:
        for j in bars:
            for mode in ("sheaf", "cosheaf"):
                assert convolve_intervals(i, j, mode, True) == convolve_intervals(j, i, mode, True)


def test_translation_commutes_with_convolution():
    i, j = H(0, 3), H(1, 2)
    for mode in ("sheaf", "cosheaf"):
        assert convolve_intervals(i.translate(2), j, mode, True) == convolve_intervals(i, j, mode, True).translate(2)


def test_barcode_convolution_is_bilinear():
    x = Barcode({H(0, 2): 2, H(1, 3): 1})
    y = Barcode([H(0, 1)])
    result = convolve_barcodes(x, y, "cosheaf", derived=True)
    assert result[0] == Barcode({H(0, 1): 2, H(1, 2): 1})
    assert result[1] == Barcode({H(2, 3): 2, H(3, 4): 1})
    assert convolve_barcodes(Barcode(), y, "sheaf").degrees() == []


def test_closed_bars_have_no_closed_form():
    with pytest.raises(UnsupportedIntervalError):
        sheaf_convolve_intervals(Interval.closed(0, 1), H(0, 1))


def test_unknown_mode():
    with pytest.raises(ValueError):
        convolve_intervals(H(0, 1), H(0, 1), "tensor")


def test_barcode_multiset_operations():
    x = Barcode([H(0, 1), H(0, 1), H(2, 3)])
    assert len(x) == 3
    assert x.multiplicity(H(0, 1)) == 2
    assert translate(x, 1) == Barcode({H(1, 2): 2, H(3, 4): 1})
    assert x + Barcode([H(2, 3)]) == Barcode({H(0, 1): 2, H(2, 3): 2})
    assert H(0, INF).translate(5) == H(5, INF)
    with pytest.raises(ValueError):
        Barcode({H(0, 1): -1})
