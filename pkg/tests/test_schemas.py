import json
from fractions import Fraction

import pytest
from pydantic import ValidationError

from src.algebra.exactalg import ExactMatrix
from src.models.interval import INF, Barcode, GradedBarcode, Interval
from src.models.pmodule import PersistenceModule
from src.models.poset import GridPoset
from src.utils.schemas import (
    BarSchema,
    BarcodeSchema,
    ModuleSchema,
    VertexFunctionSchema,
    dump_graded_barcode,
    load_barcode,
    load_complex,
    load_graded_barcode,
    load_module,
    load_vertex_function,
)

H = Interval.half_open


def write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


def test_bars_accept_strings_and_numbers():
    assert BarSchema(left="1/2", right=3).to_interval() == H(Fraction(1, 2), 3)
    assert BarSchema(left=0, right="inf", right_closed=True).to_interval() == H(0, INF)
    assert BarSchema(left=0, right=1, left_closed=True, right_closed=True).to_interval() == Interval.closed(0, 1)
    with pytest.raises(ValidationError):
        BarSchema(left="one", right=2)
    with pytest.raises(ValidationError):
        BarSchema(left=0, right=1, mult=0)


def test_barcode_file(tmp_path):
    path = write(tmp_path, "x.json", {"bars": [{"left": 0, "right": 2, "mult": 2}, {"left": "1", "right": "inf"}]})
    assert load_barcode(path) == Barcode({H(0, 2): 2, H(1, INF): 1})


def test_graded_file_and_plain_fallback(tmp_path):
    graded = write(tmp_path, "g.json", {"graded": [{"degree": 1, "bars": [{"left": 5, "right": 6}]}]})
    assert load_graded_barcode(graded) == GradedBarcode({1: Barcode([H(5, 6)])})
    plain = write(tmp_path, "p.json", {"bars": [{"left": 0, "right": 1}]})
    assert load_graded_barcode(plain) == GradedBarcode({0: Barcode([H(0, 1)])})


def test_dump_graded_barcode():
    dumped = dump_graded_barcode(GradedBarcode({0: Barcode([H(0, 2)]), 1: Barcode([H(Fraction(1, 2), INF)])}))
    assert dumped == {"graded": [
        {"bars": [{"left": "0", "right": "2", "left_closed": True, "right_closed": False, "mult": 1}], "degree": 0},
        {"bars": [{"left": "1/2", "right": "inf", "left_closed": True, "right_closed": False, "mult": 1}], "degree": 1},
    ]}
    assert BarcodeSchema.from_barcode(Barcode()).bars == []


def test_module_file(tmp_path):
    path = write(tmp_path, "m.json", {
        "box": {"lo": [0], "hi": [3]},
        "stalks": [{"point": [1], "dim": 1}, {"point": [2], "dim": 1}],
        "maps": [{"source": [1], "target": [2], "matrix": [[1]]}],
    })
    m = load_module(path, 2)
    assert m.support() == [(1,), (2,)]
    assert m.transition((1,), (2,)) == ExactMatrix.identity(1, 2)
    schema = ModuleSchema.from_module(m)
    assert schema.to_module(2).dims == m.dims


def test_module_file_with_bad_shape(tmp_path):
    path = write(tmp_path, "m.json", {
        "box": {"lo": [0], "hi": [1]},
        "stalks": [{"point": [0], "dim": 1}, {"point": [1], "dim": 2}],
        "maps": [{"source": [0], "target": [1], "matrix": [[1]]}],
    })
    with pytest.raises(ValueError):
        load_module(path, 2)


def test_module_schema_keeps_flags():
    box = GridPoset.line(0, 2)
    m = PersistenceModule(box, {(2,): 1}, {}, (False,), (True,), 3)
    schema = ModuleSchema.from_module(m)
    assert schema.stabilized_right == [True]
    assert schema.p == 3
    assert schema.to_module().stabilized_right == (True,)


def test_complex_and_vertex_function_files(tmp_path):
    complex_path = write(tmp_path, "c.json", {"simplices": [[0, 1], [0], [1]]})
    assert load_complex(complex_path).simplices == [[0, 1], [0], [1]]
    f_path = write(tmp_path, "f.json", {"0": 0, "1": "1/2"})
    assert load_vertex_function(f_path) == {0: 0, 1: Fraction(1, 2)}
    with pytest.raises(ValidationError):
        VertexFunctionSchema.model_validate({"0": "inf"})
    bad = write(tmp_path, "bad.json", {"simplices": [[]]})
    with pytest.raises(ValidationError):
        load_complex(bad)
