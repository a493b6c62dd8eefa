"""JSON schemas for barcodes, modules, simplicial complexes and vertex functions.

Rationals are written as strings ("3", "-1/2") and infinities as "inf" /
"-inf" so that files round-trip exactly. Plain JSON numbers are accepted on
input.
"""

from pathlib import Path
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field, RootModel, field_validator

from src.algebra.exactalg import ExactMatrix, default_prime
from src.models.interval import Barcode, Endpoint, GradedBarcode, Interval, format_value, to_value
from src.models.pmodule import PersistenceModule
from src.models.poset import GridPoset

Number = Union[int, float, str]


def _check_number(value: Number) -> Number:
    try:
        to_value(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational or infinity: {value!r}") from exc
    return value


# ----------------------------------------------------------------------
# Barcodes
# ----------------------------------------------------------------------

class BarSchema(BaseModel):
    left: Number
    right: Number
    left_closed: bool = True
    right_closed: bool = False
    mult: int = Field(default=1, ge=1)

    @field_validator("left", "right")
    @classmethod
    def _numbers(cls, value: Number) -> Number:
        return _check_number(value)

    def to_interval(self) -> Interval:
        left, right = to_value(self.left), to_value(self.right)
        # infinite ends are always open
        return Interval(
            Endpoint(left, self.left_closed and left != -float("inf")),
            Endpoint(right, self.right_closed and right != float("inf")),
        )

    @classmethod
    def from_interval(cls, bar: Interval, mult: int = 1) -> "BarSchema":
        return cls(
            left=format_value(bar.left.value),
            right=format_value(bar.right.value),
            left_closed=bar.left.closed,
            right_closed=bar.right.closed,
            mult=mult,
        )


class BarcodeSchema(BaseModel):
    bars: List[BarSchema] = Field(default_factory=list)

    def to_barcode(self) -> Barcode:
        counts: Dict[Interval, int] = {}
        for bar in self.bars:
            interval = bar.to_interval()
            counts[interval] = counts.get(interval, 0) + bar.mult
        return Barcode(counts)

    @classmethod
    def from_barcode(cls, barcode: Barcode) -> "BarcodeSchema":
        return cls(bars=[BarSchema.from_interval(bar, mult) for bar, mult in barcode.items()])


class DegreeBarsSchema(BarcodeSchema):
    degree: int


class GradedBarcodeSchema(BaseModel):
    graded: List[DegreeBarsSchema] = Field(default_factory=list)

    def to_graded(self) -> GradedBarcode:
        degrees: Dict[int, Barcode] = {}
        for entry in self.graded:
            degrees[entry.degree] = degrees.get(entry.degree, Barcode()) + entry.to_barcode()
        return GradedBarcode(degrees)

    @classmethod
    def from_graded(cls, graded: GradedBarcode) -> "GradedBarcodeSchema":
        return cls(graded=[
            DegreeBarsSchema(degree=d, bars=BarcodeSchema.from_barcode(b).bars) for d, b in graded.items()
        ])


# ----------------------------------------------------------------------
# Grid modules
# ----------------------------------------------------------------------

class BoxSchema(BaseModel):
    lo: List[int]
    hi: List[int]

    def to_box(self) -> GridPoset:
        return GridPoset(tuple(self.lo), tuple(self.hi))


class StalkSchema(BaseModel):
    point: List[int]
    dim: int = Field(ge=0)


class EdgeMapSchema(BaseModel):
    source: List[int]
    target: List[int]
    matrix: List[List[int]]


class ModuleSchema(BaseModel):
    """A module on a grid box; edges not listed carry zero maps."""
    box: BoxSchema
    p: Optional[int] = None
    stalks: List[StalkSchema] = Field(default_factory=list)
    maps: List[EdgeMapSchema] = Field(default_factory=list)
    stabilized_left: List[bool] = Field(default_factory=list)
    stabilized_right: List[bool] = Field(default_factory=list)

    def to_module(self, p: Optional[int] = None) -> PersistenceModule:
        box = self.box.to_box()
        p = p if p is not None else (self.p if self.p is not None else default_prime())
        dims = {tuple(s.point): s.dim for s in self.stalks if s.dim}
        maps = {}
        for entry in self.maps:
            u, w = tuple(entry.source), tuple(entry.target)
            matrix = ExactMatrix.from_rows(entry.matrix, dims.get(u, 0), p)
            if matrix.shape != (dims.get(w, 0), dims.get(u, 0)):
                raise ValueError(f"map {u} -> {w} has shape {matrix.shape}")
            maps[(u, w)] = matrix
        return PersistenceModule(box, dims, maps, tuple(self.stabilized_left), tuple(self.stabilized_right), p)

    @classmethod
    def from_module(cls, m: PersistenceModule) -> "ModuleSchema":
        if not m.is_grid:
            raise ValueError("only grid modules have a JSON form")
        box: GridPoset = m.base
        return cls(
            box=BoxSchema(lo=list(box.lo), hi=list(box.hi)),
            p=m.p,
            stalks=[StalkSchema(point=list(x), dim=d) for x, d in m.dims.items() if d],
            maps=[
                EdgeMapSchema(source=list(u), target=list(w), matrix=a.to_lists())
                for (u, w), a in m.maps.items() if a.rows and a.cols
            ],
            stabilized_left=list(m.stabilized_left),
            stabilized_right=list(m.stabilized_right),
        )


# ----------------------------------------------------------------------
# Simplicial complexes and vertex functions
# ----------------------------------------------------------------------

class ComplexSchema(BaseModel):
    simplices: List[List[int]]

    @field_validator("simplices")
    @classmethod
    def _nonempty(cls, value: List[List[int]]) -> List[List[int]]:
        if any(not s for s in value):
            raise ValueError("empty simplex")
        return value


class VertexFunctionSchema(RootModel[Dict[str, Number]]):

    @field_validator("root")
    @classmethod
    def _values(cls, value: Dict[str, Number]) -> Dict[str, Number]:
        for key, v in value.items():
            int(key)
            _check_number(v)
            if to_value(v) in (float("inf"), -float("inf")):
                raise ValueError(f"vertex {key} has an infinite value")
        return value

    def to_function(self) -> Dict[int, object]:
        return {int(k): to_value(v) for k, v in self.root.items()}


# ----------------------------------------------------------------------
# Files
# ----------------------------------------------------------------------

def load_barcode(path: Union[str, Path]) -> Barcode:
    return BarcodeSchema.model_validate_json(Path(path).read_text()).to_barcode()


def load_graded_barcode(path: Union[str, Path]) -> GradedBarcode:
    """A graded file, or a plain barcode read as degree 0."""
    text = Path(path).read_text()
    if '"graded"' in text:
        return GradedBarcodeSchema.model_validate_json(text).to_graded()
    return GradedBarcode({0: BarcodeSchema.model_validate_json(text).to_barcode()})


def load_module(path: Union[str, Path], p: Optional[int] = None) -> PersistenceModule:
    return ModuleSchema.model_validate_json(Path(path).read_text()).to_module(p)


def load_complex(path: Union[str, Path]) -> ComplexSchema:
    return ComplexSchema.model_validate_json(Path(path).read_text())


def load_vertex_function(path: Union[str, Path]) -> Dict[int, object]:
    return VertexFunctionSchema.model_validate_json(Path(path).read_text()).to_function()


def dump_graded_barcode(graded: GradedBarcode) -> dict:
    return GradedBarcodeSchema.from_graded(graded).model_dump()
