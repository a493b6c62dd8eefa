"""Exact linear algebra over a prime field F_p.

Matrices are dense ``numpy`` int64 arrays holding residues in [0, p). All
reductions are Gauss-Jordan eliminations with modular inverses, so ranks,
kernels and solutions are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from src.config import config


class DimensionMismatchError(ValueError):
    """Raised when matrix shapes are incompatible."""
    pass


def default_prime() -> int:
    return config.field.prime


@dataclass(frozen=True)
class FieldElement:
    """Element of F_p."""
    value: int
    p: int

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"invalid characteristic {self.p}")
        object.__setattr__(self, "value", int(self.value) % self.p)

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise DimensionMismatchError(f"mixing F_{self.p} and F_{other.p}")
            return other
        return FieldElement(int(other), self.p)

    def __add__(self, other) -> "FieldElement":
        return FieldElement(self.value + self._coerce(other).value, self.p)

    __radd__ = __add__

    def __sub__(self, other) -> "FieldElement":
        return FieldElement(self.value - self._coerce(other).value, self.p)

    def __rsub__(self, other) -> "FieldElement":
        return FieldElement(self._coerce(other).value - self.value, self.p)

    def __mul__(self, other) -> "FieldElement":
        return FieldElement(self.value * self._coerce(other).value, self.p)

    __rmul__ = __mul__

    def __neg__(self) -> "FieldElement":
        return FieldElement(-self.value, self.p)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse in F_p")
        return FieldElement(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other) -> "FieldElement":
        return self * self._coerce(other).inverse()

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0


class ExactMatrix:
    """Immutable matrix over F_p.

    Zero-row and zero-column shapes are allowed; they model maps to and from
    the zero space.
    """

    __slots__ = ("_data", "p")

    def __init__(self, data, p: Optional[int] = None, shape: Optional[Tuple[int, int]] = None):
        self.p = default_prime() if p is None else int(p)
        array = np.array(data, dtype=np.int64)
        if shape is not None:
            array = array.reshape(shape)
        if array.ndim != 2:
            raise DimensionMismatchError(f"expected a 2-d array, got shape {array.shape}")
        array = np.mod(array, self.p)
        array.setflags(write=False)
        self._data = array

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int, p: Optional[int] = None) -> "ExactMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), p)

    @classmethod
    def identity(cls, n: int, p: Optional[int] = None) -> "ExactMatrix":
        return cls(np.eye(n, dtype=np.int64), p)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int, p: Optional[int] = None) -> "ExactMatrix":
        if not rows:
            return cls.zeros(0, cols, p)
        return cls(rows, p)

    @staticmethod
    def hstack(blocks: Sequence["ExactMatrix"], rows: Optional[int] = None, p: Optional[int] = None) -> "ExactMatrix":
        if not blocks:
            return ExactMatrix.zeros(rows or 0, 0, p)
        _same_field(blocks)
        heights = {b.rows for b in blocks}
        if len(heights) != 1:
            raise DimensionMismatchError(f"hstack of blocks with heights {sorted(heights)}")
        return ExactMatrix(np.hstack([b._data for b in blocks]), blocks[0].p)

    @staticmethod
    def vstack(blocks: Sequence["ExactMatrix"], cols: Optional[int] = None, p: Optional[int] = None) -> "ExactMatrix":
        if not blocks:
            return ExactMatrix.zeros(0, cols or 0, p)
        _same_field(blocks)
        widths = {b.cols for b in blocks}
        if len(widths) != 1:
            raise DimensionMismatchError(f"vstack of blocks with widths {sorted(widths)}")
        return ExactMatrix(np.vstack([b._data for b in blocks]), blocks[0].p)

    @staticmethod
    def block_diagonal(blocks: Sequence["ExactMatrix"], p: Optional[int] = None) -> "ExactMatrix":
        p = blocks[0].p if blocks else (default_prime() if p is None else p)
        rows = sum(b.rows for b in blocks)
        cols = sum(b.cols for b in blocks)
        out = np.zeros((rows, cols), dtype=np.int64)
        r = c = 0
        for b in blocks:
            out[r:r + b.rows, c:c + b.cols] = b._data
            r += b.rows
            c += b.cols
        return ExactMatrix(out, p)

    # ------------------------------------------------------------------
    # Shape and access
    # ------------------------------------------------------------------

    @property
    def array(self) -> NDArray[np.int64]:
        """Read-only view of the residues."""
        return self._data

    @property
    def shape(self) -> Tuple[int, int]:
        return self._data.shape

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix(self._data.T, self.p)

    def entry(self, i: int, j: int) -> FieldElement:
        return FieldElement(int(self._data[i, j]), self.p)

    def is_zero(self) -> bool:
        return not self._data.any()

    def take_rows(self, indices: Sequence[int]) -> "ExactMatrix":
        return ExactMatrix(self._data[list(indices), :].reshape(len(indices), self.cols), self.p)

    def take_columns(self, indices: Sequence[int]) -> "ExactMatrix":
        return ExactMatrix(self._data[:, list(indices)].reshape(self.rows, len(indices)), self.p)

    def to_lists(self) -> List[List[int]]:
        return self._data.tolist()

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def _check(self, other: "ExactMatrix"):
        if other.p != self.p:
            raise DimensionMismatchError(f"mixing F_{self.p} and F_{other.p}")

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check(other)
        if self.cols != other.rows:
            raise DimensionMismatchError(f"cannot multiply {self.shape} by {other.shape}")
        return ExactMatrix(self._data @ other._data, self.p)

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatchError(f"cannot add {self.shape} and {other.shape}")
        return ExactMatrix(self._data + other._data, self.p)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatchError(f"cannot subtract {other.shape} from {self.shape}")
        return ExactMatrix(self._data - other._data, self.p)

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix(-self._data, self.p)

    def scale(self, c: Union[int, FieldElement]) -> "ExactMatrix":
        return ExactMatrix(self._data * (int(c) % self.p), self.p)

    def kron(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check(other)
        return ExactMatrix(np.kron(self._data, other._data).reshape(self.rows * other.rows, self.cols * other.cols), self.p)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.p == other.p and self.shape == other.shape and bool(np.array_equal(self._data, other._data))

    __hash__ = None

    def __repr__(self) -> str:
        return f"ExactMatrix(p={self.p}, shape={self.shape}, data={self._data.tolist()})"


def _same_field(blocks: Iterable[ExactMatrix]):
    primes = {b.p for b in blocks}
    if len(primes) > 1:
        raise DimensionMismatchError(f"blocks over different fields {sorted(primes)}")


def _row_reduce(array: NDArray[np.int64], p: int) -> Tuple[NDArray[np.int64], List[int]]:
    """Reduced row echelon form mod p and the pivot columns."""
    mat = np.mod(np.array(array, dtype=np.int64), p)
    rows, cols = mat.shape
    pivots: List[int] = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        candidates = np.nonzero(mat[row:, col])[0]
        if candidates.size == 0:
            continue
        pivot_row = row + int(candidates[0])
        if pivot_row != row:
            mat[[row, pivot_row]] = mat[[pivot_row, row]]
        inv = pow(int(mat[row, col]), -1, p)
        mat[row] = (mat[row] * inv) % p
        # only rows with a nonzero entry in the pivot column change
        others = np.nonzero(mat[:, col])[0]
        others = others[others != row]
        if others.size:
            mat[others] = (mat[others] - np.outer(mat[others, col], mat[row])) % p
        pivots.append(col)
        row += 1
    return mat, pivots


def rank(m: ExactMatrix) -> int:
    """Rank over F_p."""
    if m.rows == 0 or m.cols == 0:
        return 0
    return len(_row_reduce(m.array, m.p)[1])


def kernel_basis(m: ExactMatrix) -> ExactMatrix:
    """Columns spanning the null space of ``m`` (cols(m) x nullity)."""
    n = m.cols
    if m.rows == 0:
        return ExactMatrix.identity(n, m.p)
    rref, pivots = _row_reduce(m.array, m.p)
    pivot_set = set(pivots)
    free = [c for c in range(n) if c not in pivot_set]
    basis = np.zeros((n, len(free)), dtype=np.int64)
    for k, f in enumerate(free):
        basis[f, k] = 1
        for i, pc in enumerate(pivots):
            basis[pc, k] = -rref[i, f]
    return ExactMatrix(basis, m.p)


def cokernel_projection(m: ExactMatrix) -> ExactMatrix:
    """Surjection from the codomain of ``m`` onto coker(m).

    The result has rows(m) - rank(m) rows and kills exactly the image of ``m``.
    """
    return kernel_basis(m.T).T


def image_basis(m: ExactMatrix) -> ExactMatrix:
    """Linearly independent columns of ``m`` spanning its image."""
    if m.rows == 0 or m.cols == 0:
        return ExactMatrix.zeros(m.rows, 0, m.p)
    _, pivots = _row_reduce(m.array, m.p)
    return m.take_columns(pivots)


def solve_columns(m: ExactMatrix, b: ExactMatrix) -> Optional[ExactMatrix]:
    """Solve ``m @ X = b`` for all columns of ``b`` at once.

    Returns:
        One particular solution, or None if some column is inconsistent

    Raises:
        DimensionMismatchError: If ``b`` does not have rows(m) rows
    """
    if b.rows != m.rows:
        raise DimensionMismatchError(f"right-hand side has {b.rows} rows, matrix has {m.rows}")
    m._check(b)
    n = m.cols
    if m.rows == 0:
        return ExactMatrix.zeros(n, b.cols, m.p)
    augmented = np.hstack([m.array, b.array])
    rref, pivots = _row_reduce(augmented, m.p)
    if pivots and pivots[-1] >= n:
        return None
    solution = np.zeros((n, b.cols), dtype=np.int64)
    for i, pc in enumerate(pivots):
        solution[pc, :] = rref[i, n:]
    return ExactMatrix(solution, m.p)


def solve(m: ExactMatrix, b: Sequence[int]) -> Optional[Tuple[int, ...]]:
    """Solve ``m x = b``.

    Args:
        m: Coefficient matrix
        b: Right-hand side of length rows(m)

    Returns:
        A solution vector, or None if the system is inconsistent

    Raises:
        DimensionMismatchError: If ``len(b) != rows(m)``
    """
    if len(b) != m.rows:
        raise DimensionMismatchError(f"vector of length {len(b)} for a matrix with {m.rows} rows")
    x = solve_columns(m, ExactMatrix(np.array(list(b), dtype=np.int64).reshape(m.rows, 1), m.p))
    if x is None:
        return None
    return tuple(int(v) for v in x.array[:, 0])


def is_invertible(m: ExactMatrix) -> bool:
    return m.rows == m.cols and rank(m) == m.rows


def inverse(m: ExactMatrix) -> ExactMatrix:
    if not is_invertible(m):
        raise DimensionMismatchError(f"matrix of shape {m.shape} is not invertible")
    return solve_columns(m, ExactMatrix.identity(m.rows, m.p))
