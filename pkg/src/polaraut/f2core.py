"""Bit-packed linear algebra over GF(2).

Vectors and matrix rows are Python integers used as bitsets: bit ``i`` of a
vector is coordinate ``i`` and bit ``j`` of a row is column ``j``.  Every
operation returns new values and leaves its inputs untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError

__all__ = [
    "BitVector",
    "BitMatrix",
    "rank",
    "in_row_space",
    "is_invertible",
    "mat_apply",
    "mat_mul",
    "mat_inverse",
    "random_matrix",
    "random_invertible",
    "int_rank",
    "int_to_array",
    "array_to_int",
]


def int_to_array(bits: int, length: int) -> np.ndarray:
    """Unpack an integer bitset into a uint8 array (bit i -> entry i)."""
    nbytes = (length + 7) // 8
    raw = np.frombuffer(bits.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:length].copy()


def array_to_int(arr) -> int:
    arr = np.asarray(arr, dtype=np.uint8) & 1
    return int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")


@dataclass(frozen=True)
class BitVector:
    len: int
    bits: int = 0

    def __post_init__(self):
        if self.len < 0:
            raise DimensionError("negative length")
        if self.bits < 0 or self.bits >> self.len:
            raise DimensionError(f"bits exceed length {self.len}")

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(n, 0)

    @classmethod
    def from_list(cls, values: Sequence[int]) -> "BitVector":
        return cls(len(values), array_to_int(values) if len(values) else 0)

    @classmethod
    def from_str(cls, text: str) -> "BitVector":
        """Parse ``"110"`` with the first character as coordinate 0."""
        return cls.from_list([int(ch) for ch in text])

    @classmethod
    def from_array(cls, arr) -> "BitVector":
        arr = np.asarray(arr)
        return cls(arr.size, array_to_int(arr))

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.len:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __iter__(self):
        return (self[i] for i in range(self.len))

    def __xor__(self, other: "BitVector") -> "BitVector":
        if other.len != self.len:
            raise DimensionError("length mismatch")
        return BitVector(self.len, self.bits ^ other.bits)

    def weight(self) -> int:
        return self.bits.bit_count()

    def to_list(self) -> list[int]:
        return list(self)

    def to_array(self) -> np.ndarray:
        return int_to_array(self.bits, self.len)

    def __str__(self) -> str:
        return "".join(str(b) for b in self)


@dataclass(frozen=True)
class BitMatrix:
    cols: int
    rows: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        for r in self.rows:
            if r < 0 or r >> self.cols:
                raise DimensionError(f"row {r:b} exceeds {self.cols} columns")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), self.cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, tuple(1 << i for i in range(n)))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "BitMatrix":
        return cls(ncols, (0,) * nrows)

    @classmethod
    def from_lists(cls, rows: Sequence[Sequence[int]]) -> "BitMatrix":
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise DimensionError("ragged rows")
        return cls(ncols, tuple(array_to_int(r) for r in rows))

    @classmethod
    def from_strs(cls, rows: Iterable[str]) -> "BitMatrix":
        return cls.from_lists([[int(ch) for ch in r] for r in rows])

    def entry(self, i: int, j: int) -> int:
        return (self.rows[i] >> j) & 1

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.rows[i])

    def append_row(self, v: BitVector) -> "BitMatrix":
        if v.len != self.cols:
            raise DimensionError("row length mismatch")
        return BitMatrix(self.cols, self.rows + (v.bits,))

    def transpose(self) -> "BitMatrix":
        out = [0] * self.cols
        for i, r in enumerate(self.rows):
            while r:
                low = r & -r
                out[low.bit_length() - 1] |= 1 << i
                r ^= low
        return BitMatrix(len(self.rows), tuple(out))

    def to_array(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, self.cols), dtype=np.uint8)
        return np.stack([int_to_array(r, self.cols) for r in self.rows])

    def to_lists(self) -> list[list[int]]:
        return self.to_array().tolist()


def int_rank(rows: Iterable[int]) -> int:
    """Rank of integer bitsets, eliminating on leading bits."""
    pivots: dict[int, int] = {}
    for r in rows:
        while r:
            lead = r.bit_length() - 1
            p = pivots.get(lead)
            if p is None:
                pivots[lead] = r
                break
            r ^= p
    return len(pivots)


def rank(mat: BitMatrix) -> int:
    return int_rank(mat.rows)


def in_row_space(v: BitVector, mat: BitMatrix) -> bool:
    if v.len != mat.cols:
        raise DimensionError(f"vector length {v.len} != {mat.cols} columns")
    if v.bits == 0:
        return True
    return int_rank(mat.rows + (v.bits,)) == int_rank(mat.rows)


def _require_square(mat: BitMatrix) -> None:
    if mat.nrows != mat.cols:
        raise DimensionError(f"matrix is {mat.nrows}x{mat.cols}, not square")


def is_invertible(mat: BitMatrix) -> bool:
    _require_square(mat)
    return rank(mat) == mat.cols


def mat_apply(mat: BitMatrix, v: BitVector) -> BitVector:
    if mat.cols != v.len:
        raise DimensionError(f"{mat.cols} columns vs vector length {v.len}")
    out = 0
    for i, r in enumerate(mat.rows):
        out |= ((r & v.bits).bit_count() & 1) << i
    return BitVector(mat.nrows, out)


def mat_mul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    if a.cols != b.nrows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    out = []
    for r in a.rows:
        acc = 0
        while r:
            low = r & -r
            acc ^= b.rows[low.bit_length() - 1]
            r ^= low
        out.append(acc)
    return BitMatrix(b.cols, tuple(out))


def mat_inverse(mat: BitMatrix) -> BitMatrix:
    """Gauss-Jordan inverse; raises ``ValueError`` on a singular input."""
    _require_square(mat)
    n = mat.cols
    work = [(r, 1 << i) for i, r in enumerate(mat.rows)]
    for col in range(n):
        piv = next((i for i in range(col, n) if (work[i][0] >> col) & 1), None)
        if piv is None:
            raise ValueError("matrix is singular")
        work[col], work[piv] = work[piv], work[col]
        pr, pi = work[col]
        for i in range(n):
            if i != col and (work[i][0] >> col) & 1:
                work[i] = (work[i][0] ^ pr, work[i][1] ^ pi)
    return BitMatrix(n, tuple(inv for _, inv in work))


def random_matrix(nrows: int, ncols: int, rng: np.random.Generator) -> BitMatrix:
    bits = rng.integers(0, 2, size=(nrows, ncols), dtype=np.uint8)
    return BitMatrix(ncols, tuple(array_to_int(r) for r in bits))


def random_invertible(n: int, rng: np.random.Generator) -> BitMatrix:
    """Uniform element of GL(n, F2) by rejection.

    The invertible fraction is above 0.288 for every n, so fewer than four
    draws are needed on average.
    """
    while True:
        cand = random_matrix(n, n, rng)
        if rank(cand) == n:
            return cand
