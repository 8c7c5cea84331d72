"""Monomials in m Boolean variables and the codes they generate.

Conventions used throughout the package:

* A monomial is an exponent bitmask ``v``: bit ``j`` set means ``x_j``
  divides it.
* Coordinate ``i`` of an evaluation vector is the point whose variable
  ``x_0`` is the most significant bit of ``i`` (``x_{m-1}`` is the least
  significant bit).  Splitting a word into halves therefore pairs
  coordinates across ``x_0``, which is what level 0 of SC decoding does.
* The monomial order treats a higher variable index as smaller, so
  ``x_{m-1}`` is the smallest variable.  The opposite reading is available
  with ``order="literal"``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import DimensionError, InvalidDirectionError
from .f2core import BitMatrix, BitVector, array_to_int, int_rank

__all__ = [
    "Monomial",
    "MonomialCode",
    "reverse_bits",
    "evaluate",
    "evaluate_mask",
    "directional_derivative",
    "partial_derivative_code",
    "derivative_dimension",
    "decompose",
    "precedes",
    "is_decreasing",
    "code_equals",
    "rate",
    "dimension",
    "generator_matrix",
    "all_monomials",
    "parse_monomial",
    "parse_code",
    "substitute_affine",
    "drop_variable",
    "ORDERS",
]

ORDERS = ("reversed", "literal")


def reverse_bits(x: int, m: int) -> int:
    """Reverse the low ``m`` bits of ``x``; maps variable masks to index masks."""
    out = 0
    for _ in range(m):
        out = (out << 1) | (x & 1)
        x >>= 1
    return out


@dataclass(frozen=True, order=True)
class Monomial:
    m: int
    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.m:
            raise DimensionError(f"mask {self.mask:b} uses more than {self.m} variables")

    @property
    def degree(self) -> int:
        return self.mask.bit_count()

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.m) if (self.mask >> j) & 1)

    @classmethod
    def from_variables(cls, m: int, variables: Iterable[int]) -> "Monomial":
        mask = 0
        for j in variables:
            if not 0 <= j < m:
                raise DimensionError(f"variable x{j} out of range for m={m}")
            mask |= 1 << j
        return cls(m, mask)

    def __str__(self) -> str:
        if not self.mask:
            return "1"
        return "*".join(f"x{j}" for j in self.variables)


_VAR_RE = re.compile(r"^x(\d+)$")


def parse_monomial(text: str, m: int) -> Monomial:
    """Parse ``"1"`` or ``"x0*x2"``."""
    text = text.strip()
    if text == "1":
        return Monomial(m, 0)
    variables = []
    for factor in text.split("*"):
        match = _VAR_RE.match(factor.strip())
        if not match:
            raise ValueError(f"bad monomial factor {factor!r} in {text!r}")
        variables.append(int(match.group(1)))
    if len(set(variables)) != len(variables):
        raise ValueError(f"repeated variable in {text!r}")
    return Monomial.from_variables(m, variables)


@dataclass(frozen=True)
class MonomialCode:
    """Monomial code of length 2^m given by its generating set (as masks)."""

    m: int
    gens: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "gens", frozenset(int(g) for g in self.gens))
        for g in self.gens:
            if g < 0 or g >> self.m:
                raise DimensionError(f"monomial mask {g:b} exceeds m={self.m}")

    @classmethod
    def from_masks(cls, m: int, masks: Iterable[int]) -> "MonomialCode":
        masks = list(masks)
        if len(set(masks)) != len(masks):
            raise ValueError("duplicate monomials in generating set")
        return cls(m, frozenset(masks))

    @classmethod
    def from_monomials(cls, monomials: Iterable[Monomial], m: int | None = None) -> "MonomialCode":
        monomials = list(monomials)
        if m is None:
            if not monomials:
                raise ValueError("m is required for an empty generating set")
            m = monomials[0].m
        if any(mon.m != m for mon in monomials):
            raise DimensionError("monomials disagree on m")
        return cls.from_masks(m, [mon.mask for mon in monomials])

    @property
    def length(self) -> int:
        return 1 << self.m

    @property
    def dimension(self) -> int:
        return len(self.gens)

    @property
    def rate(self) -> Fraction:
        return Fraction(len(self.gens), 1 << self.m)

    @property
    def monomials(self) -> list[Monomial]:
        return [Monomial(self.m, g) for g in self.sorted_masks()]

    def sorted_masks(self) -> list[int]:
        return sorted(self.gens, key=lambda g: (g.bit_count(), [j for j in range(self.m) if (g >> j) & 1]))

    def __contains__(self, mon) -> bool:
        mask = mon.mask if isinstance(mon, Monomial) else mon
        return mask in self.gens

    def __str__(self) -> str:
        if not self.gens:
            return "{}"
        return "{" + ", ".join(str(mon) for mon in self.monomials) + "}"

    def to_json(self) -> dict:
        return {"m": self.m, "monomials": sorted(self.gens)}

    @classmethod
    def from_json(cls, data: dict) -> "MonomialCode":
        return cls.from_masks(int(data["m"]), [int(v) for v in data["monomials"]])


def parse_code(text: str, m: int) -> MonomialCode:
    """Parse a comma-separated list such as ``"1,x0,x1,x0*x2"``."""
    parts = [p for p in text.split(",") if p.strip()]
    return MonomialCode.from_monomials([parse_monomial(p, m) for p in parts], m)


def code_equals(a: MonomialCode, b: MonomialCode) -> bool:
    return a.m == b.m and a.gens == b.gens


def rate(code: MonomialCode) -> Fraction:
    return code.rate


def dimension(code: MonomialCode) -> int:
    return code.dimension


def all_monomials(m: int) -> list[Monomial]:
    return [Monomial(m, v) for v in range(1 << m)]


def _index_array(m: int) -> np.ndarray:
    return np.arange(1 << m, dtype=np.int64)


def evaluate_mask(mask: int, m: int) -> np.ndarray:
    """Evaluation vector of ``x^mask`` as a uint8 array of length 2^m."""
    rmask = reverse_bits(mask, m)
    idx = _index_array(m)
    return ((idx & rmask) == rmask).astype(np.uint8)


def evaluate(mon: Monomial) -> BitVector:
    return BitVector.from_array(evaluate_mask(mon.mask, mon.m))


def _log2_length(n: int) -> int:
    m = n.bit_length() - 1
    if n <= 0 or (1 << m) != n:
        raise DimensionError(f"length {n} is not a power of two")
    return m


def directional_derivative(f: BitVector, b: BitVector) -> BitVector:
    """Evaluation vector of ``f(x + b) + f(x)`` computed coordinatewise."""
    m = _log2_length(f.len)
    if b.len != m:
        raise DimensionError(f"direction has length {b.len}, expected {m}")
    if b.bits == 0:
        raise InvalidDirectionError("direction must be nonzero")
    g = f.to_array()
    shift = reverse_bits(b.bits, m)
    return BitVector.from_array(g ^ g[_index_array(m) ^ shift])


def drop_variable(mask: int, i: int) -> int:
    """Remove bit ``i`` and shift higher variables down by one."""
    low = mask & ((1 << i) - 1)
    return ((mask >> (i + 1)) << i) | low


def _check_var(code: MonomialCode, i: int) -> None:
    if not 0 <= i < code.m:
        raise DimensionError(f"variable index {i} out of range for m={code.m}")


def partial_derivative_code(code: MonomialCode, i: int) -> MonomialCode:
    """Derivative code w.r.t. ``x_i`` on the remaining m-1 variables."""
    _check_var(code, i)
    bit = 1 << i
    return MonomialCode(code.m - 1, frozenset(drop_variable(v, i) for v in code.gens if v & bit))


def decompose(code: MonomialCode, i: int = 0) -> tuple[MonomialCode, MonomialCode]:
    """Split into the (minus, plus) codes that SC decoding sees when it
    differentiates with respect to ``x_i``."""
    _check_var(code, i)
    bit = 1 << i
    plus = frozenset(drop_variable(v, i) for v in code.gens if not v & bit)
    return partial_derivative_code(code, i), MonomialCode(code.m - 1, plus)


def generator_matrix(code: MonomialCode) -> BitMatrix:
    """Rows are evaluation vectors of the generators (coordinate i -> bit i)."""
    rows = tuple(array_to_int(evaluate_mask(g, code.m)) for g in code.sorted_masks())
    return BitMatrix(code.length, rows)


def derivative_dimension(code: MonomialCode, b: BitVector) -> int:
    """Dimension of the span of the derivatives of all generators along ``b``."""
    if b.len != code.m:
        raise DimensionError(f"direction has length {b.len}, expected {code.m}")
    if b.bits == 0:
        raise InvalidDirectionError("direction must be nonzero")
    n = code.length
    rows = []
    for g in code.gens:
        ev = BitVector(n, array_to_int(evaluate_mask(g, code.m)))
        rows.append(directional_derivative(ev, b).bits)
    return int_rank(rows)


def _sorted_vars(mask: int) -> list[int]:
    return [j for j in range(mask.bit_length()) if (mask >> j) & 1]


def precedes(a: Monomial, b: Monomial, order: str = "reversed") -> bool:
    """Partial order on monomials, extended across degrees by divisibility.

    With the default order a larger variable index is smaller, so
    ``x0*x3`` precedes ``x0*x2``.  ``order="literal"`` flips the
    comparison of indices.
    """
    if a.m != b.m:
        raise DimensionError("monomials disagree on m")
    if order not in ORDERS:
        raise ValueError(f"unknown order {order!r}")
    av, bv = _sorted_vars(a.mask), _sorted_vars(b.mask)
    w = len(av)
    if w > len(bv):
        return False
    if order == "reversed":
        # the w smallest indices of b form the most permissive divisor
        return all(i >= j for i, j in zip(av, bv[:w]))
    return all(i <= j for i, j in zip(av, bv[len(bv) - w:]))


def _elementary_lower(mask: int, m: int, order: str):
    """Monomials directly below ``mask``; down-closure under these moves is
    down-closure under the full order."""
    step = 1 if order == "reversed" else -1
    for j in range(m):
        if (mask >> j) & 1:
            yield mask & ~(1 << j)
            k = j + step
            if 0 <= k < m and not (mask >> k) & 1:
                yield (mask & ~(1 << j)) | (1 << k)


def is_decreasing(code: MonomialCode, order: str = "reversed") -> bool:
    if order not in ORDERS:
        raise ValueError(f"unknown order {order!r}")
    gens = code.gens
    return all(low in gens for v in gens for low in _elementary_lower(v, code.m, order))


def substitute_affine(mask: int, rows: tuple[int, ...], offset: int) -> set[int]:
    """Algebraic normal form of ``x^mask`` after substituting ``x -> A x + b``.

    ``rows[j]`` is row ``j`` of A as a variable mask and bit ``j`` of
    ``offset`` is ``b_j``.  Returns the set of monomial masks with
    coefficient 1.
    """
    poly = {0}
    j = 0
    while mask:
        if mask & 1:
            row = rows[j]
            terms = [1 << k for k in range(row.bit_length()) if (row >> k) & 1]
            if (offset >> j) & 1:
                terms.append(0)
            nxt: set[int] = set()
            for t in poly:
                for term in terms:
                    nxt ^= {t | term}
            poly = nxt
            if not poly:
                break
        mask >>= 1
        j += 1
    return poly

