"""Affine permutations of coordinates and the automorphism structure of
monomial codes.

An affine map is stored as a matrix A (row ``j`` is a mask over variables)
and an offset b.  It sends the point with variable vector ``x`` to
``A x + b``; applying it to a word sets ``out[i] = word[pi(i)]`` where
``pi(i)`` is the index of ``A alpha_i + b``.  Under this action the
evaluation vector of ``f`` becomes the evaluation vector of
``f(A x + b)``.

Block profiles list diagonal block sizes with block 0 first.  Block ``i``
governs the variables ``x_{nu_i}, ..., x_{nu_i + s_i - 1}`` with
``nu_i = sum(s[i+1:])``, so block 0 holds the highest-indexed variables.
In this variable order a BLTA matrix is block *upper* triangular: the
image of ``x_j`` may only involve variables of its own block or of blocks
with a smaller index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvalidPermutationError
from .f2core import (
    BitMatrix,
    BitVector,
    array_to_int,
    in_row_space,
    is_invertible,
    mat_apply,
    mat_inverse,
    mat_mul,
    random_invertible,
)
from .monomial import (
    MonomialCode,
    decompose,
    evaluate_mask,
    generator_matrix,
    partial_derivative_code,
    substitute_affine,
)

__all__ = [
    "AffinePermutation",
    "BlockProfile",
    "SymmetryReport",
    "identity_perm",
    "apply_affine",
    "variable_permutation",
    "compose",
    "inverse",
    "is_automorphism",
    "block_profile",
    "blta_size",
    "blta_log2_size",
    "lta_log2_size",
    "sample_blta",
    "sample_lta",
    "is_blta_member",
    "partial_symmetry",
    "phi_set",
    "verify_theorem2",
]


@dataclass(frozen=True)
class AffinePermutation:
    A: BitMatrix
    b: BitVector

    def __post_init__(self):
        if self.A.nrows != self.A.cols or self.b.len != self.A.cols:
            raise DimensionError("A must be m x m and b of length m")
        if not is_invertible(self.A):
            raise ValueError("affine map needs an invertible matrix")

    @property
    def m(self) -> int:
        return self.b.len

    @cached_property
    def index_map(self) -> np.ndarray:
        """``index_map[i]`` is the coordinate read into position ``i``."""
        m = self.m
        n = 1 << m
        idx = np.arange(n, dtype=np.int64)
        shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
        points = (idx[:, None] >> shifts[None, :]) & 1  # column k holds x_k
        amat = self.A.to_array().astype(np.int64)
        image = (points @ amat.T + self.b.to_array().astype(np.int64)) & 1
        return (image << shifts[None, :]).sum(axis=1)

    def is_linear_permutation(self) -> bool:
        return self.b.bits == 0 and all(r.bit_count() == 1 for r in self.A.rows)

    def to_json(self) -> dict:
        return {"A": list(self.A.rows), "b": self.b.bits}

    @classmethod
    def from_json(cls, data: dict) -> "AffinePermutation":
        rows = tuple(int(r) for r in data["A"])
        m = len(rows)
        return cls(BitMatrix(m, rows), BitVector(m, int(data.get("b", 0))))


def identity_perm(m: int) -> AffinePermutation:
    return AffinePermutation(BitMatrix.identity(m), BitVector.zeros(m))


def apply_affine(perm: AffinePermutation, word):
    """Permute a word; accepts a BitVector or an array whose last axis has
    length 2^m (soft values, batches)."""
    n = 1 << perm.m
    if isinstance(word, BitVector):
        if word.len != n:
            raise DimensionError(f"word length {word.len} != {n}")
        return BitVector.from_array(word.to_array()[perm.index_map])
    word = np.asarray(word)
    if word.shape[-1] != n:
        raise DimensionError(f"word length {word.shape[-1]} != {n}")
    return word[..., perm.index_map]


def unapply_affine(perm: AffinePermutation, word: np.ndarray) -> np.ndarray:
    """Inverse action of :func:`apply_affine` on arrays."""
    out = np.empty_like(word)
    out[..., perm.index_map] = word
    return out


def variable_permutation(sigma: Sequence[int]) -> AffinePermutation:
    """Linear map that substitutes ``x_{sigma[i]}`` for ``x_i``."""
    m = len(sigma)
    if sorted(sigma) != list(range(m)):
        raise InvalidPermutationError(f"{list(sigma)} is not a permutation of range({m})")
    rows = tuple(1 << s for s in sigma)
    return AffinePermutation(BitMatrix(m, rows), BitVector.zeros(m))


def compose(first: AffinePermutation, second: AffinePermutation) -> AffinePermutation:
    """Map equal to applying ``first`` and then ``second`` to a word."""
    if first.m != second.m:
        raise DimensionError("permutations act on different m")
    a = mat_mul(first.A, second.A)
    b = mat_apply(first.A, second.b) ^ first.b
    return AffinePermutation(a, b)


def inverse(perm: AffinePermutation) -> AffinePermutation:
    a_inv = mat_inverse(perm.A)
    return AffinePermutation(a_inv, mat_apply(a_inv, perm.b))


def is_automorphism(code: MonomialCode, perm: AffinePermutation, method: str = "anf") -> bool:
    """Whether every permuted generator stays inside the code.

    ``method="anf"`` expands each substituted generator into monomials and
    checks that all of them are generators (monomials are linearly
    independent, so this is exact).  ``method="span"`` permutes evaluation
    vectors and tests row-space membership directly.
    """
    if perm.m != code.m:
        raise DimensionError(f"permutation on m={perm.m}, code on m={code.m}")
    if method == "anf":
        gens = code.gens
        rows, offset = perm.A.rows, perm.b.bits
        return all(substitute_affine(g, rows, offset) <= gens for g in gens)
    if method == "span":
        gmat = generator_matrix(code)
        idx = perm.index_map
        return all(
            in_row_space(BitVector(code.length, array_to_int(evaluate_mask(g, code.m)[idx])), gmat)
            for g in code.gens
        )
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class BlockProfile:
    sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if not self.sizes or any(s <= 0 for s in self.sizes):
            raise ValueError(f"block sizes must be positive, got {self.sizes}")

    @classmethod
    def parse(cls, text: str) -> "BlockProfile":
        return cls(tuple(int(p) for p in text.replace("(", "").replace(")", "").split(",") if p.strip()))

    @classmethod
    def lta(cls, m: int) -> "BlockProfile":
        return cls((1,) * m)

    @property
    def m(self) -> int:
        return sum(self.sizes)

    @property
    def l(self) -> int:
        return len(self.sizes)

    def nu(self, i: int) -> int:
        return sum(self.sizes[i + 1:])

    def gamma(self, i: int) -> int:
        return sum(self.sizes[:i])

    def block_vars(self, i: int) -> range:
        start = self.nu(i)
        return range(start, start + self.sizes[i])

    def block_of(self, var: int) -> int:
        for i in range(self.l):
            if var in self.block_vars(i):
                return i
        raise DimensionError(f"variable {var} outside profile with m={self.m}")

    def to_json(self) -> list[int]:
        return list(self.sizes)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.sizes)) + ")"


def _adjacent_swap(m: int, r: int) -> AffinePermutation:
    sigma = list(range(m))
    sigma[r], sigma[r + 1] = sigma[r + 1], sigma[r]
    return variable_permutation(sigma)


def block_profile(code: MonomialCode) -> BlockProfile:
    """Maximal runs of consecutive variables closed under adjacent swaps."""
    m = code.m
    if m == 0:
        raise ValueError("block profile needs at least one variable")
    runs = [1]
    for r in range(m - 1):
        if is_automorphism(code, _adjacent_swap(m, r)):
            runs[-1] += 1
        else:
            runs.append(1)
    # runs go from x_0 upward; block 0 is the trailing run
    return BlockProfile(tuple(reversed(runs)))


def blta_size(profile: BlockProfile) -> int:
    total = 1 << profile.m
    for i, s in enumerate(profile.sizes):
        gl = 1
        for j in range(s):
            gl *= (1 << s) - (1 << j)
        total *= (1 << (s * profile.gamma(i))) * gl
    return total


def blta_log2_size(profile: BlockProfile) -> float:
    return math.log2(blta_size(profile))


def lta_log2_size(m: int) -> float:
    return m * (m - 1) / 2 + m


def sample_blta(profile: BlockProfile, rng: np.random.Generator) -> AffinePermutation:
    """Uniform random element of BLTA(profile)."""
    m = profile.m
    rows = [0] * m
    for i, s in enumerate(profile.sizes):
        start = profile.nu(i)
        diag = random_invertible(s, rng)
        free_cols = m - (start + s)
        for r in range(s):
            row = diag.rows[r] << start
            if free_cols:
                tail = rng.integers(0, 2, size=free_cols, dtype=np.uint8)
                row |= array_to_int(tail) << (start + s)
            rows[start + r] = row
    b = array_to_int(rng.integers(0, 2, size=m, dtype=np.uint8)) if m else 0
    return AffinePermutation(BitMatrix(m, tuple(rows)), BitVector(m, b))


def sample_lta(m: int, rng: np.random.Generator) -> AffinePermutation:
    return sample_blta(BlockProfile.lta(m), rng)


def is_blta_member(perm: AffinePermutation, profile: BlockProfile) -> bool:
    if perm.m != profile.m:
        raise DimensionError(f"permutation on m={perm.m}, profile on m={profile.m}")
    for i in range(profile.l):
        forbidden = (1 << profile.nu(i)) - 1
        for j in profile.block_vars(i):
            if perm.A.rows[j] & forbidden:
                return False
    return is_invertible(perm.A)


@dataclass(frozen=True)
class SymmetryReport:
    dims: tuple[int, ...]
    t: int

    @property
    def minimal_variables(self) -> tuple[int, ...]:
        low = min(self.dims)
        return tuple(i for i, d in enumerate(self.dims) if d == low)

    def to_json(self) -> dict:
        return {"dims": list(self.dims), "t": self.t, "minimal_variables": list(self.minimal_variables)}


def partial_symmetry(code: MonomialCode) -> SymmetryReport:
    if code.m == 0:
        raise ValueError("partial symmetry needs at least one variable")
    dims = tuple(partial_derivative_code(code, i).dimension for i in range(code.m))
    low = min(dims)
    return SymmetryReport(dims, sum(d == low for d in dims))


def phi_set(code: MonomialCode, i: int, profile: BlockProfile) -> list[MonomialCode]:
    """Codes at SC level ``nu_i``, ordered by sign path with minus first."""
    if not 0 <= i < profile.l:
        raise IndexError(f"block index {i} out of range for {profile}")
    codes = [code]
    for _ in range(profile.nu(i)):
        codes = [child for c in codes for child in decompose(c, 0)]
    return codes


def verify_theorem2(code: MonomialCode, profile: BlockProfile) -> bool:
    """Every code at level ``nu_i`` is invariant under permutations of the
    variables of block ``i`` (checked on adjacent swaps, which generate
    them)."""
    if profile.m != code.m:
        raise DimensionError(f"profile sums to {profile.m}, code has m={code.m}")
    for i, s in enumerate(profile.sizes):
        if s < 2:
            continue
        seen: set[frozenset] = set()
        for sub in phi_set(code, i, profile):
            if sub.gens in seen:
                continue
            seen.add(sub.gens)
            for r in range(s - 1):
                if not is_automorphism(sub, _adjacent_swap(sub.m, r)):
                    return False
    return True

