"""Successive cancellation and permutation (automorphism ensemble) decoding.

Two soft-value modes are supported:

* ``"llr"``: float log-likelihood ratios, positive values favour bit 0,
  infinities are allowed;
* ``"erasure"``: uint8 symbols over {0, 1, ERASURE} for exact BEC decoding.

The decoder works on batches (last axis = coordinates).  Level ``t`` of the
recursion splits the current word into halves, i.e. differentiates with
respect to ``x_t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .autgroup import AffinePermutation, apply_affine, is_automorphism, unapply_affine
from .errors import DimensionError, ModeMismatchError, RejectedPermutationError
from .polar import ERASURE, PolarCode, polar_transform

__all__ = [
    "SoftVector",
    "SCOutcome",
    "ERASURE",
    "combine_minus",
    "combine_plus",
    "sc_decode",
    "sc_decode_batch",
    "permutation_decode",
    "permutation_decode_batch",
    "sc_success_indicator",
    "sc_success_batch",
    "erasure_word",
]

MODES = ("llr", "erasure")


@dataclass(frozen=True)
class SoftVector:
    values: np.ndarray
    mode: str = "llr"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        dtype = np.float64 if self.mode == "llr" else np.uint8
        values = np.asarray(self.values, dtype=dtype)
        if self.mode == "erasure" and np.any(values > ERASURE):
            raise ValueError("erasure-mode symbols must be 0, 1 or ERASURE")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_erasure_str(cls, text: str) -> "SoftVector":
        """Parse strings such as ``"e0ee0e00"`` (``e`` marks an erasure)."""
        table = {"0": 0, "1": 1, "e": ERASURE, "E": ERASURE}
        try:
            return cls(np.array([table[ch] for ch in text.strip()], dtype=np.uint8), "erasure")
        except KeyError as exc:
            raise ValueError(f"bad erasure symbol {exc.args[0]!r}") from None

    @classmethod
    def from_llrs(cls, values) -> "SoftVector":
        return cls(np.asarray(values, dtype=np.float64), "llr")

    def __len__(self) -> int:
        return self.values.shape[-1]

    def __str__(self) -> str:
        if self.mode == "erasure":
            return "".join("e" if v == ERASURE else str(int(v)) for v in self.values)
        return ",".join(f"{v:g}" for v in self.values)


def erasure_word(pattern, n: int) -> np.ndarray:
    """All-zero codeword with the given positions erased."""
    y = np.zeros(n, dtype=np.uint8)
    y[list(pattern)] = ERASURE
    return y


def _unwrap(a, b):
    if isinstance(a, SoftVector) or isinstance(b, SoftVector):
        if not (isinstance(a, SoftVector) and isinstance(b, SoftVector)):
            raise ModeMismatchError("cannot combine a SoftVector with a raw array")
        if a.mode != b.mode:
            raise ModeMismatchError(f"cannot combine {a.mode} with {b.mode}")
        return a.values, b.values, a.mode, True
    return a, b, None, False


def _minus_llr(a, b, min_sum: bool):
    sign = np.sign(a) * np.sign(b)
    mag = np.minimum(np.abs(a), np.abs(b))
    if min_sum:
        return sign * mag
    with np.errstate(invalid="ignore", over="ignore"):
        corr = np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    corr = np.where(np.isfinite(a) & np.isfinite(b), corr, 0.0)
    return sign * mag + corr


def _minus_erasure(a, b):
    return np.where((a == ERASURE) | (b == ERASURE), ERASURE, a ^ b).astype(np.uint8)


def _plus_llr(a, b, u):
    return np.where(np.asarray(u) == 0, a, -a) + b


def _plus_erasure(a, b, u):
    au = np.asarray(a) ^ np.asarray(u)
    known_a = a != ERASURE
    known_b = b != ERASURE
    out = np.where(known_b, b, np.where(known_a, au, ERASURE)).astype(np.uint8)
    conflicts = known_a & known_b & (au != b)
    return out, conflicts


def combine_minus(a, b, mode: str = "llr", min_sum: bool = False):
    """Soft value of ``c0 + c1`` from the soft values of ``c0`` and ``c1``.

    LLR mode uses the exact box-plus rule (or min-sum); erasure mode XORs
    known symbols and propagates erasures.
    """
    a, b, vmode, wrapped = _unwrap(a, b)
    mode = vmode or mode
    if mode == "llr":
        out = _minus_llr(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64), min_sum)
    elif mode == "erasure":
        out = _minus_erasure(np.asarray(a, dtype=np.uint8), np.asarray(b, dtype=np.uint8))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if wrapped:
        return SoftVector(out, mode)
    return out[()] if out.ndim == 0 else out


def combine_plus(a, b, u, mode: str = "llr", return_conflicts: bool = False):
    """Soft value of ``c1`` given both observations and the decision ``u``
    on ``c0 + c1``.

    In erasure mode, two known but inconsistent symbols resolve to ``b`` and
    are reported as conflicts when ``return_conflicts`` is set.
    """
    a, b, vmode, wrapped = _unwrap(a, b)
    mode = vmode or mode
    if mode == "llr":
        out = _plus_llr(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64), u)
        conflicts = np.zeros(np.shape(out), dtype=bool)
    elif mode == "erasure":
        out, conflicts = _plus_erasure(np.asarray(a, dtype=np.uint8), np.asarray(b, dtype=np.uint8),
                                       np.asarray(u, dtype=np.uint8))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if wrapped:
        out = SoftVector(out, mode)
    elif out.ndim == 0:
        out = out[()]
    if return_conflicts:
        return out, conflicts
    return out


@dataclass
class _Batch:
    codeword: np.ndarray
    u: np.ndarray
    leaves: np.ndarray
    failed: np.ndarray
    conflicts: np.ndarray
    root_minus: np.ndarray | None = None


def _sc_rec(y: np.ndarray, frozen: np.ndarray, mode: str, min_sum: bool) -> _Batch:
    batch, n = y.shape
    if n == 1:
        leaf = y[:, 0]
        if frozen[0]:
            u = np.zeros(batch, dtype=np.uint8)
            failed = np.zeros(batch, dtype=bool)
        elif mode == "llr":
            u = (leaf < 0).astype(np.uint8)
            failed = np.zeros(batch, dtype=bool)
        else:
            failed = leaf == ERASURE
            u = np.where(failed, 0, leaf).astype(np.uint8)
        u = u[:, None]
        return _Batch(u, u, y.copy(), failed, np.zeros(batch, dtype=np.int64))
    h = n // 2
    a, b = y[:, :h], y[:, h:]
    if mode == "llr":
        y_minus = _minus_llr(a, b, min_sum)
    else:
        y_minus = _minus_erasure(a, b)
    first = _sc_rec(y_minus, frozen[:h], mode, min_sum)
    c_minus = first.codeword
    if mode == "llr":
        y_plus = _plus_llr(a, b, c_minus)
        conflicts = np.zeros(batch, dtype=np.int64)
    else:
        y_plus, clash = _plus_erasure(a, b, c_minus)
        conflicts = clash.sum(axis=1)
    second = _sc_rec(y_plus, frozen[h:], mode, min_sum)
    return _Batch(
        np.concatenate([c_minus ^ second.codeword, second.codeword], axis=1),
        np.concatenate([first.u, second.u], axis=1),
        np.concatenate([first.leaves, second.leaves], axis=1),
        first.failed | second.failed,
        conflicts + first.conflicts + second.conflicts,
        y_minus,
    )


def _infer_mode(y) -> str:
    if isinstance(y, SoftVector):
        return y.mode
    return "erasure" if np.asarray(y).dtype == np.uint8 else "llr"


def _as_batch(y, n: int, mode: str) -> np.ndarray:
    values = y.values if isinstance(y, SoftVector) else y
    dtype = np.float64 if mode == "llr" else np.uint8
    arr = np.atleast_2d(np.asarray(values, dtype=dtype))
    if arr.shape[-1] != n:
        raise DimensionError(f"received word has length {arr.shape[-1]}, code length is {n}")
    return arr


def sc_decode_batch(frozen_mask: np.ndarray, y: np.ndarray, mode: str = "llr",
                    min_sum: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Decode a batch; returns ``(codewords, failed)``."""
    frozen_mask = np.asarray(frozen_mask, dtype=bool)
    out = _sc_rec(_as_batch(y, frozen_mask.size, mode), frozen_mask, mode, min_sum)
    return out.codeword, out.failed


@dataclass
class SCOutcome:
    """Result of decoding one received word.

    ``codeword`` is always filled in; when ``failed`` is set (erasure mode
    only) the erased information positions were decided as 0.
    """

    codeword: np.ndarray
    info_bits: np.ndarray
    u: np.ndarray
    failed: bool
    mode: str
    leaf_values: np.ndarray = field(repr=False)
    contradictions: int = 0
    root_minus: np.ndarray | None = field(default=None, repr=False)
    branch: int = 0

    @property
    def success(self) -> bool:
        return not self.failed

    def trace(self, frozen_mask: np.ndarray) -> list[tuple[int, object, int, bool]]:
        """Per-bit ``(index, soft value at the leaf, decision, frozen)``."""
        return [
            (i, self.leaf_values[i].item(), int(self.u[i]), bool(frozen_mask[i]))
            for i in range(self.u.size)
        ]


def sc_decode(code: PolarCode, y, min_sum: bool = False) -> SCOutcome:
    """Decode one received word (SoftVector, float LLR array or uint8
    erasure-mode array)."""
    mode = _infer_mode(y)
    frozen = code.frozen_mask
    res = _sc_rec(_as_batch(y, code.n, mode), frozen, mode, min_sum)
    u = res.u[0]
    return SCOutcome(
        codeword=res.codeword[0],
        info_bits=u[~frozen],
        u=u,
        failed=bool(res.failed[0]),
        mode=mode,
        leaf_values=res.leaves[0],
        contradictions=int(res.conflicts[0]),
        root_minus=None if res.root_minus is None else res.root_minus[0],
    )


def _check_perms(code: PolarCode, perms: Sequence[AffinePermutation], waive: bool) -> None:
    if not perms:
        raise ValueError("at least one permutation is required")
    for perm in perms:
        if perm.m != code.m:
            raise DimensionError(f"permutation on m={perm.m}, code on m={code.m}")
        if not waive and not is_automorphism(code.monomials, perm):
            raise RejectedPermutationError("permutation is not an automorphism of the code")


def _soft_distance(y: np.ndarray, cand: np.ndarray) -> np.ndarray:
    hard = (y < 0).astype(np.uint8)
    mag = np.abs(y)
    return np.where(cand != hard, mag, 0.0).sum(axis=-1)


def _consistent(y: np.ndarray, cand: np.ndarray) -> np.ndarray:
    known = y != ERASURE
    return ~np.any(known & (cand != y), axis=-1)


def permutation_decode_batch(code: PolarCode, y: np.ndarray, perms: Sequence[AffinePermutation],
                             mode: str = "llr", min_sum: bool = False,
                             waive_check: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Ensemble decoding of a batch.

    Returns ``(codewords, failed, branch)`` where ``branch`` is the index of
    the selected permutation.  Ties go to the earliest permutation.
    """
    _check_perms(code, perms, waive_check)
    y = _as_batch(y, code.n, mode)
    frozen = code.frozen_mask
    batch = y.shape[0]
    best_cw = np.zeros_like(y, dtype=np.uint8)
    best_branch = np.full(batch, -1, dtype=np.int64)
    best_metric = np.full(batch, np.inf)
    for k, perm in enumerate(perms):
        res = _sc_rec(apply_affine(perm, y), frozen, mode, min_sum)
        cw = unapply_affine(perm, res.codeword)
        if mode == "llr":
            metric = _soft_distance(y, cw)
            take = metric < best_metric
            best_metric = np.where(take, metric, best_metric)
        else:
            take = (best_branch < 0) & ~res.failed & _consistent(y, cw)
        best_cw[take] = cw[take]
        best_branch[take] = k
        if mode == "erasure" and np.all(best_branch >= 0):
            break
    failed = best_branch < 0
    if np.any(failed):
        # no branch succeeded: fall back to the first permutation's estimate
        res = _sc_rec(apply_affine(perms[0], y[failed]), frozen, mode, min_sum)
        best_cw[failed] = unapply_affine(perms[0], res.codeword)
        best_branch[failed] = 0
    return best_cw, failed, best_branch


def permutation_decode(code: PolarCode, y, perms: Sequence[AffinePermutation],
                       min_sum: bool = False, waive_check: bool = False) -> SCOutcome:
    """Decode ``y`` once per permutation and keep the best candidate.

    LLR mode keeps the candidate with the smallest soft distance to the hard
    decisions of ``y``; erasure mode keeps the first successful candidate
    that agrees with every unerased symbol.
    """
    mode = _infer_mode(y)
    yb = _as_batch(y, code.n, mode)
    cw, failed, branch = permutation_decode_batch(code, yb, perms, mode, min_sum, waive_check)
    k = int(branch[0])
    single = sc_decode(code, SoftVector(apply_affine(perms[k], yb[0]), mode), min_sum)
    u = polar_transform(cw[0])
    frozen = code.frozen_mask
    return SCOutcome(
        codeword=cw[0],
        info_bits=u[~frozen],
        u=u,
        failed=bool(failed[0]),
        mode=mode,
        leaf_values=single.leaf_values,
        contradictions=single.contradictions,
        root_minus=single.root_minus,
        branch=k,
    )


def sc_success_batch(code: PolarCode, patterns: np.ndarray, perm: AffinePermutation | None = None) -> np.ndarray:
    """SC success on the all-zero codeword for a batch of erasure patterns
    (boolean array, True = erased), optionally after permuting."""
    patterns = np.atleast_2d(np.asarray(patterns, dtype=bool))
    y = np.where(patterns, ERASURE, 0).astype(np.uint8)
    if perm is not None:
        y = apply_affine(perm, y)
    _, failed = sc_decode_batch(code.frozen_mask, y, "erasure")
    return ~failed


def sc_success_indicator(code: PolarCode, erasure_pattern, perm: AffinePermutation | None = None) -> bool:
    mask = np.zeros(code.n, dtype=bool)
    mask[list(erasure_pattern)] = True
    return bool(sc_success_batch(code, mask, perm)[0])
