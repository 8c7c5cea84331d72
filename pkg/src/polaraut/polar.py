"""Channel models, synthetic-channel reliabilities and polar code construction.

Bit-channel ``i`` of a length-2^m polar code is reached through the sign
path read from the most significant bit of ``i`` (0 = minus, 1 = plus), so
level 0 of the polar transform is the top split, matching ``x_0`` as the
most significant coordinate bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionAnomalyError
from .f2core import array_to_int, int_rank
from .monomial import MonomialCode, evaluate_mask, is_decreasing, reverse_bits

__all__ = [
    "ChannelModel",
    "PolarCode",
    "SyntheticChannelTree",
    "ERASURE",
    "bec_reliabilities",
    "bhattacharyya_reliabilities",
    "construct_polar",
    "frozen_to_monomials",
    "index_to_monomial",
    "index_from_monomial",
    "polar_transform",
    "transform_row",
    "rate_rule_dimension",
    "synthetic_capacities_bec",
]

ERASURE = 2  # erasure symbol in uint8 received words

CHANNEL_KINDS = ("bec", "bsc", "awgn")


def _binary_entropy(p: float) -> float:
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


@dataclass(frozen=True)
class ChannelModel:
    """Binary-input memoryless symmetric channel.

    ``param`` is the erasure probability for ``bec``, the crossover
    probability for ``bsc`` and the noise standard deviation for ``awgn``
    (BPSK with unit amplitude).
    """

    kind: str
    param: float

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "param", float(self.param))
        if kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if kind in ("bec", "bsc") and not 0.0 <= self.param <= 1.0:
            raise ValueError(f"{kind} parameter must lie in [0, 1], got {self.param}")
        if kind == "awgn" and not self.param > 0.0:
            raise ValueError(f"awgn sigma must be positive, got {self.param}")

    @classmethod
    def parse(cls, text: str) -> "ChannelModel":
        """Parse ``"bec:0.5"``, ``"bsc:0.11"`` or ``"awgn:0.8"``."""
        kind, sep, value = text.partition(":")
        if not sep:
            raise ValueError(f"channel spec {text!r} must look like kind:param")
        return cls(kind, float(value))

    @property
    def is_erasure(self) -> bool:
        return self.kind == "bec"

    def capacity(self) -> float:
        if self.kind == "bec":
            return 1.0 - self.param
        if self.kind == "bsc":
            return 1.0 - _binary_entropy(self.param)
        return _biawgn_capacity(self.param)

    def bhattacharyya(self) -> float:
        if self.kind == "bec":
            return self.param
        if self.kind == "bsc":
            p = self.param
            return 2.0 * math.sqrt(p * (1.0 - p))
        return math.exp(-1.0 / (2.0 * self.param**2))

    def transmit(self, codewords: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Channel outputs for a batch of codewords.

        BEC outputs are uint8 words over {0, 1, ERASURE}; BSC and AWGN
        outputs are LLRs (positive favours bit 0).
        """
        codewords = np.asarray(codewords, dtype=np.uint8)
        if self.kind == "bec":
            out = codewords.copy()
            out[rng.random(codewords.shape) < self.param] = ERASURE
            return out
        if self.kind == "bsc":
            p = self.param
            flips = (rng.random(codewords.shape) < p).astype(np.uint8)
            received = codewords ^ flips
            if p in (0.0, 1.0):
                mag = np.inf
            else:
                mag = math.log((1.0 - p) / p)
            return np.where(received == 0, mag, -mag).astype(np.float64)
        sigma = self.param
        y = 1.0 - 2.0 * codewords.astype(np.float64) + sigma * rng.standard_normal(codewords.shape)
        return 2.0 * y / sigma**2

    def to_json(self) -> dict:
        return {"kind": self.kind, "param": self.param}

    def __str__(self) -> str:
        return f"{self.kind}:{self.param:g}"


def _biawgn_capacity(sigma: float) -> float:
    from scipy.integrate import quad

    def integrand(y):
        dens = math.exp(-((y - 1.0) ** 2) / (2 * sigma**2)) / math.sqrt(2 * math.pi * sigma**2)
        return dens * math.log2(1.0 + math.exp(-2.0 * y / sigma**2))

    value, _ = quad(integrand, 1.0 - 40 * sigma, 1.0 + 40 * sigma, limit=200)
    return 1.0 - value


def _polarize(z0: float, m: int) -> np.ndarray:
    z = np.array([z0], dtype=np.float64)
    for _ in range(m):
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


def bec_reliabilities(eps: float, m: int) -> np.ndarray:
    """Erasure probabilities of the 2^m synthetic channels of BEC(eps)."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {eps}")
    return _polarize(float(eps), m)


def bhattacharyya_reliabilities(z0: float, m: int) -> np.ndarray:
    """Bhattacharyya bounds of the synthetic channels.

    Exact only for the BEC; for other channels the values are upper bounds
    used purely as a ranking surrogate.
    """
    if not 0.0 <= z0 <= 1.0:
        raise ValueError(f"Bhattacharyya parameter must lie in [0, 1], got {z0}")
    return _polarize(float(z0), m)


@dataclass(frozen=True)
class SyntheticChannelTree:
    """Exact BEC erasure probabilities for every sign path up to ``depth``."""

    eps: float
    depth: int
    levels: tuple = field(repr=False)

    @staticmethod
    def _index(path: str) -> int:
        idx = 0
        for sign in path:
            if sign not in "-+":
                raise ValueError(f"bad sign {sign!r} in path {path!r}")
            idx = (idx << 1) | (sign == "+")
        return idx

    def z(self, path: str = "") -> float:
        if len(path) > self.depth:
            raise ValueError(f"path {path!r} deeper than {self.depth}")
        return float(self.levels[len(path)][self._index(path)])

    def capacity(self, path: str = "") -> float:
        return 1.0 - self.z(path)

    def capacities(self, level: int) -> np.ndarray:
        return 1.0 - self.levels[level]


def synthetic_capacities_bec(eps: float, depth: int) -> SyntheticChannelTree:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {eps}")
    levels = tuple(_polarize(eps, d) for d in range(depth + 1))
    return SyntheticChannelTree(float(eps), depth, levels)


def index_to_monomial(i: int, m: int) -> int:
    """Mask of the monomial attached to row ``i`` of the polar transform:
    the product of ``x_{m-1-j}`` over the zero bits ``j`` of ``i``."""
    return reverse_bits(~i & ((1 << m) - 1), m)


def index_from_monomial(mask: int, m: int) -> int:
    """Inverse of :func:`index_to_monomial`."""
    return ~reverse_bits(mask, m) & ((1 << m) - 1)


def transform_row(i: int, m: int) -> int:
    """Row ``i`` of ``[[1,0],[1,1]]^{kron m}`` as an integer bitset."""
    idx = np.arange(1 << m, dtype=np.int64)
    return array_to_int((idx & ~i) == 0)


def polar_transform(u: np.ndarray) -> np.ndarray:
    """``u @ A_m`` over GF(2) along the last axis; the transform is an
    involution, so this also recovers ``u`` from a codeword."""
    x = np.array(u, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    half = 1
    while half < n:
        shaped = x.reshape(x.shape[:-1] + (n // (2 * half), 2, half))
        shaped[..., 0, :] ^= shaped[..., 1, :]
        half *= 2
    return x


def frozen_to_monomials(m: int, info, check: str = "auto") -> MonomialCode:
    """Monomial generating set of the code spanned by the rows ``info``.

    The rows evaluate products of complemented variables; their span equals
    the span of the mapped monomials exactly when the mapped set is closed
    under divisibility.  ``check="rank"`` verifies this with GF(2) ranks,
    ``check="closure"`` tests divisibility closure directly, ``"auto"``
    uses ranks up to m = 10 and ``"none"`` skips the check.
    """
    info = sorted(set(int(i) for i in info))
    n = 1 << m
    if any(not 0 <= i < n for i in info):
        raise ValueError(f"information indices must lie in [0, {n})")
    masks = [index_to_monomial(i, m) for i in info]
    code = MonomialCode(m, frozenset(masks))
    if check == "auto":
        check = "rank" if m <= 10 else "closure"
    if check == "rank":
        rows = [transform_row(i, m) for i in info]
        evs = [array_to_int(evaluate_mask(v, m)) for v in masks]
        r_rows, r_mon, r_union = int_rank(rows), int_rank(evs), int_rank(rows + evs)
        if not r_rows == r_mon == r_union:
            raise ConstructionAnomalyError(
                f"row span (rank {r_rows}) and monomial span (rank {r_mon}) differ; union rank {r_union}",
                r_rows,
                r_mon,
                r_union,
            )
    elif check == "closure":
        gens = code.gens
        for v in gens:
            w = v
            while w:
                low = w & -w
                if v & ~low not in gens:
                    raise ConstructionAnomalyError(
                        f"monomial set not closed under divisibility at mask {v:b}"
                    )
                w ^= low
    elif check != "none":
        raise ValueError(f"unknown check {check!r}")
    return code


def rate_rule_dimension(channel: ChannelModel, m: int) -> int:
    """``round(2^m * I(W))`` with halves rounded up."""
    return int(math.floor((1 << m) * channel.capacity() + 0.5))


@dataclass(frozen=True)
class PolarCode:
    m: int
    k: int
    channel: ChannelModel
    frozen: frozenset
    reliabilities: np.ndarray = field(repr=False, compare=False)
    monomials: MonomialCode = field(repr=False)

    @property
    def n(self) -> int:
        return 1 << self.m

    @property
    def info(self) -> list[int]:
        return [i for i in range(self.n) if i not in self.frozen]

    @property
    def frozen_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[list(self.frozen)] = True
        return mask

    @classmethod
    def from_monomial_code(cls, code: MonomialCode, channel: ChannelModel | None = None) -> "PolarCode":
        """Polar-transform view of a monomial code closed under divisibility."""
        m, n = code.m, 1 << code.m
        info = sorted(index_from_monomial(v, m) for v in code.gens)
        frozen_to_monomials(m, info, check="rank" if m <= 10 else "closure")
        channel = channel or ChannelModel("bec", 0.5)
        frozen = frozenset(range(n)) - frozenset(info)
        return cls(m, len(info), channel, frozen, np.full(n, np.nan), code)

    def encode(self, messages: np.ndarray) -> np.ndarray:
        """Encode information bits (last axis of length k) into codewords."""
        messages = np.asarray(messages, dtype=np.uint8)
        u = np.zeros(messages.shape[:-1] + (self.n,), dtype=np.uint8)
        u[..., self.info] = messages
        return polar_transform(u)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "channel": self.channel.to_json(),
            "frozen": sorted(self.frozen),
            "monomials": sorted(self.monomials.gens),
        }


def _reliability_scores(channel: ChannelModel, m: int) -> np.ndarray:
    if channel.is_erasure:
        return bec_reliabilities(channel.param, m)
    return bhattacharyya_reliabilities(channel.bhattacharyya(), m)


def construct_polar(
    channel: ChannelModel,
    m: int,
    k: int | None = None,
    rate_rule: str | None = None,
    check: str = "auto",
) -> PolarCode:
    """Freeze the ``n - k`` synthetic channels with the largest scores.

    Ties freeze the smaller index first.  Pass ``rate_rule="capacity"``
    instead of ``k`` to use ``k = round(2^m I(W))``.
    """
    n = 1 << m
    if k is None:
        if rate_rule != "capacity":
            raise ValueError("give k or rate_rule='capacity'")
        k = rate_rule_dimension(channel, m)
    if not 0 <= k <= n:
        raise ValueError(f"k={k} out of range for n={n}")
    scores = _reliability_scores(channel, m)
    order = np.lexsort((np.arange(n), -scores))
    frozen = frozenset(int(i) for i in order[: n - k])
    info = [i for i in range(n) if i not in frozen]
    mono = frozen_to_monomials(m, info, check=check)
    if check != "none" and not is_decreasing(mono):
        raise ConstructionAnomalyError(f"constructed code {mono} is not decreasing")
    return PolarCode(m, k, channel, frozen, scores, mono)
