"""Experiment drivers: block-profile scans, rate-gap tables, FER simulation
and the worked-example fixtures."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .autgroup import (
    AffinePermutation,
    BlockProfile,
    apply_affine,
    block_profile,
    blta_log2_size,
    identity_perm,
    is_automorphism,
    lta_log2_size,
    partial_symmetry,
    phi_set,
    sample_blta,
    sample_lta,
    variable_permutation,
    verify_theorem2,
)
from .monomial import decompose, parse_code, partial_derivative_code
from .polar import (
    ChannelModel,
    PolarCode,
    construct_polar,
    rate_rule_dimension,
    synthetic_capacities_bec,
)
from .scdec import SoftVector, permutation_decode_batch, sc_decode, sc_decode_batch

log = logging.getLogger(__name__)

DEFAULT_M_CAP = 14


# ---------------------------------------------------------------- scan


@dataclass
class ScanRow:
    m: int
    k: int
    k_offset: int
    profile: tuple[int, ...]
    max_block: int
    t: int
    symmetry_dims: tuple[int, ...]
    log2_blta: float
    log2_lta: float
    theorem2: bool
    level_gaps: list[dict] = field(default_factory=list)

    @property
    def log2_extra(self) -> float:
        return self.log2_blta - self.log2_lta

    def to_record(self) -> dict:
        rec = {
            "m": self.m,
            "k": self.k,
            "k_offset": self.k_offset,
            "profile": " ".join(map(str, self.profile)),
            "max_block": self.max_block,
            "t": self.t,
            "symmetry_dims": " ".join(map(str, self.symmetry_dims)),
            "log2_blta": round(self.log2_blta, 6),
            "log2_lta": round(self.log2_lta, 6),
            "log2_extra": round(self.log2_extra, 6),
            "theorem2": self.theorem2,
        }
        # one summary per block: worst rate gap and worst capacity gap on that level
        rec["level_gaps"] = ";".join(
            f"{g['block']}:{g['nu']}:{g['s']}:{g['max_rate_gap']:.6f}:"
            + ("nan" if g["max_capacity_gap"] is None else f"{g['max_capacity_gap']:.6f}")
            for g in self.level_gaps
        )
        return rec


def log2_extra_from_profile(profile: BlockProfile) -> float:
    """Extra log-size of BLTA over LTA, summed block by block.

    Block ``i`` contributes ``log2 |GL(s_i)|`` minus the unit-triangular
    count ``s_i (s_i - 1) / 2``; off-diagonal blocks cancel out.
    """
    extra = 0.0
    for s in profile.sizes:
        gl = math.prod((1 << s) - (1 << j) for j in range(s))
        extra += math.log2(gl) - s * (s - 1) / 2
    return extra


def _level_gap_summary(code: PolarCode, profile: BlockProfile) -> list[dict]:
    rows = rate_gap_report(code, profile)
    out = []
    for i, s in enumerate(profile.sizes):
        mine = [r for r in rows if r["block"] == i]
        caps = [r["capacity_gap"] for r in mine if r["capacity_gap"] is not None]
        out.append({
            "block": i,
            "nu": profile.nu(i),
            "s": s,
            "max_rate_gap": max(float(r["rate_gap"]) for r in mine),
            "max_capacity_gap": max(caps) if caps else None,
        })
    return out


def scan_row(channel: ChannelModel, m: int, k: int, k_offset: int = 0) -> ScanRow:
    code = construct_polar(channel, m, k)
    mono = code.monomials
    profile = block_profile(mono)
    sym = partial_symmetry(mono)
    return ScanRow(
        m=m,
        k=k,
        k_offset=k_offset,
        profile=profile.sizes,
        max_block=max(profile.sizes),
        t=sym.t,
        symmetry_dims=sym.dims,
        log2_blta=blta_log2_size(profile),
        log2_lta=lta_log2_size(m),
        theorem2=verify_theorem2(mono, profile),
        level_gaps=_level_gap_summary(code, profile),
    )


def theorem1_scan(channel: ChannelModel, m_values: Iterable[int], k: int | None = None,
                  offsets: Sequence[int] = (-1, 0, 1), m_cap: int = DEFAULT_M_CAP) -> list[ScanRow]:
    """Block profile, symmetry and group size of polar codes across ``m``.

    ``k=None`` uses the capacity rate rule; rows are emitted for every
    offset around that dimension.
    """
    if not channel.is_erasure:
        log.warning("%s: reliabilities are Bhattacharyya bounds, not exact", channel)
    rows = []
    for m in m_values:
        if m > m_cap:
            raise ValueError(f"m={m} exceeds the scan cap {m_cap}")
        base = rate_rule_dimension(channel, m) if k is None else k
        for off in offsets:
            kk = base + off
            if 0 <= kk <= (1 << m):
                rows.append(scan_row(channel, m, kk, off))
    return rows


# ---------------------------------------------------------------- rate gaps


def _paths(depth: int) -> list[str]:
    return ["".join("-+"[(j >> (depth - 1 - t)) & 1] for t in range(depth)) for j in range(1 << depth)]


def rate_gap_report(code: PolarCode, profile: BlockProfile | None = None) -> list[dict]:
    """Per block ``i`` and sign path ``j`` of length ``nu_i``: rates of
    ``C^(j)`` and of its derivative w.r.t. the first remaining variable,
    their gap, ``1/sqrt(s_i)``, and (BEC only) the exact capacity gap of the
    matching synthetic channels."""
    mono = code.monomials
    profile = profile or block_profile(mono)
    tree = None
    if code.channel.is_erasure:
        tree = synthetic_capacities_bec(code.channel.param, code.m)
    rows = []
    for i, s in enumerate(profile.sizes):
        nu = profile.nu(i)
        for path, sub in zip(_paths(nu), phi_set(mono, i, profile)):
            minus = partial_derivative_code(sub, 0)
            rate, rate_minus = sub.rate, minus.rate
            cap = cap_minus = cap_gap = None
            if tree is not None:
                cap = tree.capacity(path)
                cap_minus = tree.capacity(path + "-")
                cap_gap = cap - cap_minus
            rows.append({
                "block": i,
                "nu": nu,
                "s": s,
                "path": path or "root",
                "rate": rate,
                "rate_minus": rate_minus,
                "rate_gap": rate - rate_minus,
                "inv_sqrt_s": 1.0 / math.sqrt(s),
                "capacity": cap,
                "capacity_minus": cap_minus,
                "capacity_gap": cap_gap,
            })
    return rows


def unpolarized_count(z: np.ndarray, delta: float = 0.1) -> int:
    z = np.asarray(z)
    return int(np.count_nonzero((z >= delta) & (z <= 1.0 - delta)))


# ---------------------------------------------------------------- FER simulation


@dataclass(frozen=True)
class FERConfig:
    channel: ChannelModel
    m: int
    k: int
    trials: int
    seed: int = 0
    perms: str = "blta"
    n_perms: int = 4
    chunk_size: int = 1000
    workers: int = 1
    min_sum: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.n_perms < 1:
            raise ValueError("n_perms must be at least 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be at least 1")


def _block_permutation(profile: BlockProfile, rng: np.random.Generator) -> AffinePermutation:
    sigma = list(range(profile.m))
    for i in range(profile.l):
        block = list(profile.block_vars(i))
        shuffled = list(rng.permutation(block))
        for var, img in zip(block, shuffled):
            sigma[var] = int(img)
    return variable_permutation(sigma)


def build_ensemble(code: PolarCode, spec: str, count: int, rng: np.random.Generator,
                   max_draws: int = 10_000) -> list[AffinePermutation]:
    """Identity followed by up to ``count - 1`` distinct sampled automorphisms.

    ``spec`` is ``lta``, ``blta`` (full BLTA of the detected profile),
    ``varperm`` (variable permutations inside the detected blocks) or
    ``explicit:<file>`` with a JSON list of ``{"A": [...], "b": ...}``.
    """
    m = code.m
    if spec.startswith("explicit:"):
        with open(spec.split(":", 1)[1]) as fh:
            perms = [AffinePermutation.from_json(d) for d in json.load(fh)]
        return perms[:count] if count else perms
    if spec == "lta":
        draw: Callable[[], AffinePermutation] = lambda: sample_lta(m, rng)
    elif spec in ("blta", "varperm"):
        profile = block_profile(code.monomials)
        if spec == "blta":
            draw = lambda: sample_blta(profile, rng)
        else:
            draw = lambda: _block_permutation(profile, rng)
    else:
        raise ValueError(f"unknown permutation set {spec!r}")
    ensemble = [identity_perm(m)]
    seen = {identity_perm(m)}
    for _ in range(max_draws):
        if len(ensemble) >= count:
            break
        perm = draw()
        if perm not in seen:
            seen.add(perm)
            ensemble.append(perm)
    return ensemble


def _run_chunk(args) -> tuple[int, int, int, int]:
    code, perms, cfg, chunk = args
    size = min(cfg.chunk_size, cfg.trials - chunk * cfg.chunk_size)
    rng = np.random.default_rng([cfg.seed, 1, chunk])
    ch = cfg.channel
    if ch.is_erasure:
        # erasure SC success depends only on the pattern
        sent = np.zeros((size, code.n), dtype=np.uint8)
        mode = "erasure"
    else:
        sent = code.encode(rng.integers(0, 2, size=(size, code.k), dtype=np.uint8))
        mode = "llr"
    y = ch.transmit(sent, rng)
    sc_cw, sc_fail = sc_decode_batch(code.frozen_mask, y, mode, cfg.min_sum)
    ae_cw, ae_fail, _ = permutation_decode_batch(code, y, perms, mode, cfg.min_sum, waive_check=True)
    # a declared failure is a frame error even if the zero guesses happen to match
    sc_err = int((sc_fail | np.any(sc_cw != sent, axis=1)).sum())
    ae_err = int((ae_fail | np.any(ae_cw != sent, axis=1)).sum())
    return chunk, size, sc_err, ae_err


def wilson_interval(errors: int, trials: int) -> tuple[float, float]:
    from scipy.stats import binomtest

    ci = binomtest(errors, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def fer_simulate(cfg: FERConfig, code: PolarCode | None = None) -> dict:
    """Frame error rates of plain SC and ensemble SC over the same channel
    realizations.  Results depend only on the config, not on ``workers``."""
    code = code or construct_polar(cfg.channel, cfg.m, cfg.k)
    perms = build_ensemble(code, cfg.perms, cfg.n_perms, np.random.default_rng([cfg.seed, 0]))
    for perm in perms:
        if not is_automorphism(code.monomials, perm):
            raise ValueError("ensemble contains a non-automorphism")
    n_chunks = -(-cfg.trials // cfg.chunk_size)
    jobs = [(code, perms, cfg, c) for c in range(n_chunks)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_chunk, jobs))
    else:
        results = [_run_chunk(j) for j in jobs]
    trials = sum(r[1] for r in results)
    sc_err = sum(r[2] for r in results)
    ae_err = sum(r[3] for r in results)
    rows = []
    for name, errors in (("sc", sc_err), ("ae-sc", ae_err)):
        fer = errors / trials
        low, high = wilson_interval(errors, trials)
        rows.append({
            "decoder": name,
            "channel": str(cfg.channel),
            "m": cfg.m,
            "k": code.k,
            "ensemble": cfg.perms if name != "sc" else "identity",
            "n_perms": len(perms) if name != "sc" else 1,
            "trials": trials,
            "errors": errors,
            "fer": fer,
            "stderr": math.sqrt(fer * (1.0 - fer) / trials),
            "ci_low": low,
            "ci_high": high,
        })
    return {"config": _config_record(cfg), "permutations": [p.to_json() for p in perms], "rows": rows}


def _config_record(cfg: FERConfig) -> dict:
    rec = asdict(cfg)
    rec["channel"] = str(cfg.channel)
    rec.pop("workers")
    return rec


# ---------------------------------------------------------------- worked examples


def _fixture_erasure_sc() -> tuple[bool, str]:
    code = PolarCode.from_monomial_code(parse_code("1,x0,x1,x2", 3))
    y = SoftVector.from_erasure_str("e0ee0e00")
    plain = sc_decode(code, y)
    rev = variable_permutation([2, 1, 0])
    y_rev = SoftVector(apply_affine(rev, y.values), "erasure")
    flipped = sc_decode(code, y_rev)
    minus_plain = str(SoftVector(plain.root_minus, "erasure"))
    minus_rev = str(SoftVector(flipped.root_minus, "erasure"))
    ok = (plain.failed and minus_plain == "eeee" and flipped.success
          and minus_rev == "eee0" and not flipped.codeword.any())
    return ok, f"identity: y-={minus_plain} failed={plain.failed}; reversal: y-={minus_rev} failed={flipped.failed}"


def _fixture_erasure_ensemble() -> tuple[bool, str]:
    from .scdec import permutation_decode

    code = PolarCode.from_monomial_code(parse_code("1,x0,x1,x2", 3))
    y = SoftVector.from_erasure_str("e0ee0e00")
    out = permutation_decode(code, y, [identity_perm(3), variable_permutation([2, 1, 0])])
    ok = out.success and out.branch == 1 and not out.codeword.any()
    return ok, f"success={out.success} via permutation {out.branch}"


def _fixture_derivative_repetition() -> tuple[bool, str]:
    code = parse_code("1,x0,x1,x2", 3)
    kids = [partial_derivative_code(code, i) for i in range(3)]
    ok = all(k.gens == {0} and k.m == 2 for k in kids)
    return ok, "every partial derivative: " + ", ".join(str(k) for k in kids)


TREE_CODE = parse_code("1,x0,x1,x2,x3,x0*x2,x0*x3", 4)


def _fixture_tree() -> tuple[bool, str]:
    minus, plus = decompose(TREE_CODE, 0)
    level2 = [*decompose(minus, 0), *decompose(plus, 0)]
    want1 = [parse_code("1,x1,x2", 3), parse_code("1,x0,x1,x2", 3)]
    want2 = [parse_code("", 2), parse_code("1,x0,x1", 2), parse_code("1", 2), parse_code("1,x0,x1", 2)]
    ok = [minus, plus] == want1 and level2 == want2
    return ok, "level 1: " + " | ".join(map(str, [minus, plus])) + "; level 2: " + " | ".join(map(str, level2))


def _fixture_tree_invariance() -> tuple[bool, str]:
    profile = block_profile(TREE_CODE)
    swap = variable_permutation([0, 1, 3, 2])
    root_ok = is_automorphism(TREE_CODE, swap)
    level2 = phi_set(TREE_CODE, 0, profile)
    swap2 = variable_permutation([1, 0])
    leaves_ok = all(is_automorphism(c, swap2) for c in level2)
    ok = profile.sizes == (2, 1, 1) and verify_theorem2(TREE_CODE, profile) and root_ok and leaves_ok
    return ok, f"profile {profile}, theorem2={verify_theorem2(TREE_CODE, profile)}, x2<->x3 invariant at level 2: {leaves_ok}"


def _fixture_blta_limits() -> tuple[bool, str]:
    from .autgroup import blta_size

    lta = all(blta_size(BlockProfile.lta(m)) == 2 ** (m * (m - 1) // 2 + m) for m in range(1, 9))
    ga = all(
        blta_size(BlockProfile((m,))) == 2**m * math.prod(2**m - 2**j for j in range(m)) for m in range(1, 6)
    )
    return lta and ga, f"LTA limit ok={lta}, GA limit ok={ga}"


def _fixture_construction() -> tuple[bool, str]:
    code = construct_polar(ChannelModel("bec", 0.5), 3, 4)
    ok = sorted(code.frozen) == [0, 1, 2, 4] and code.monomials == parse_code("1,x0,x1,x2", 3)
    return ok, f"F={sorted(code.frozen)}, M={code.monomials}"


def _fixture_dimension() -> tuple[bool, str]:
    return TREE_CODE.dimension == 7, f"dimension {TREE_CODE.dimension}"


def _fixture_lta_absorption() -> tuple[bool, str]:
    from .scdec import sc_success_batch

    code = PolarCode.from_monomial_code(parse_code("1,x0,x1,x2", 3))
    patterns = np.array([[(p >> i) & 1 for i in range(8)] for p in range(256)], dtype=bool)
    base = sc_success_batch(code, patterns)
    rng = np.random.default_rng(7)
    ok = all(np.array_equal(sc_success_batch(code, patterns, sample_lta(3, rng)), base) for _ in range(20))
    return ok, "all 256 erasure patterns, 20 LTA elements"


WORKED_EXAMPLES = {
    "erasure-sc": _fixture_erasure_sc,
    "erasure-ensemble": _fixture_erasure_ensemble,
    "erasure-derivatives": _fixture_derivative_repetition,
    "construction-8-4": _fixture_construction,
    "tree-levels": _fixture_tree,
    "tree-invariance": _fixture_tree_invariance,
    "code-16-7-dimension": _fixture_dimension,
    "blta-size-limits": _fixture_blta_limits,
    "lta-absorbed": _fixture_lta_absorption,
}


def verify_paper_examples() -> list[tuple[str, bool, str]]:
    results = []
    for name, fn in WORKED_EXAMPLES.items():
        try:
            ok, detail = fn()
        except Exception as exc:  # report, keep going
            ok, detail = False, f"raised {exc!r}"
        results.append((name, bool(ok), detail))
    return results


# ---------------------------------------------------------------- output


def _plain(value):
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, tuple):
        return list(value)
    return value


def records_to_csv(records: Sequence[dict]) -> str:
    if not records:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(records[0].keys()), lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: _plain(v) for k, v in rec.items()})
    return buf.getvalue()


def records_to_json(obj) -> str:
    def default(value):
        out = _plain(value)
        if out is value:
            raise TypeError(f"cannot serialise {type(value).__name__}")
        return out

    return json.dumps(obj, indent=2, default=default) + "\n"


def format_table(records: Sequence[dict]) -> str:
    """Fixed-width text table for terminals."""
    if not records:
        return "(no rows)\n"
    cols = list(records[0].keys())
    cells = [[_fmt(rec[c]) for c in cols] for rec in records]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    value = _plain(value)
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def reliability_records(code: PolarCode) -> list[dict]:
    return [
        {"index": i, "score": float(code.reliabilities[i]), "frozen": int(i in code.frozen)}
        for i in range(code.n)
    ]
