"""The deficiency series, the derivative criterion and the block analyzer.

For a prefix ``A_t = (a_1..a_t)`` the deficiency is ``phi1(t) = S(A_t) - kappa1 t``
and the derivative-criterion ratio is ``<A_t> / sqrt(2)**S(A_t)``.  Ratio
comparisons are exact integer tests; everything that involves ``kappa1``,
logarithms or square roots is carried as a certified interval and escalated
in precision before being reported as undecided.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from qmark.cf import ContinuantAccumulator, accumulate_runs, as_array, as_quotients, continuants
from qmark.constants import Constants, constants
from qmark.errors import InvalidInput
from qmark.exact import Comparison, compare_ratio, compare_scaled_squares
from qmark.intervals import (
    DEFAULT_PRECISION,
    MAX_PRECISION,
    CertifiedInterval,
    Sign,
    decide_sign,
    enclose,
    log2_int,
)

DEFAULT_RATIO_THRESHOLD = Fraction(1, 2)

__all__ = [
    "BlockDecomposition",
    "BlockStats",
    "Constants",
    "DiagnosticSeries",
    "IndexReport",
    "block_decompose",
    "check_phi_gt_3w",
    "check_phi_positive",
    "constants",
    "derivative_ratio_compare",
    "increment_bounds",
    "increment_bounds_exact",
    "phi1_series",
]


# ---------------------------------------------------------------------------
# the deficiency series

@dataclass
class DiagnosticSeries:
    """Per-index statistics of a prefix; index ``t`` is 1-based (``t = 1..len``)."""

    prefix: tuple[int, ...]
    precision: int
    sums: list[int]
    phi1: list[CertifiedInterval]
    w: list[int]
    ratio_threshold: Fraction
    ratio_class: list[Comparison]

    def __len__(self):
        return len(self.prefix)

    def at(self, t: int) -> dict:
        if not 1 <= t <= len(self.prefix):
            raise IndexError(f"index {t} outside 1..{len(self.prefix)}")
        i = t - 1
        return {
            "t": t,
            "a": self.prefix[i],
            "S": self.sums[i],
            "phi1": self.phi1[i],
            "w": self.w[i],
            "ratio_class": self.ratio_class[i],
        }

    def records(self, digits: int = 20) -> list[dict]:
        out = []
        for t in range(1, len(self.prefix) + 1):
            rec = self.at(t)
            rec["phi1"] = rec["phi1"].to_json(digits)
            rec["ratio_class"] = rec["ratio_class"].value
            out.append(rec)
        return out

    def to_json(self, digits: int = 20) -> dict:
        return {
            "precision": self.precision,
            "ratio_threshold": str(self.ratio_threshold),
            "records": self.records(digits),
        }


def _phi1_at(total: int, t: int, bits: int) -> CertifiedInterval:
    return enclose(total, bits) - constants(bits).kappa1 * t


def phi1_series(
    prefix: Sequence[int],
    precision: int = DEFAULT_PRECISION,
    ratio_threshold=DEFAULT_RATIO_THRESHOLD,
) -> DiagnosticSeries:
    """Build the series for every index of a non-empty prefix.

    Each ``phi1(t)`` is evaluated directly as ``S(t) - t * kappa1`` rather
    than accumulated, so its width grows only linearly in ``t``.
    """
    prefix = as_quotients(prefix)
    if not prefix:
        raise InvalidInput("phi1_series needs a non-empty prefix")
    threshold = Fraction(ratio_threshold)
    sums, phi1, w, ratio = [], [], [], []
    total = big = 0
    acc = ContinuantAccumulator()
    for t, a in enumerate(prefix, start=1):
        total += a
        big += a > 1
        acc.push(a)
        sums.append(total)
        w.append(big)
        phi1.append(_phi1_at(total, t, precision))
        ratio.append(compare_ratio(acc.value, total, threshold))
    return DiagnosticSeries(prefix, precision, sums, phi1, w, threshold, ratio)


def derivative_ratio_compare(prefix: Sequence[int], c) -> Comparison:
    """Compare ``<A_t> / sqrt(2)**S(A_t)`` with ``c`` by an exact integer test."""
    prefix = as_quotients(prefix)
    c = Fraction(c)
    if c <= 0:
        raise InvalidInput("the threshold c must be positive")
    acc = accumulate_runs(prefix)
    return compare_ratio(int(acc.value), acc.total, c)


def increment_bounds_exact(prefix: Sequence[int], t: int) -> tuple[Fraction, Fraction]:
    """``<A_t><A_{t-1}> / 2^(S+4)`` and ``<A_t>^2 / 2^(S-2)`` as exact rationals.

    ``t = 1`` is allowed and uses the convention ``<A_0> = 1``.
    """
    prefix = as_quotients(prefix)
    if not 1 <= t <= len(prefix):
        raise IndexError(f"t = {t} outside 1..{len(prefix)}")
    q = continuants(prefix[:t])
    total = sum(prefix[:t])
    lower = Fraction(q[t] * q[t - 1], 1 << (total + 4))
    upper = Fraction(q[t] ** 2 * 4, 1 << total)
    return lower, upper


def increment_bounds(prefix: Sequence[int], t: int, precision: int = DEFAULT_PRECISION):
    """Enclosures of the two increment bounds; see :func:`increment_bounds_exact`."""
    lower, upper = increment_bounds_exact(prefix, t)
    return enclose(lower, precision), enclose(upper, precision)


# ---------------------------------------------------------------------------
# index checks

@dataclass
class IndexReport:
    """Outcome of a per-index check.

    ``failures`` are indices where the inequality is certainly false,
    ``undecided`` those where even ``max_precision`` bits could not decide.
    """

    name: str
    checked: int
    failures: list[int] = field(default_factory=list)
    undecided: list[int] = field(default_factory=list)

    @property
    def flagged(self) -> list[int]:
        return sorted(self.failures + self.undecided)

    @property
    def passed(self) -> bool:
        return not self.failures and not self.undecided

    def to_json(self) -> dict:
        return {
            "check": self.name,
            "checked": self.checked,
            "passed": self.passed,
            "failures": self.failures,
            "undecided": self.undecided,
        }


def _classify(report: IndexReport, t: int, first: CertifiedInterval, recompute, max_precision: int):
    sign = first.sign()
    if not sign.decided:
        sign, _ = decide_sign(recompute, 2 * first.precision, max_precision)
    if sign is Sign.POSITIVE:
        return
    if sign is Sign.UNDECIDED:
        report.undecided.append(t)
    else:
        report.failures.append(t)


def check_phi_positive(series: DiagnosticSeries, start: int = 1, max_precision: int = MAX_PRECISION) -> IndexReport:
    """Flag every ``t >= start`` where ``phi1(t) > 0`` is not certified."""
    report = IndexReport("phi1 > 0", 0)
    for t in range(max(start, 1), len(series) + 1):
        total = series.sums[t - 1]
        report.checked += 1
        _classify(report, t, series.phi1[t - 1], lambda b: _phi1_at(total, t, b), max_precision)
    return report


def check_phi_gt_3w(
    series: DiagnosticSeries,
    threshold: int = 12,
    start: int = 1,
    max_precision: int = MAX_PRECISION,
) -> IndexReport:
    """Flag every index where ``phi1(t) > 3 w(A_t)`` is not certified.

    The inequality is only claimed for prefixes whose elements are 1 or at
    least ``threshold``; other prefixes are rejected.
    """
    for i, a in enumerate(series.prefix):
        if 1 < a < threshold:
            raise InvalidInput(
                f"element #{i + 1} is {a}; the check needs every element to be 1 or >= {threshold}"
            )
    report = IndexReport(f"phi1 > 3w (threshold {threshold})", 0)
    for t in range(max(start, 1), len(series) + 1):
        total, w = series.sums[t - 1], series.w[t - 1]
        report.checked += 1
        _classify(report, t, series.phi1[t - 1] - 3 * w,
                  lambda b: _phi1_at(total, t, b) - 3 * w, max_precision)
    return report


# ---------------------------------------------------------------------------
# block analyzer

@dataclass
class BlockStats:
    """Statistics of block ``B_i``; ``i = N + 1`` is the leading segment."""

    i: int
    start: int  # first 1-based index of the block
    end: int  # last 1-based index of the block
    total: int
    max_element: int
    max_index: int  # 1-based index of the rightmost maximum
    phi1: CertifiedInterval
    c: CertifiedInterval
    f: CertifiedInterval
    f_short: CertifiedInterval
    log2_continuant: CertifiedInterval
    short_total: int

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def to_json(self, digits: int = 20) -> dict:
        return {
            "i": self.i,
            "start": self.start,
            "end": self.end,
            "length": self.length,
            "S": self.total,
            "M": self.max_element,
            "m": self.max_index,
            "phi1": self.phi1.to_json(digits),
            "c": self.c.to_json(digits),
            "f": self.f.to_json(digits),
            "f_short": self.f_short.to_json(digits),
        }


@dataclass
class BlockDecomposition:
    t0: int
    lam: Fraction
    N: int
    grid: list[int]  # t_0 > t_1 > ... > t_N
    blocks: list[BlockStats]  # B_1 .. B_N, B_{N+1}
    sumfkneg: list[Comparison]  # per i = 1..N; LESS means the inequality holds
    deviations: list[dict] | None
    mainlow: list[dict]
    precision: int

    def block(self, i: int) -> BlockStats:
        return self.blocks[i - 1]

    def to_json(self, digits: int = 20) -> dict:
        return {
            "t0": self.t0,
            "lambda": str(self.lam),
            "N": self.N,
            "grid": self.grid,
            "precision": self.precision,
            "blocks": [b.to_json(digits) for b in self.blocks],
            "sumfkneg": [
                {"i": i + 1, "comparison": c.value, "holds": c is Comparison.LESS}
                for i, c in enumerate(self.sumfkneg)
            ],
            "deviations": self.deviations,
            "mainlow": self.mainlow,
        }


def block_grid(t0: int, lam, N: int) -> list[int]:
    """``[t_0, t_1, ..., t_N]`` with ``t_i = lam^i t_0``; needs ``lam^N t_0`` integral."""
    lam = Fraction(lam)
    if not 0 < lam < 1:
        raise InvalidInput(f"lambda must lie in (0, 1), got {lam}")
    if N < 1:
        raise InvalidInput("N must be positive")
    if t0 < 1:
        raise InvalidInput("t0 must be positive")
    last = lam**N * t0
    if last.denominator != 1 or last < 1:
        raise InvalidInput(f"lambda^N * t0 = {last} is not a positive integer")
    # lam = p/q in lowest terms with q^N | t0, so every t_i is integral
    return [int(lam**i * t0) for i in range(N + 1)]


def _interval_sqrt_scale(t_prev: int, log_t0: CertifiedInterval) -> CertifiedInterval:
    return (log_t0 * t_prev).sqrt()


def block_decompose(
    prefix,
    t0: int,
    lam,
    N: int,
    epsilon=None,
    precision: int = DEFAULT_PRECISION,
    element_threshold: int | None = None,
    grid: Sequence[int] | None = None,
) -> BlockDecomposition:
    """Split ``A_{t0}`` along the grid ``t_i = lam^i t0`` and measure every block.

    Reports, per block, ``S``, the rightmost maximum, ``c_i = M_i / sqrt(t_{i-1} log t0)``
    and the exponents ``f_i, f'_i`` defined by ``<B> = sqrt(2)^(S(B) + f sqrt(t_{i-1} log t0))``.
    Three diagnostics are attached: the exact sign test behind the
    negativity of ``f'_i sqrt(..) + sum_{k>i} f_k sqrt(..)``, the per-block
    deviation ``|phi1(B_k)|`` against ``kappa1 (t_{k-1} - t_k) eps^5`` (only
    when ``epsilon`` is given) and the ratio of ``phi1(m_i)`` to the main
    lower estimate with its asymptotic correction factor set to 1.

    ``grid`` replaces the geometric grid by explicit boundaries
    ``t_0 > t_1 > .. > t_N >= 1`` (as produced by the superblock planner,
    whose ``t_k`` are only within half a pattern of ``lam^k t_0``).
    """
    arr = as_array(prefix)
    lam = Fraction(lam)
    if t0 > arr.size:
        raise InvalidInput(f"t0 = {t0} exceeds the prefix length {arr.size}")
    if grid is None:
        grid = block_grid(t0, lam, N)
    else:
        grid = [int(g) for g in grid]
        if len(grid) != N + 1 or grid[0] != t0:
            raise InvalidInput("an explicit grid must list t_0 = t0, t_1, .., t_N")
        if any(b >= a for a, b in zip(grid, grid[1:])) or grid[-1] < 1:
            raise InvalidInput("grid must be strictly decreasing and end at a positive index")
    if element_threshold is not None:
        bad = np.flatnonzero((arr[:t0] > 1) & (arr[:t0] < element_threshold))
        if bad.size:
            j = int(bad[0])
            raise InvalidInput(f"element #{j + 1} is {int(arr[j])}; expected 1 or >= {element_threshold}")
    arr = arr[:t0]
    bits = precision
    const = constants(bits)
    kappa1 = const.kappa1
    log_t0 = enclose(t0, bits).log()
    csum = np.concatenate(([0], np.cumsum(arr, dtype=np.int64)))

    bounds = [(grid[i], grid[i - 1]) for i in range(1, N + 1)] + [(0, grid[N])]
    blocks: list[BlockStats] = []
    block_acc: list[ContinuantAccumulator] = []
    short_acc: list[ContinuantAccumulator] = []
    for i, (lo, hi) in enumerate(bounds, start=1):
        seg = arr[lo:hi]
        total = int(csum[hi] - csum[lo])
        top = int(seg.max())
        rel = int(seg.size - 1 - np.argmax(seg[::-1] == top))
        max_index = lo + rel + 1
        t_prev = hi  # t_{i-1}, or t_N for the leading segment
        scale = _interval_sqrt_scale(t_prev, log_t0)
        acc = accumulate_runs(seg)
        short = accumulate_runs(seg[:rel])
        log2_b = log2_int(int(acc.value), bits)
        log2_s = log2_int(int(short.value), bits)
        blocks.append(
            BlockStats(
                i=i,
                start=lo + 1,
                end=hi,
                total=total,
                max_element=top,
                max_index=max_index,
                phi1=enclose(total, bits) - kappa1 * seg.size,
                c=enclose(top, bits) / scale,
                f=(2 * log2_b - total) / scale,
                f_short=(2 * log2_s - short.total) / scale,
                log2_continuant=log2_b,
                short_total=short.total,
            )
        )
        block_acc.append(acc)
        short_acc.append(short)

    # sign test: (<B'_i> prod_{k>i} <B_k>)^2 versus 2^(S(B'_i) + sum_{k>i} S(B_k))
    sumfkneg = []
    tail_prod, tail_sum = 1, 0
    tail = {}
    for k in range(N + 1, 0, -1):
        tail[k] = (tail_prod, tail_sum)
        tail_prod *= int(block_acc[k - 1].value)
        tail_sum += blocks[k - 1].total
    for i in range(1, N + 1):
        prod, s = tail[i]
        prod *= int(short_acc[i - 1].value)
        s += blocks[i - 1].short_total
        sumfkneg.append(compare_scaled_squares(prod, 0, 1, s))

    deviations = None
    if epsilon is not None:
        eps5 = enclose(Fraction(epsilon), bits) ** 5
        deviations = []
        for b in blocks:
            gap = kappa1 * b.length * eps5
            diff = b.phi1.abs() - gap
            sign = diff.sign()
            deviations.append({
                "i": b.i,
                "abs_phi1": b.phi1.abs().to_json(),
                "threshold": gap.to_json(),
                "nonuniform": {Sign.POSITIVE: True, Sign.NEGATIVE: False}.get(sign, None),
            })

    # phi1(m_i) against ((kappa1-1)(1-lam)/log2 * sum_{k>i} sqrt(lam)^(k-i)/c_k + c_i) sqrt(t_{i-1} log t0)
    alpha = (kappa1 - 1) / const.log2
    sqrt_lam = enclose(lam, bits).sqrt()
    mainlow = []
    for i in range(1, N + 1):
        b = blocks[i - 1]
        acc_sum = enclose(0, bits)
        for k in range(i + 1, N + 1):
            acc_sum = acc_sum + sqrt_lam ** (k - i) / blocks[k - 1].c
        rhs = (alpha * (1 - lam) * acc_sum + b.c) * _interval_sqrt_scale(grid[i - 1], log_t0)
        lhs = enclose(int(csum[b.max_index]), bits) - kappa1 * b.max_index
        mainlow.append({
            "i": i,
            "m": b.max_index,
            "phi1_at_m": lhs.to_json(),
            "estimate": rhs.to_json(),
            "ratio": (lhs / rhs).to_json(),
        })

    return BlockDecomposition(t0, lam, N, grid, blocks, sumfkneg, deviations, mainlow, bits)
