"""Lower bounds for continuants and for products with a fixed sum.

``<a_1..a_t> >= (1/2) phi^t prod (d_i / 4)`` over the elements ``d_i > 1``,
and ``min prod(R) >= beta ** floor(s / beta)`` over real sequences ``R``
with entries in ``[alpha, beta]`` and sum ``s``.  Each bound has an exact
brute-force counterpart to test it against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

from qmark.cf import PartialQuotients, as_quotients, continuant
from qmark.constants import constants
from qmark.errors import InvalidInput, LemmaViolation, ResourceLimit
from qmark.intervals import DEFAULT_PRECISION, MAX_PRECISION, CertifiedInterval, enclose

DEFAULT_SEARCH_CAP = 10**7


# ---------------------------------------------------------------------------
# continuant lower bound

@lru_cache(maxsize=4096)
def _phi_power(t: int, precision: int) -> CertifiedInterval:
    return constants(precision).phi ** t


def _bound_factor(seq: Sequence[int]) -> Fraction:
    prod, w = 1, 0
    for a in seq:
        if a > 1:
            prod *= a
            w += 1
    return Fraction(prod, 2 * 4**w)


def continuant_lower_bound(seq: Sequence[int], precision: int = DEFAULT_PRECISION) -> CertifiedInterval:
    """Enclosure of ``(1/2) phi^t prod_{a_i > 1} (a_i / 4)``."""
    seq = as_quotients(seq)
    if not seq:
        raise InvalidInput("continuant_lower_bound needs a non-empty prefix")
    return _phi_power(len(seq), precision) * _bound_factor(seq)


@dataclass
class LowerBoundCheck:
    seq: PartialQuotients
    precision: int  # bits at which the comparison was decided (or given up)
    continuant: int
    decided: bool

    @cached_property
    def bound(self) -> CertifiedInterval:
        return continuant_lower_bound(self.seq, self.precision)

    @property
    def slack(self) -> float:
        return self.continuant / float(self.bound.upper)


def check_continuant_lower_bound(
    seq: Sequence[int],
    precision: int = DEFAULT_PRECISION,
    max_precision: int = MAX_PRECISION,
) -> LowerBoundCheck:
    """Certify ``bound <= <seq>``; raises :class:`LemmaViolation` if it is false.

    The exact product of the upper endpoint of ``phi^t`` with the rational
    factor is compared with the exact continuant; when the continuant falls
    inside the enclosure the precision is doubled.
    """
    seq = as_quotients(seq)
    if not seq:
        raise InvalidInput("continuant_lower_bound needs a non-empty prefix")
    q = continuant(seq)
    factor = _bound_factor(seq)
    bits = precision
    while True:
        power = _phi_power(len(seq), bits)
        if power.upper * factor <= q:
            return LowerBoundCheck(seq, bits, q, True)
        if power.lower * factor > q:
            raise LemmaViolation(f"lower bound {power * factor} exceeds the continuant {q} of {seq}")
        if bits >= max_precision:
            return LowerBoundCheck(seq, bits, q, False)
        bits = min(2 * bits, max_precision)


# ---------------------------------------------------------------------------
# products with a fixed sum

@dataclass(frozen=True)
class MinProductInstance:
    s: Fraction
    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        for name in ("s", "alpha", "beta"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.alpha < 3:
            raise InvalidInput(f"alpha must be >= 3, got {self.alpha}")
        if self.beta <= self.alpha:
            raise InvalidInput(f"beta must exceed alpha, got beta={self.beta}, alpha={self.alpha}")
        if self.s < self.beta:
            raise InvalidInput(f"s must be >= beta, got s={self.s}, beta={self.beta}")

    @property
    def exponent(self) -> int:
        return math.floor(self.s / self.beta)


def min_product_bound_exact(inst: MinProductInstance) -> Fraction:
    return inst.beta**inst.exponent


def min_product_bound(inst: MinProductInstance, precision: int = DEFAULT_PRECISION) -> CertifiedInterval:
    """Enclosure of ``beta ** floor(s / beta)`` (exact for rational beta)."""
    return enclose(min_product_bound_exact(inst), precision)


@dataclass(frozen=True)
class OracleResult:
    instance: MinProductInstance
    grid_step: Fraction
    minimum: Fraction | None  # None when no grid sequence sums to s
    argmin: tuple[Fraction, ...] | None
    bound: Fraction
    slack: Fraction

    @property
    def feasible(self) -> bool:
        return self.minimum is not None

    @property
    def holds(self) -> bool:
        return self.minimum is None or self.minimum >= self.bound - self.slack

    def to_json(self) -> dict:
        return {
            "s": str(self.instance.s),
            "alpha": str(self.instance.alpha),
            "beta": str(self.instance.beta),
            "grid_step": str(self.grid_step),
            "minimum": None if self.minimum is None else str(self.minimum),
            "argmin": None if self.argmin is None else [str(r) for r in self.argmin],
            "bound": str(self.bound),
            "slack": str(self.slack),
            "holds": self.holds,
        }


class _ProductTable:
    """Minimum products by length ``k`` and total grid offset ``J``.

    Entries are ``alpha + j h`` for ``0 <= j <= G``; a length-``k`` sequence
    with offsets summing to ``J`` has sum ``k alpha + J h``.
    """

    def __init__(self, alpha: Fraction, beta: Fraction, step: Fraction, s_max: Fraction, cap: int):
        self.alpha, self.beta, self.step = alpha, beta, step
        self.G = math.floor((beta - alpha) / step)
        self.values = [alpha + j * step for j in range(self.G + 1)]
        self.k_max = math.floor(s_max / alpha)
        j_max = math.floor((s_max - alpha) / step) if s_max >= alpha else 0
        work = self.k_max * (j_max + 1) * (self.G + 1)
        if work > cap:
            raise ResourceLimit(f"product search needs {work} steps, above the cap {cap}")
        # table[k][J] = (product, last offset) with the smallest product
        self.table: list[dict[int, tuple[Fraction, int]]] = [{0: (Fraction(1), -1)}]
        for k in range(1, self.k_max + 1):
            row: dict[int, tuple[Fraction, int]] = {}
            limit = math.floor((s_max - k * alpha) / step)
            for J_prev, (prod, _) in self.table[k - 1].items():
                for j, v in enumerate(self.values):
                    J = J_prev + j
                    if J > limit:
                        break
                    cand = prod * v
                    best = row.get(J)
                    if best is None or cand < best[0]:
                        row[J] = (cand, j)
            self.table.append(row)

    def lookup(self, s: Fraction):
        best = None
        for k in range(1, self.k_max + 1):
            J = (s - k * self.alpha) / self.step
            if J < 0:
                break
            if J.denominator != 1 or int(J) not in self.table[k]:
                continue
            prod = self.table[k][int(J)][0]
            if best is None or prod < best[1]:
                best = (k, prod)
        if best is None:
            return None, None
        k, prod = best
        return prod, self._walk(k, int((s - k * self.alpha) / self.step))

    def _walk(self, k: int, J: int) -> tuple[Fraction, ...]:
        out = []
        while k:
            j = self.table[k][J][1]
            out.append(self.values[j])
            J -= j
            k -= 1
        return tuple(sorted(out))


def _oracle_slack(inst: MinProductInstance, step: Fraction, k: int) -> Fraction:
    return k * step * inst.beta ** max(k - 1, 0)


def min_product_oracle(inst: MinProductInstance, grid_step, cap: int = DEFAULT_SEARCH_CAP) -> OracleResult:
    """Exact minimum of ``prod(R)`` over grid sequences in ``[alpha, beta]`` summing to ``s``."""
    step = Fraction(grid_step)
    if step <= 0:
        raise InvalidInput("grid_step must be positive")
    table = _ProductTable(inst.alpha, inst.beta, step, inst.s, cap)
    return _result(inst, step, table)


def _result(inst: MinProductInstance, step: Fraction, table: _ProductTable) -> OracleResult:
    minimum, argmin = table.lookup(inst.s)
    k = len(argmin) if argmin else 0
    return OracleResult(inst, step, minimum, argmin, min_product_bound_exact(inst), _oracle_slack(inst, step, k))


def grid(lo, hi, step, include_lo: bool = True) -> list[Fraction]:
    lo, hi, step = Fraction(lo), Fraction(hi), Fraction(step)
    out, x = [], lo if include_lo else lo + step
    while x <= hi:
        out.append(x)
        x += step
    return out


@dataclass
class SweepReport:
    instances: int
    feasible: int
    violations: list[OracleResult]
    min_ratio: Fraction | None  # smallest minimum / bound seen

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "instances": self.instances,
            "feasible": self.feasible,
            "violations": [v.to_json() for v in self.violations],
            "min_ratio": None if self.min_ratio is None else str(self.min_ratio),
            "passed": self.passed,
        }


def sweep_min_product(
    alphas: Iterable,
    beta_max,
    s_max,
    step,
    cap: int = DEFAULT_SEARCH_CAP,
) -> SweepReport:
    """Check the product bound for every grid ``alpha``, ``alpha < beta <= beta_max``, ``beta <= s <= s_max``.

    One table per ``(alpha, beta)`` pair answers every ``s`` at once.
    """
    step, s_max = Fraction(step), Fraction(s_max)
    report = SweepReport(0, 0, [], None)
    for alpha in alphas:
        alpha = Fraction(alpha)
        for beta in grid(alpha, beta_max, step, include_lo=False):
            table = _ProductTable(alpha, beta, step, s_max, cap)
            for s in grid(beta, s_max, step):
                res = _result(MinProductInstance(s, alpha, beta), step, table)
                report.instances += 1
                if not res.feasible:
                    continue
                report.feasible += 1
                ratio = res.minimum / res.bound
                if report.min_ratio is None or ratio < report.min_ratio:
                    report.min_ratio = ratio
                if not res.holds:
                    report.violations.append(res)
    return report
