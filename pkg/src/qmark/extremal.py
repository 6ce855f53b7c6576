"""The superblock construction of a number with ``?'(x) = 0`` and small deficiency.

``x = [0; B^(0), B^(1), B^(2), ...]`` where ``B^(0)`` is a run of ones and
superblock ``B^(i)`` is the concatenation of blocks ``B_N, .., B_1``, block
``B_k`` being ``r_k`` copies of the pattern ``(m_k, 1 x n_k)``.  The integers
``m_k, n_k, t_k`` are chosen from three windows driven by a modified
equalizing sequence ``d_k``:

    d_k L <= m_k <= d_k L (1 + eps^4)                  with L = sqrt(T log T)
    d_k L / (kappa1 - 1) <= n_k <= same * (1 + eps^4)
    log2(T) (1 + eps/8 - eps^3) <= m_k + n_k - kappa1 (n_k + 1) <= log2(T) (1 + eps/8 + eps^3)

and ``t_k`` is the integer nearest ``lam^k t_0`` with ``(n_k + 1) | (t_{k-1} - t_k)``.
Every window membership is certified with interval arithmetic, and the
resulting prefix is checked with exact integer tests.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np

from qmark.cf import ContinuantAccumulator, as_array, fibonacci_pair
from qmark.constants import constants
from qmark.errors import Infeasible, InvalidInput
from qmark.exact import Comparison, compare_ratio, compare_scaled_squares
from qmark.intervals import DEFAULT_PRECISION, CertifiedInterval, Sign, enclose
from qmark.minimax import MinimaxInstance, modified_sequence


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"

    def __bool__(self):
        return self is Verdict.PASS


# ---------------------------------------------------------------------------
# parameters

def _ceil(value: CertifiedInterval) -> int:
    """Smallest integer certainly >= the enclosed value."""
    return math.ceil(value.upper)


def _floor(value: CertifiedInterval) -> int:
    """Largest integer certainly <= the enclosed value."""
    return math.floor(value.lower)


def _exact_floor(value: CertifiedInterval) -> int | None:
    lo, hi = math.floor(value.lower), math.floor(value.upper)
    return lo if lo == hi else None


@dataclass(frozen=True)
class ConstructionParams:
    epsilon: Fraction
    lam: Fraction
    N: int
    T1: int | None = None
    M: int | None = None
    P: int | None = None
    precision: int = DEFAULT_PRECISION
    mode: str = "override"  # "formula" when N = 2 M (P + 2) from derive_constants
    notes: tuple[str, ...] = ()

    @property
    def alpha(self) -> CertifiedInterval:
        """``(kappa1 - 1) / log 2 * (1 + eps/8)``."""
        c = constants(self.precision)
        return (c.kappa1 - 1) / c.log2 * (1 + self.epsilon / 8)

    @property
    def eta(self) -> CertifiedInterval:
        return 1 / self.alpha

    def with_T1(self, T1: int) -> "ConstructionParams":
        return ConstructionParams(self.epsilon, self.lam, self.N, T1, self.M, self.P,
                                  self.precision, self.mode, self.notes)

    def to_json(self) -> dict:
        return {
            "epsilon": str(self.epsilon),
            "lambda": str(self.lam),
            "N": self.N,
            "T1": self.T1,
            "M": self.M,
            "P": self.P,
            "precision": self.precision,
            "mode": self.mode,
            "notes": list(self.notes),
        }


def _validate_eps_lam(epsilon, lam) -> tuple[Fraction, Fraction]:
    eps, lam = Fraction(epsilon), Fraction(lam)
    if not 0 < eps < 1:
        raise InvalidInput(f"epsilon must lie in (0, 1), got {eps}")
    if not 0 < lam < 1:
        raise InvalidInput(f"lambda must lie in (0, 1), got {lam}")
    return eps, lam


def _M_and_P(eps: Fraction, lam: Fraction, precision: int) -> tuple[int, int]:
    bits = precision
    M = P = None
    while M is None or P is None:
        if bits > 1 << 16:
            raise InvalidInput("cannot resolve M and P")
        M_val = 10 * enclose(eps, bits).log() / enclose(lam, bits).log()
        P_val = enclose(6, bits).log() / enclose(1 + eps * eps, bits).log()
        if M is None:
            c = -_exact_floor(-M_val) if _exact_floor(-M_val) is not None else None
            guess = round(float(M_val.mid))
            # an exact integer value shows up as an enclosure straddling it
            M = guess if eps**10 == lam**guess else c
        if P is None:
            f = _exact_floor(P_val)
            guess = round(float(P_val.mid))
            P = guess + 1 if (1 + eps * eps) ** guess == 6 else (None if f is None else f + 1)
        bits *= 2
    return M, P


def derive_constants(epsilon, lam, precision: int = DEFAULT_PRECISION) -> ConstructionParams:
    """``M = ceil(10 log eps / log lam)``, ``P = floor(log 6 / log(1 + eps^2)) + 1``, ``N = 2 M (P + 2)``.

    Requires ``1 - eps^6 < lam < 1``.
    """
    eps, lam = _validate_eps_lam(epsilon, lam)
    if not lam > 1 - eps**6:
        raise InvalidInput(f"lambda must exceed 1 - eps^6 = {1 - eps**6}, got {lam}")
    M, P = _M_and_P(eps, lam, precision)
    return ConstructionParams(eps, lam, 2 * M * (P + 2), None, M, P, precision, "formula",
                              ("M rounded up to an integer; P and N as defined",))


def override_params(epsilon, lam, N: int, T1: int | None = None, precision: int = DEFAULT_PRECISION) -> ConstructionParams:
    """User-chosen sizes; ``lam`` need not satisfy the ``1 - eps^6`` window."""
    eps, lam = _validate_eps_lam(epsilon, lam)
    if N < 1:
        raise InvalidInput("N must be positive")
    notes = ["override mode: N chosen by the caller"]
    if not lam > 1 - eps**6:
        notes.append(f"lambda is outside (1 - eps^6, 1); M and P are reported for reference only")
    M, P = _M_and_P(eps, lam, precision)
    return ConstructionParams(eps, lam, N, T1, M, P, precision, "override", tuple(notes))


def check_T1(params: ConstructionParams, T1: int) -> None:
    """``lam^N T1`` must be a positive integer and exceed ``T1 / log T1``."""
    if T1 < 2:
        raise Infeasible("T1 must be at least 2", constraint="T1 >= 2")
    head = params.lam**params.N * T1
    if head.denominator != 1 or head < 1:
        q = (params.lam**params.N).denominator
        raise Infeasible(f"lambda^N * T1 = {head} is not a positive integer",
                         constraint="lambda^N T1 integral", suggestion=f"use a multiple of {q}")
    cond = enclose(params.lam**params.N, params.precision) * enclose(T1, params.precision).log() - 1
    if not cond.is_positive():
        raise Infeasible("lambda^N T1 > T1 / log T1 is not certified",
                         constraint="lambda^N T1 > T1 / log T1")


def d_sequence(params: ConstructionParams) -> list[CertifiedInterval]:
    """The recurrence with ``d_1 = d_2 = sqrt((1 - lam) lam / eta)`` for the construction's ``eta``."""
    return modified_sequence(MinimaxInstance(params.N, params.lam, params.eta), params.precision)


# ---------------------------------------------------------------------------
# patterns

def pattern_continuant(m: int, n: int) -> int:
    """``<m, 1 x n> = m F_{n+1} + F_n``."""
    fn, fn1 = fibonacci_pair(n)
    return m * fn1 + fn


def verify_pattern(m: int, n: int) -> Verdict:
    """Exact test of ``2 <m, 1 x n> / sqrt(2)^(m+n) < 1/2``, i.e. ``16 <m,1 x n>^2 < 2^(m+n)``."""
    if m < 1 or n < 0:
        raise InvalidInput("need m >= 1 and n >= 0")
    q = pattern_continuant(m, n)
    return Verdict.PASS if compare_scaled_squares(q, 4, 1, m + n) is Comparison.LESS else Verdict.FAIL


def pattern_log2_slack(m: int, n: int) -> float:
    """``(m + n) - 4 - 2 log2 <m, 1 x n>``; positive exactly when the pattern passes (up to rounding)."""
    phi = (1 + 5**0.5) / 2
    # <m, 1 x n> = (m phi + 1) phi^n / sqrt5 up to a term below 1
    est = math.log2(m * phi + 1) + n * math.log2(phi) - 0.5 * math.log2(5)
    return (m + n) - 4 - 2 * est


def pattern_crossover(n: int, m_max: int | None = None) -> int | None:
    """Smallest ``m >= 3`` with ``verify_pattern(m, n)`` passing.

    For ``m >= 3`` the ratio ``<m,1 x n>^2 / 2^(m+n)`` strictly decreases in
    ``m`` (one more unit multiplies the numerator by less than 2), so the
    passing set is ``[crossover, inf)`` and binary search is exact.
    Returns None if nothing up to ``m_max`` passes.
    """
    lo, hi = 3, 4
    while not verify_pattern(hi, n):
        if m_max is not None and hi > m_max:
            return None
        lo, hi = hi, 2 * hi
    if verify_pattern(lo, n):
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if verify_pattern(mid, n):
            hi = mid
        else:
            lo = mid
    if m_max is not None and hi > m_max:
        return None
    return hi


# ---------------------------------------------------------------------------
# planning

@dataclass(frozen=True)
class BlockPlan:
    k: int
    m: int
    n: int
    t: int  # t_k
    repeats: int  # r_k = (t_{k-1} - t_k) / (n_k + 1)
    target: Fraction  # lam^k t_0

    @property
    def length(self) -> int:
        return self.repeats * (self.n + 1)

    def to_json(self) -> dict:
        return {"k": self.k, "m": self.m, "n": self.n, "t": self.t, "repeats": self.repeats,
                "target": str(self.target), "pattern_slack_log2": round(pattern_log2_slack(self.m, self.n), 6)}


@dataclass
class SuperblockPlan:
    i: int
    T: int
    blocks: list[BlockPlan]  # k = 1..N
    selection: str
    precision: int

    @property
    def grid(self) -> list[int]:
        return [self.T] + [b.t for b in self.blocks]

    @property
    def t_N(self) -> int:
        return self.blocks[-1].t

    @property
    def length(self) -> int:
        return self.T - self.t_N

    def to_json(self) -> dict:
        return {"i": self.i, "T": self.T, "selection": self.selection, "precision": self.precision,
                "length": self.length, "blocks": [b.to_json() for b in self.blocks]}


@dataclass
class _Windows:
    m_lo: int
    m_hi: int
    n_lo: int
    n_hi: int
    j_lo: CertifiedInterval  # joint window bounds on m + n - kappa1 (n + 1)
    j_hi: CertifiedInterval


def _windows(T: int, d_k: CertifiedInterval, params: ConstructionParams, bits: int) -> _Windows:
    c = constants(bits)
    eps = params.epsilon
    L = (enclose(T, bits) * enclose(T, bits).log()).sqrt()
    lg = enclose(T, bits).log() / c.log2
    grow = 1 + eps**4
    m_base = d_k * L
    n_base = d_k * L / (c.kappa1 - 1)
    return _Windows(
        _ceil(m_base), _floor(m_base * grow),
        _ceil(n_base), _floor(n_base * grow),
        lg * (1 + eps / 8 - eps**3), lg * (1 + eps / 8 + eps**3),
    )


def _joint_range(n: int, w: _Windows, kappa1: CertifiedInterval) -> tuple[int, int]:
    shift = kappa1 * (n + 1) - n
    return max(w.m_lo, _ceil(w.j_lo + shift)), min(w.m_hi, _floor(w.j_hi + shift))


SCAN_LIMIT = 4096


def _n_range(w: _Windows, kappa1: CertifiedInterval) -> range:
    """The ``n`` for which the joint window can meet the ``m`` window at all."""
    k = kappa1 - 1
    lo = max(w.n_lo, _floor((w.m_lo - w.j_hi - kappa1) / k))
    hi = min(w.n_hi, _ceil((w.m_hi - w.j_lo - kappa1) / k))
    return range(lo, hi + 1)


def _choose(k: int, w: _Windows, kappa1: CertifiedInterval, selection: str) -> tuple[int, int]:
    best = None
    for n in _n_range(w, kappa1)[:SCAN_LIMIT]:
        lo, hi = _joint_range(n, w, kappa1)
        if lo > hi:
            continue
        if selection == "smallest":
            return lo, n
        # the pattern slack grows with m for m >= 3, so take the top of the range
        score = pattern_log2_slack(hi, n)
        if best is None or score > best[0]:
            best = (score, hi, n)
    if best is None:
        raise LookupError
    return best[1], best[2]


def _float_feasible(T: float, d: list[float], eps: float) -> bool:
    k1 = 2 * math.log((1 + 5**0.5) / 2) / math.log(2)
    L = math.sqrt(T * math.log(T))
    lg = math.log2(T)
    j_lo, j_hi = lg * (1 + eps / 8 - eps**3), lg * (1 + eps / 8 + eps**3)
    for dk in d:
        m_lo, m_hi = math.ceil(dk * L), math.floor(dk * L * (1 + eps**4))
        n_lo, n_hi = math.ceil(dk * L / (k1 - 1)), math.floor(dk * L / (k1 - 1) * (1 + eps**4))
        n_lo = max(n_lo, math.floor((m_lo - j_hi - k1) / (k1 - 1)))
        n_hi = min(n_hi, math.ceil((m_hi - j_lo - k1) / (k1 - 1)))
        ok = False
        for n in range(n_lo, min(n_hi, n_lo + SCAN_LIMIT) + 1):
            lo = max(m_lo, math.ceil(j_lo + k1 * (n + 1) - n))
            hi = min(m_hi, math.floor(j_hi + k1 * (n + 1) - n))
            if lo <= hi:
                ok = True
                break
        if not ok:
            return False
    return True


def estimate_min_T(params: ConstructionParams, d: Sequence[CertifiedInterval] | None = None) -> int | None:
    """Float estimate of the smallest power of two whose windows are all non-empty."""
    d = d if d is not None else d_sequence(params)
    df = [float(v) for v in d]
    for e in range(4, 1000):
        if _float_feasible(float(2**e), df, float(params.epsilon)):
            return 2**e
    return None


def plan_superblock(
    T: int,
    d: Sequence[CertifiedInterval],
    params: ConstructionParams,
    i: int = 1,
    selection: str = "slack",
) -> SuperblockPlan:
    """Choose ``m_k, n_k, t_k`` for ``k = 1..N`` inside the certified windows.

    ``selection="slack"`` takes, among feasible pairs, the one with the
    largest estimated pattern slack (top of the ``m`` range, best ``n``);
    ``selection="smallest"`` takes the smallest ``n`` and then the smallest ``m``.
    """
    if selection not in ("slack", "smallest"):
        raise InvalidInput(f"unknown selection rule {selection!r}")
    if len(d) != params.N:
        raise InvalidInput(f"need {params.N} d-values, got {len(d)}")
    bits = params.precision
    kappa1 = constants(bits).kappa1
    blocks = []
    t_prev = T
    for k in range(1, params.N + 1):
        w = _windows(T, d[k - 1], params, bits)
        try:
            m, n = _choose(k, w, kappa1, selection)
        except LookupError:
            which = ("m window" if w.m_lo > w.m_hi else "n window" if w.n_lo > w.n_hi else "joint window")
            raise Infeasible(
                f"no integer (m_{k}, n_{k}) satisfies all three windows at T = {T} ({which} is the first to fail)",
                constraint=f"k={k}: {which}",
                suggestion=estimate_min_T(params, d),
            ) from None
        target = params.lam**k * T
        step = n + 1
        r = round((t_prev - target) / step)
        t_k = t_prev - r * step
        if r < 1 or t_k < 1:
            raise Infeasible(f"block {k} would hold {r} patterns of length {step} at T = {T}",
                             constraint=f"k={k}: repeats >= 1", suggestion=estimate_min_T(params, d))
        blocks.append(BlockPlan(k, m, n, t_k, r, target))
        t_prev = t_k
    return SuperblockPlan(i, T, blocks, selection, bits)


@dataclass
class PlanCertificate:
    m_window: list[bool]
    n_window: list[bool]
    joint_window: list[bool]
    t_rounding: list[bool]
    divisibility: list[bool]

    @property
    def passed(self) -> bool:
        return all(self.m_window + self.n_window + self.joint_window + self.t_rounding + self.divisibility)

    def to_json(self) -> dict:
        return {"m_window": self.m_window, "n_window": self.n_window, "joint_window": self.joint_window,
                "t_rounding": self.t_rounding, "divisibility": self.divisibility, "passed": self.passed}


def certify_plan(plan: SuperblockPlan, d: Sequence[CertifiedInterval], params: ConstructionParams) -> PlanCertificate:
    """Re-check the four window conditions of every block independently of the planner."""
    bits = plan.precision
    c = constants(bits)
    eps = params.epsilon
    L = (enclose(plan.T, bits) * enclose(plan.T, bits).log()).sqrt()
    lg = enclose(plan.T, bits).log() / c.log2
    cert = PlanCertificate([], [], [], [], [])
    t_prev = plan.T
    for b in plan.blocks:
        dk = d[b.k - 1]
        m_lo, n_lo = dk * L, dk * L / (c.kappa1 - 1)
        grow = 1 + eps**4
        cert.m_window.append((b.m - m_lo).sign() in (Sign.POSITIVE, Sign.ZERO)
                             and (m_lo * grow - b.m).sign() in (Sign.POSITIVE, Sign.ZERO))
        cert.n_window.append((b.n - n_lo).sign() in (Sign.POSITIVE, Sign.ZERO)
                             and (n_lo * grow - b.n).sign() in (Sign.POSITIVE, Sign.ZERO))
        joint = b.m + b.n - c.kappa1 * (b.n + 1)
        cert.joint_window.append((joint - lg * (1 + eps / 8 - eps**3)).sign() in (Sign.POSITIVE, Sign.ZERO)
                                 and (lg * (1 + eps / 8 + eps**3) - joint).sign() in (Sign.POSITIVE, Sign.ZERO))
        cert.t_rounding.append(abs(b.t - b.target) <= Fraction(b.n + 1, 2))
        cert.divisibility.append((t_prev - b.t) % (b.n + 1) == 0 and (t_prev - b.t) // (b.n + 1) == b.repeats)
        t_prev = b.t
    return cert


def emit_blocks(plan: SuperblockPlan, dtype=np.int32) -> np.ndarray:
    """Blocks ``B_N, .., B_1``, block ``k`` being ``r_k`` copies of ``(m_k, 1 x n_k)``."""
    parts = []
    for b in reversed(plan.blocks):
        pattern = np.ones(b.n + 1, dtype=dtype)
        pattern[0] = b.m
        parts.append(np.tile(pattern, b.repeats))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=dtype)


def phi_profile(plan: SuperblockPlan, precision: int = DEFAULT_PRECISION) -> list[Fraction | float]:
    """``(sum_{i>=k} r_i phi1(pattern_i) + m_k) / (kappa4 sqrt(T log T))`` for ``k = 1..N``.

    The numerator is the exact value of ``phi1`` at the last large element
    of block ``k`` within the superblock (without ``B^(0)``), so the maximum
    of this profile is the superblock's maximal deficiency ratio.
    """
    c = constants(precision)
    scale = c.kappa4 * (enclose(plan.T, precision) * enclose(plan.T, precision).log()).sqrt()
    out = []
    for k in range(1, len(plan.blocks) + 1):
        tail = plan.blocks[k - 1:]
        total = sum(b.repeats * (b.m + b.n) for b in tail) - (plan.blocks[k - 1].n)
        count = sum(b.repeats * (b.n + 1) for b in tail) - plan.blocks[k - 1].n
        out.append(float((total - c.kappa1 * count) / scale))
    return out


def patterns_of(plan: SuperblockPlan) -> list[tuple[int, int, int]]:
    """``(m, n, repeats)`` in emission order."""
    return [(b.m, b.n, b.repeats) for b in reversed(plan.blocks)]


# ---------------------------------------------------------------------------
# the full construction

@dataclass
class Construction:
    params: ConstructionParams
    d: list[CertifiedInterval]
    plans: list[SuperblockPlan]
    initial_length: int  # length of the all-ones segment B^(0)
    offsets: list[int]  # 0-based start of each superblock in the prefix
    prefix: np.ndarray

    @property
    def x_prime(self) -> np.ndarray:
        """The prefix without ``B^(0)``."""
        return self.prefix[self.initial_length:]

    def superblock_ends(self, without_initial: bool = False) -> list[int]:
        """1-based index of the last element of each superblock."""
        shift = self.initial_length if without_initial else 0
        return [off + p.length - shift for off, p in zip(self.offsets, self.plans)]

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "d": [v.to_json(12) for v in self.d],
            "initial_length": self.initial_length,
            "offsets": self.offsets,
            "length": int(self.prefix.size),
            "plans": [p.to_json() for p in self.plans],
        }


def construct(params: ConstructionParams, superblocks: int = 1, selection: str = "slack",
              initial_length: int | None = None) -> Construction:
    """Plan and emit ``B^(0), B^(1), .., B^(superblocks)``.

    ``T_1 = params.T1`` and ``T_i = floor(T_{i-1} / lam^N)``.  ``B^(0)`` has
    length ``t_N`` of the first plan unless ``initial_length`` is given;
    later superblocks are simply concatenated and their offsets recorded.
    """
    if params.T1 is None:
        raise InvalidInput("T1 is required")
    if superblocks < 1:
        raise InvalidInput("at least one superblock is required")
    check_T1(params, params.T1)
    d = d_sequence(params)
    plans, parts, offsets = [], [], []
    T = params.T1
    for i in range(1, superblocks + 1):
        plans.append(plan_superblock(T, d, params, i, selection))
        T = math.floor(T / params.lam**params.N)
    head = plans[0].t_N if initial_length is None else int(initial_length)
    parts.append(np.ones(head, dtype=np.int32))
    pos = head
    for plan in plans:
        offsets.append(pos)
        block = emit_blocks(plan)
        parts.append(block)
        pos += block.size
    return Construction(params, d, plans, head, offsets, np.concatenate(parts))


# ---------------------------------------------------------------------------
# verification

@dataclass
class PhiBoundReport:
    checkpoint: int  # the maximum runs over nu <= checkpoint
    normalizer: int  # T in sqrt(T log T); equals checkpoint unless overridden
    max_index: int
    max_phi: CertifiedInterval
    ratio: CertifiedInterval  # max phi / (kappa4 sqrt(T log T))
    bound_holds: bool | None  # max phi <= (sqrt2 + eps) kappa4 sqrt(T log T); None if undecided
    target_ratio: CertifiedInterval  # sqrt(2) + 2 eps / 3
    target_holds: bool | None

    def to_json(self, digits: int = 12) -> dict:
        return {
            "checkpoint": self.checkpoint,
            "normalizer": self.normalizer,
            "argmax": self.max_index,
            "max_phi1": self.max_phi.to_json(digits),
            "ratio": self.ratio.to_json(digits),
            "bound_holds": self.bound_holds,
            "target_ratio": self.target_ratio.to_json(digits),
            "ratio_within_target": self.target_holds,
        }


def _le(diff: CertifiedInterval) -> bool | None:
    """True if ``diff >= 0`` certainly, False if ``diff < 0`` certainly."""
    sign = diff.sign()
    if sign in (Sign.POSITIVE, Sign.ZERO):
        return True
    if sign is Sign.NEGATIVE:
        return False
    return None


def verify_phi_bound(prefix, checkpoints: Sequence[int], eps, kappa4: CertifiedInterval | None = None,
                     precision: int = DEFAULT_PRECISION,
                     normalize_by: Sequence[int] | None = None) -> list[PhiBoundReport]:
    """For each checkpoint ``T``: the maximum of ``phi1(nu)`` over ``nu <= T`` against
    ``(sqrt2 + eps) kappa4 sqrt(T log T)``.

    ``normalize_by`` replaces ``T`` in the normalization (one value per
    checkpoint); it is used when the prefix is a suffix of the real one,
    e.g. the construction without its initial run of ones.

    The maximum is located in float64 and then certified: every index whose
    float value is within a margin far above the float error bound of the
    true maximum is re-evaluated with intervals.
    """
    arr = as_array(prefix)
    eps = Fraction(eps)
    c = constants(precision)
    kappa4 = kappa4 if kappa4 is not None else c.kappa4
    k1f = float(c.kappa1)
    csum = np.cumsum(arr, dtype=np.int64)
    if normalize_by is not None and len(normalize_by) != len(checkpoints):
        raise InvalidInput("normalize_by needs one value per checkpoint")
    reports = []
    for j, T in enumerate(checkpoints):
        if not 1 <= T <= arr.size:
            raise InvalidInput(f"checkpoint {T} outside 1..{arr.size}")
        nu = np.arange(1, T + 1, dtype=np.float64)
        phi = csum[:T].astype(np.float64) - k1f * nu
        top = float(phi.max())
        margin = 64 * np.finfo(float).eps * (k1f * T + float(csum[T - 1])) + 1e-9
        cand = np.flatnonzero(phi >= top - margin)
        best, best_idx = None, None
        for idx in cand.tolist():
            v = enclose(int(csum[idx]), precision) - c.kappa1 * (idx + 1)
            if best is None or v.upper > best.upper:
                best, best_idx = v, idx + 1
        T_norm = T if normalize_by is None else int(normalize_by[j])
        if T_norm < 2:
            raise InvalidInput("the normalizing index must be at least 2")
        scale = kappa4 * (enclose(T_norm, precision) * enclose(T_norm, precision).log()).sqrt()
        ratio = best / scale
        root2 = c.sqrt2
        bound = (root2 + eps) * scale
        target = root2 + Fraction(2, 3) * eps
        reports.append(PhiBoundReport(T, T_norm, best_idx, best, ratio, _le(bound - best), target, _le(target - ratio)))
    return reports


def default_sample_points(prefix) -> list[int]:
    """1-based ``t`` with ``a_t = 1`` and ``a_{t+1} > 1``, plus the last index if it ends a run of ones."""
    arr = as_array(prefix)
    ones = arr == 1
    idx = np.flatnonzero(ones[:-1] & ~ones[1:]) + 1
    out = idx.tolist()
    if arr.size and ones[-1]:
        out.append(int(arr.size))
    return out


@dataclass
class RatioDecayReport:
    threshold: Fraction
    samples: list[int]
    below: list[bool]  # ratio < threshold at each sample
    log2_ratios: list[float]  # approximate, from the exact integers
    non_increasing: bool
    increases: list[int]  # samples where the ratio went up
    milestones: dict = field(default_factory=dict)

    @property
    def all_below(self) -> bool:
        return all(self.below)

    @property
    def first_above(self) -> int | None:
        return next((s for s, b in zip(self.samples, self.below) if not b), None)

    @property
    def passed(self) -> bool:
        return self.all_below and self.non_increasing

    def to_json(self) -> dict:
        return {
            "threshold": str(self.threshold),
            "samples": len(self.samples),
            "all_below_threshold": self.all_below,
            "first_sample_above": self.first_above,
            "non_increasing": self.non_increasing,
            "increases": self.increases[:20],
            "log2_ratio_first": self.log2_ratios[0] if self.log2_ratios else None,
            "log2_ratio_last": self.log2_ratios[-1] if self.log2_ratios else None,
            "log2_ratio_max": max(self.log2_ratios) if self.log2_ratios else None,
            "milestones": self.milestones,
        }


def _log2_ratio(q, total: int) -> float:
    b = q.bit_length()
    shift = max(0, b - 60)
    return math.log2(int(q >> shift)) + shift - total / 2


def verify_ratio_decay(prefix, sample_points: Sequence[int] | None = None, threshold=Fraction(1, 2),
                       milestones: Sequence[int] = ()) -> RatioDecayReport:
    """Exact comparison of ``<A_t>^2`` with ``threshold^2 2^S(A_t)`` at each sample ``t``.

    Consecutive samples are also compared exactly with each other, so
    ``non_increasing`` is a certificate, not an estimate.  Runs of ones are
    crossed with one Fibonacci step each.
    """
    arr = as_array(prefix)
    threshold = Fraction(threshold)
    samples = sorted(set(default_sample_points(arr) if sample_points is None else sample_points))
    if samples and not 1 <= samples[0] <= samples[-1] <= arr.size:
        raise InvalidInput("sample points must lie inside the prefix")
    wanted = set(milestones)
    acc = ContinuantAccumulator(gmpy2.mpz(0), gmpy2.mpz(1))
    report = RatioDecayReport(threshold, samples, [], [], True, [])
    nonunit = np.flatnonzero(arr != 1)
    pos = 0  # elements consumed so far
    ptr = 0  # next entry of nonunit
    prev = None
    for t in samples:
        while pos < t:
            # next element > 1 at or after pos
            while ptr < nonunit.size and nonunit[ptr] < pos:
                ptr += 1
            nxt = int(nonunit[ptr]) if ptr < nonunit.size else arr.size
            if nxt > pos:
                run = min(nxt, t) - pos
                fn, fnm1 = gmpy2.fib2(run)
                acc.push_ones(run, (fn, fn + fnm1))
                pos += run
            else:
                acc.push(int(arr[pos]))
                pos += 1
        q, total = acc.value, acc.total
        report.below.append(compare_ratio(q, total, threshold) is Comparison.LESS)
        report.log2_ratios.append(_log2_ratio(q, total))
        if prev is not None:
            pq, ptotal = prev
            # ratio_t > ratio_prev  <=>  q^2 2^ptotal > pq^2 2^total
            if compare_scaled_squares(q, ptotal, pq, total) is Comparison.GREATER:
                report.non_increasing = False
                report.increases.append(t)
        prev = (q, total)
        if t in wanted:
            report.milestones[str(t)] = {"log2_ratio": report.log2_ratios[-1], "below": report.below[-1]}
    return report


@dataclass
class ConstructionReport:
    plan_certificates: list[PlanCertificate]
    patterns: list[dict]
    ratio_decay: RatioDecayReport
    profiles: list[list[float]]
    phi_bound_full: list[PhiBoundReport]
    phi_bound_without_initial: list[PhiBoundReport]

    @property
    def patterns_pass(self) -> bool:
        return all(p["verdict"] == Verdict.PASS.value for p in self.patterns)

    @property
    def passed(self) -> bool:
        return (all(c.passed for c in self.plan_certificates) and self.patterns_pass
                and self.ratio_decay.passed
                and all(r.bound_holds and r.target_holds for r in self.phi_bound_full + self.phi_bound_without_initial))

    def to_json(self) -> dict:
        return {
            "plan_certificates": [c.to_json() for c in self.plan_certificates],
            "patterns": self.patterns,
            "ratio_decay": self.ratio_decay.to_json(),
            "phi_profiles": [[round(v, 9) for v in p] for p in self.profiles],
            "phi_bound_full_prefix": [r.to_json() for r in self.phi_bound_full],
            "phi_bound_without_initial_segment": [r.to_json() for r in self.phi_bound_without_initial],
            "passed": self.passed,
        }


def verify_construction(con: Construction) -> ConstructionReport:
    """Run every check on a construction.

    The ratio decay is examined on the prefix without ``B^(0)`` (a long
    run of ones makes the ratio large and is irrelevant to the limit).  The
    deficiency bound is checked at every ``T_i`` both on the full prefix and,
    following the argument that ignores ``B^(0)``, on the prefix without it
    with the same normalization ``sqrt(T_i log T_i)``.
    """
    params = con.params
    certs = [certify_plan(p, con.d, params) for p in con.plans]
    patterns = []
    for p in con.plans:
        for b in p.blocks:
            patterns.append({"superblock": p.i, "k": b.k, "m": b.m, "n": b.n,
                             "verdict": verify_pattern(b.m, b.n).value})
    xp = con.x_prime
    ends = con.superblock_ends(without_initial=True)
    decay = verify_ratio_decay(xp, milestones=ends)
    full_checkpoints = con.superblock_ends()
    phi_full = verify_phi_bound(con.prefix, full_checkpoints, params.epsilon, precision=params.precision)
    phi_xp = verify_phi_bound(xp, ends, params.epsilon, precision=params.precision, normalize_by=full_checkpoints)
    profiles = [phi_profile(p, params.precision) for p in con.plans]
    return ConstructionReport(certs, patterns, decay, profiles, phi_full, phi_xp)
