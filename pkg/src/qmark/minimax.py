"""The min-max problem behind the upper and lower deficiency estimates.

For ``c_1..c_N`` (or ``d_j = sqrt(lam)^j c_j``) the functionals are

    phi_i       = (1 - lam) sum_{k>i} sqrt(lam)^(k-i) / c_k + eta c_i
    phi'_i      = sqrt(lam)^i phi_i
    phitilde'_i = (1 - lam) sum_{k>i} lam^k / d_k + eta d_i

and the sequence minimizing ``max_i phitilde'_i`` equalizes all of them.  It
is generated by ``d_{k+1} = (d_k + sqrt(d_k^2 + 4 (1 - lam) lam^(k+1) / eta)) / 2``
from ``d_1 = 0`` and gives ``y_min = eta d_N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from qmark.errors import InvalidInput, ResourceLimit
from qmark.intervals import DEFAULT_PRECISION, MAX_PRECISION, CertifiedInterval, Sign, enclose


def _lam(lam) -> Fraction:
    lam = Fraction(lam)
    if not 0 < lam < 1:
        raise InvalidInput(f"lambda must lie in (0, 1), got {lam}")
    return lam


def _eta(eta, bits: int) -> CertifiedInterval:
    eta = enclose(eta, bits)
    if not eta.is_positive():
        raise InvalidInput("eta must be positive")
    return eta


@dataclass(frozen=True)
class MinimaxInstance:
    N: int
    lam: Fraction
    eta: object = 1  # rational or CertifiedInterval

    def __post_init__(self):
        if self.N < 1:
            raise InvalidInput("N must be positive")
        object.__setattr__(self, "lam", _lam(self.lam))


# ---------------------------------------------------------------------------
# functionals

def _check_c(c: Sequence) -> list[CertifiedInterval]:
    if not len(c):
        raise InvalidInput("the sequence must be non-empty")
    out = []
    for i, v in enumerate(c, start=1):
        v = enclose(v) if not isinstance(v, CertifiedInterval) else v
        sign = v.sign()
        # c_1 only enters through eta * c_1, so it may vanish
        if sign is Sign.NEGATIVE or (i > 1 and sign is not Sign.POSITIVE):
            raise InvalidInput(f"element #{i} must be positive")
        out.append(v)
    return out


def phi_values(c: Sequence, lam, eta, precision: int = DEFAULT_PRECISION) -> list[CertifiedInterval]:
    """``phi_i`` for ``i = 1..N``, by the suffix recursion ``T_i = sqrt(lam) (1/c_{i+1} + T_{i+1})``."""
    lam = _lam(lam)
    cs = _check_c([enclose(v, precision) if not isinstance(v, CertifiedInterval) else v for v in c])
    eta = _eta(eta, precision)
    root = enclose(lam, precision).sqrt()
    N = len(cs)
    tail = enclose(0, precision)
    out = [None] * N
    for i in range(N, 0, -1):
        out[i - 1] = (1 - lam) * tail + eta * cs[i - 1]
        tail = root * (1 / cs[i - 1] + tail) if i > 1 else tail
    return out


def phi_prime_values(c: Sequence, lam, eta, precision: int = DEFAULT_PRECISION) -> list[CertifiedInterval]:
    """``phi'_i = sqrt(lam)^i phi_i``."""
    root = enclose(_lam(lam), precision).sqrt()
    out, scale = [], root
    for v in phi_values(c, lam, eta, precision):
        out.append(scale * v)
        scale = scale * root
    return out


def phi_tilde_values(d: Sequence, lam, eta, precision: int = DEFAULT_PRECISION) -> list[CertifiedInterval]:
    """``phitilde'_i(D) = (1 - lam) sum_{k>i} lam^k / d_k + eta d_i``."""
    lam = _lam(lam)
    ds = _check_c([enclose(v, precision) if not isinstance(v, CertifiedInterval) else v for v in d])
    eta = _eta(eta, precision)
    lam_iv = enclose(lam, precision)
    N = len(ds)
    powers = [lam_iv]
    for _ in range(N - 1):
        powers.append(powers[-1] * lam_iv)
    tail = enclose(0, precision)
    out = [None] * N
    for i in range(N, 0, -1):
        out[i - 1] = (1 - lam) * tail + eta * ds[i - 1]
        if i > 1:
            tail = tail + powers[i - 1] / ds[i - 1]
    return out


# ---------------------------------------------------------------------------
# the equalizing sequence

def _recurrence(N: int, lam: Fraction, eta: CertifiedInterval, head: list[CertifiedInterval], bits: int):
    """Extend ``head = [d_1..d_j]`` to length N by the quadratic recurrence."""
    d = list(head[:N])
    lam_iv = enclose(lam, bits)
    power = lam_iv ** (len(d) + 1)  # lam^(k+1) for k = len(d)
    coef = 4 * (1 - lam) / eta
    while len(d) < N:
        prev = d[-1]
        d.append((prev + (prev * prev + coef * power).sqrt()) / 2)
        power = power * lam_iv
    return d


@dataclass
class MinimaxSolution:
    instance: MinimaxInstance
    precision: int
    d: list[CertifiedInterval]
    y_min: CertifiedInterval
    functionals: list[CertifiedInterval]
    spread: Fraction  # max upper - min lower over all functionals
    certified: bool  # every functional encloses a common value with y_min

    @property
    def e(self) -> list[CertifiedInterval]:
        root = _eta(self.instance.eta, self.precision).sqrt()
        return [root * v for v in self.d]

    def c_sequence(self) -> list[CertifiedInterval]:
        """``c_j = d_j / sqrt(lam)^j``."""
        root = enclose(self.instance.lam, self.precision).sqrt()
        out, scale = [], root
        for v in self.d:
            out.append(v / scale)
            scale = scale * root
        return out

    def to_json(self, digits: int = 20) -> dict:
        return {
            "N": self.instance.N,
            "lambda": str(self.instance.lam),
            "precision": self.precision,
            "d": [v.to_json(digits) for v in self.d],
            "y_min": self.y_min.to_json(digits),
            "spread": float(self.spread),
            "equalization_certified": self.certified,
        }


def _equalization(functionals, y_min) -> tuple[Fraction, bool]:
    lo = min(v.lower for v in functionals)
    hi = max(v.upper for v in functionals)
    common = max(max(v.lower for v in functionals), y_min.lower) <= min(min(v.upper for v in functionals), y_min.upper)
    return hi - lo, common


def solve_equalizing(
    inst: MinimaxInstance,
    precision: int = DEFAULT_PRECISION,
    max_precision: int = MAX_PRECISION,
) -> MinimaxSolution:
    """Run the recurrence from ``d_1 = 0`` and certify the equalization.

    The certificate holds when all functional enclosures share a point with
    ``y_min``; the precision doubles until that happens or ``max_precision``
    is reached (then ``certified`` is False).
    """
    bits = precision
    while True:
        eta = _eta(inst.eta, bits)
        d = _recurrence(inst.N, inst.lam, eta, [enclose(0, bits)], bits)
        y_min = eta * d[-1]
        funcs = phi_tilde_values(d, inst.lam, eta, bits)
        spread, common = _equalization(funcs, y_min)
        if common or bits >= max_precision:
            return MinimaxSolution(inst, bits, d, y_min, funcs, spread, common)
        bits = min(2 * bits, max_precision)


def modified_sequence(inst: MinimaxInstance, precision: int = DEFAULT_PRECISION) -> list[CertifiedInterval]:
    """The recurrence with ``d_1 = d_2 = sqrt((1 - lam) lam / eta)`` instead of ``d_1 = 0``."""
    eta = _eta(inst.eta, precision)
    start = ((1 - inst.lam) * enclose(inst.lam, precision) / eta).sqrt()
    return _recurrence(inst.N, inst.lam, eta, [start, start], precision)


# ---------------------------------------------------------------------------
# convergence bounds

@dataclass
class BoundsReport:
    precision: int
    checked_upper: int
    checked_difference: int
    upper_failures: list[int] = field(default_factory=list)
    upper_undecided: list[int] = field(default_factory=list)
    difference_failures: list[int] = field(default_factory=list)
    difference_undecided: list[int] = field(default_factory=list)
    min_upper_gap: float | None = None
    min_difference_ratio: float | None = None

    @property
    def passed(self) -> bool:
        return not (self.upper_failures or self.upper_undecided
                    or self.difference_failures or self.difference_undecided)

    def to_json(self) -> dict:
        return {
            "precision": self.precision,
            "checked_upper": self.checked_upper,
            "checked_difference": self.checked_difference,
            "upper_failures": self.upper_failures,
            "upper_undecided": self.upper_undecided,
            "difference_failures": self.difference_failures,
            "difference_undecided": self.difference_undecided,
            "min_upper_gap": self.min_upper_gap,
            "min_difference_ratio": self.min_difference_ratio,
            "passed": self.passed,
        }


def _bounds_once(inst: MinimaxInstance, bits: int) -> BoundsReport:
    lam, N = inst.lam, inst.N
    eta = _eta(inst.eta, bits)
    lam_iv = enclose(lam, bits)
    # delta_k, X_k and e_k for k = 1..N+1 (index 0 unused)
    delta = [None, (1 - lam) * lam_iv]
    for _ in range(N):
        delta.append(delta[-1] * lam_iv)
    X = [None, delta[1]]
    for k in range(2, N + 2):
        X.append(X[-1] + delta[k])
    root2X = [None] + [(2 * x).sqrt() for x in X[1:]]
    e = [None, enclose(0, bits)]
    for k in range(1, N):
        e.append((e[k] + (e[k] * e[k] + 4 * delta[k + 1]).sqrt()) / 2)
    report = BoundsReport(bits, 0, 0)
    for n in range(1, N + 1):
        gap = root2X[n] - e[n]
        report.checked_upper += 1
        sign = gap.sign()
        if sign is Sign.UNDECIDED:
            report.upper_undecided.append(n)
        elif sign is not Sign.POSITIVE:
            report.upper_failures.append(n)
        g = float(gap.lower)
        report.min_upper_gap = g if report.min_upper_gap is None else min(report.min_upper_gap, g)
    for n in range(1, N - 1):
        # both differences in their cancellation-free forms
        lhs = 2 * delta[n + 1] / (e[n] + (e[n] * e[n] + 4 * delta[n + 1]).sqrt())
        rhs = 2 * delta[n + 2] / (root2X[n + 2] + root2X[n + 1])
        report.checked_difference += 1
        sign = (lhs - rhs).sign()
        if sign is Sign.UNDECIDED:
            report.difference_undecided.append(n)
        elif sign is not Sign.POSITIVE:
            report.difference_failures.append(n)
        ratio = float((lhs / rhs).lower)
        report.min_difference_ratio = ratio if report.min_difference_ratio is None else min(report.min_difference_ratio, ratio)
    return report


def bounds_check(solution_or_instance, max_precision: int = MAX_PRECISION) -> BoundsReport:
    """Certify ``e_n < sqrt(2 X_n)`` for ``n <= N`` and
    ``e_{n+1} - e_n > sqrt(2 X_{n+2}) - sqrt(2 X_{n+1})`` for ``n <= N - 2``.

    Here ``e_k = sqrt(eta) d_k``, ``delta_k = (1 - lam) lam^k`` and
    ``X_n = delta_1 + ... + delta_n``.
    """
    if isinstance(solution_or_instance, MinimaxSolution):
        inst, bits = solution_or_instance.instance, solution_or_instance.precision
    else:
        inst, bits = solution_or_instance, DEFAULT_PRECISION
    while True:
        report = _bounds_once(inst, bits)
        if report.passed or bits >= max_precision or report.upper_failures or report.difference_failures:
            return report
        bits = min(2 * bits, max_precision)


# ---------------------------------------------------------------------------
# brute-force oracle

@dataclass
class OracleReport:
    value: float
    point: tuple[float, ...]
    slack: float
    grid_points: int
    rounds: int

    def to_json(self) -> dict:
        return {"value": self.value, "point": list(self.point), "slack": self.slack,
                "grid_points": self.grid_points, "rounds": self.rounds}


def _objective(points: np.ndarray, lam: float, eta: float) -> np.ndarray:
    """``max_k phitilde'_k`` for each row of ``points`` (float64)."""
    n = points.shape[1]
    powers = lam ** np.arange(1, n + 1)
    with np.errstate(divide="ignore"):
        inv = np.where(points > 0, powers / np.where(points > 0, points, 1), np.inf)
    # suffix sums over k > i
    tail = np.cumsum(inv[:, ::-1], axis=1)[:, ::-1]
    tail = np.concatenate([tail[:, 1:], np.zeros((points.shape[0], 1))], axis=1)
    values = (1 - lam) * tail + eta * points
    return values.max(axis=1)


def brute_force_minmax(
    N: int,
    lam,
    eta=1.0,
    grid: int | None = None,
    rounds: int = 30,
    max_points: int = 4 * 10**6,
) -> OracleReport:
    """Grid search with zoom refinement for ``min_D max_k phitilde'_k(D)``.

    The search box is ``[0, y0 / eta]^N`` with ``y0`` the objective at
    ``D = (1, ..., 1)``: a coordinate above ``y_min / eta`` already makes its
    own functional exceed ``y_min``.  The objective is convex, so each round
    re-centres a smaller box on the incumbent.  ``slack`` is the largest
    change of the objective between the incumbent and its grid neighbours
    in the final round.
    """
    if not 1 <= N <= 4:
        raise InvalidInput("the brute-force oracle supports 1 <= N <= 4")
    if grid is None:
        # about 2e5 points per round
        grid = max(5, int(round(2e5 ** (1 / N))))
    if grid**N > max_points:
        raise ResourceLimit(f"{grid}^{N} grid points exceed the cap {max_points}")
    lam, eta = float(Fraction(lam)), float(eta)
    y0 = float(_objective(np.ones((1, N)), lam, eta)[0])
    lo = np.zeros(N)
    hi = np.full(N, y0 / eta)
    best_val, best = math.inf, np.zeros(N)
    for _ in range(rounds):
        axes = [np.linspace(lo[j], hi[j], grid) for j in range(N)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, N)
        vals = _objective(mesh, lam, eta)
        idx = int(np.argmin(vals))
        if vals[idx] <= best_val:
            best_val, best = float(vals[idx]), mesh[idx].copy()
        step = (hi - lo) / (grid - 1)
        lo = np.maximum(best - 2 * step, 0.0)
        hi = best + 2 * step
    step = (hi - lo) / (grid - 1)
    slack = 0.0
    for j in range(N):
        for sgn in (-1, 1):
            nb = best.copy()
            nb[j] = max(nb[j] + sgn * step[j], 0.0)
            slack = max(slack, abs(float(_objective(nb[None, :], lam, eta)[0]) - best_val))
    slack += 1e-12 * max(1.0, abs(best_val))
    return OracleReport(best_val, tuple(float(v) for v in best), slack, grid**N, rounds)


# ---------------------------------------------------------------------------
# lower estimates for max phi

def max_phi_lower_bounds(c: Sequence, lam, eta, epsilon=None, M: int | None = None,
                         precision: int = DEFAULT_PRECISION) -> dict:
    """Evaluate ``max phi_i`` and ``max phi'_i`` against the reference lines
    ``sqrt(8 eta)`` and ``sqrt(2 eta)``, and look for the two witnesses used
    in the lower estimate: the first ``c_i >= 1 / (2 sqrt(eta))`` and a chain
    ``i_1 < i_2 < ..`` with ``i_{m+1} - i_m < M`` and ``c_{i_{m+1}} > (1 + eps^2) c_{i_m}``.
    Nothing here is asserted; the reference lines carry asymptotic factors.
    """
    lam = _lam(lam)
    eta_iv = _eta(eta, precision)
    cs = [enclose(v, precision) if not isinstance(v, CertifiedInterval) else v for v in c]
    phis = phi_values(cs, lam, eta_iv, precision)
    primes = phi_prime_values(cs, lam, eta_iv, precision)

    def _argmax(vals):
        i = max(range(len(vals)), key=lambda j: vals[j].upper)
        return i + 1, vals[i]

    i_phi, max_phi = _argmax(phis)
    i_prime, max_prime = _argmax(primes)
    ref8, ref2 = (8 * eta_iv).sqrt(), (2 * eta_iv).sqrt()
    level = 1 / (2 * eta_iv.sqrt())
    first = next((i for i, v in enumerate(cs, start=1) if (v - level).sign() in (Sign.POSITIVE, Sign.ZERO)), None)
    cap = 3 / eta_iv.sqrt()
    above_cap = [i for i, v in enumerate(cs, start=1) if not (cap - v).is_positive()]
    chain = None
    if epsilon is not None and M is not None and first is not None:
        grow = 1 + Fraction(epsilon) ** 2
        chain = [first]
        while True:
            i = chain[-1]
            nxt = next((j for j in range(i + 1, min(i + M, len(cs) + 1))
                        if (cs[j - 1] - cs[i - 1] * grow).is_positive()), None)
            if nxt is None:
                break
            chain.append(nxt)
    return {
        "N": len(cs),
        "max_phi": {"index": i_phi, "value": max_phi.to_json()},
        "max_phi_prime": {"index": i_prime, "value": max_prime.to_json()},
        "reference_sqrt_8eta": ref8.to_json(),
        "reference_sqrt_2eta": ref2.to_json(),
        "max_phi_over_sqrt_8eta": (max_phi / ref8).to_json(),
        "max_phi_prime_over_sqrt_2eta": (max_prime / ref2).to_json(),
        "first_c_above_half_inverse_sqrt_eta": first,
        "indices_with_c_not_below_3_over_sqrt_eta": above_cap,
        "growth_chain": chain,
    }
