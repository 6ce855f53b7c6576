"""Seeded property suites behind ``verify-all``.

Every property draws its inputs from its own ``random.Random`` seeded by
``"<seed>:<name>"``, so the trial set depends only on the seed and the
property, never on the order in which suites run.  A failing input is
shrunk greedily (halving and dropping integers, cutting sequences) while it
keeps failing, and the smallest one found is reported.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import gmpy2
import numpy as np

from qmark import bounds, cf, extremal, minimax, minkowski, transforms
from qmark.diagnostics import increment_bounds_exact
from qmark.errors import InvalidInput, LemmaViolation, QmarkError

Check = Callable[[dict], "str | None"]


@dataclass
class Property:
    name: str
    generate: Callable[[random.Random], dict]
    check: Check
    max_trials: int | None = None  # cap for expensive properties
    description: str = ""


@dataclass
class PropertyResult:
    name: str
    trials: int
    failures: int = 0
    errors: int = 0
    counterexample: dict | None = None
    message: str | None = None
    shrink_steps: int = 0

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.errors == 0

    def to_json(self) -> dict:
        out = {"property": self.name, "trials": self.trials, "failures": self.failures,
               "errors": self.errors, "passed": self.passed}
        if self.counterexample is not None:
            out["counterexample"] = _jsonable(self.counterexample)
            out["message"] = self.message
            out["shrink_steps"] = self.shrink_steps
        return out


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Fraction):
        return str(value)
    return value


def _evaluate(prop: Property, case: dict) -> str | None:
    try:
        return prop.check(case)
    except LemmaViolation as exc:
        return f"lemma violation: {exc}"


# ---------------------------------------------------------------------------
# shrinking

def _shrink_value(value):
    if isinstance(value, bool):
        return
    if isinstance(value, int):
        for v in (0, 1, value // 2, value - 1):
            if abs(v) < abs(value):
                yield v
    elif isinstance(value, tuple) and all(isinstance(v, int) for v in value):
        n = len(value)
        if n > 1:
            yield value[: n // 2]
            yield value[n // 2:]
        for i in range(n):
            yield value[:i] + value[i + 1:]
        for i, v in enumerate(value):
            for w in _shrink_value(v):
                yield value[:i] + (w,) + value[i + 1:]


def _candidates(case: dict):
    for key, value in case.items():
        for smaller in _shrink_value(value):
            yield {**case, key: smaller}


def shrink(prop: Property, case: dict, message: str, max_steps: int = 500) -> tuple[dict, str, int]:
    """Greedy shrink: take the first smaller candidate that still fails, until none does."""
    steps = 0
    improved = True
    while improved and steps < max_steps:
        improved = False
        for cand in _candidates(case):
            try:
                msg = _evaluate(prop, cand)
            except (QmarkError, ValueError, IndexError, ZeroDivisionError):
                continue  # the candidate left the property's domain
            if msg is not None:
                case, message = cand, msg
                steps += 1
                improved = True
                break
    return case, message, steps


def run_property(prop: Property, seed: int, trials: int) -> PropertyResult:
    rng = random.Random(f"{seed}:{prop.name}")
    count = min(trials, prop.max_trials) if prop.max_trials else trials
    result = PropertyResult(prop.name, count)
    for _ in range(count):
        case = prop.generate(rng)
        try:
            msg = _evaluate(prop, case)
        except QmarkError as exc:
            result.errors += 1
            if result.counterexample is None:
                result.counterexample, result.message = case, f"error: {exc}"
            continue
        if msg is None:
            continue
        result.failures += 1
        if result.counterexample is None or result.message.startswith("error"):
            small, small_msg, steps = shrink(prop, case, msg)
            result.counterexample, result.message, result.shrink_steps = small, small_msg, steps
    return result


# ---------------------------------------------------------------------------
# generators

def _seq(rng: random.Random, max_len: int, max_elem: int, min_len: int = 1) -> tuple[int, ...]:
    return tuple(rng.randint(1, max_elem) for _ in range(rng.randint(min_len, max_len)))


def _rational(rng: random.Random, max_den: int) -> Fraction:
    q = rng.randint(1, max_den)
    return Fraction(rng.randint(1, q), q)


def _prod_alphabet(rng: random.Random, max_len: int = 60) -> tuple[int, ...]:
    return tuple(1 if rng.random() < 0.5 else rng.randint(12, 200) for _ in range(rng.randint(1, max_len)))


def _small_heavy(rng: random.Random, length: int) -> tuple[int, ...]:
    # mostly ones, a good share of 2..11, some large elements
    out = []
    for _ in range(length):
        r = rng.random()
        out.append(1 if r < 0.55 else rng.randint(2, 11) if r < 0.9 else rng.randint(12, 60))
    return tuple(out)


# ---------------------------------------------------------------------------
# checks

def check_split(case):
    seq, cut = case["seq"], case["cut"]
    if not 0 <= cut <= len(seq):
        raise InvalidInput("cut out of range")
    q, s = cf.continuant(seq), cf.split_product(seq, cut)
    return None if q == s else f"<seq> = {q} but the split at {cut} gives {s}"


def check_mirror(case):
    seq = case["seq"]
    a, b = cf.continuant(seq), cf.continuant(cf.mirror(seq))
    return None if a == b else f"<seq> = {a} but <mirror> = {b}"


def check_roundtrip(case):
    x = Fraction(case["p"], case["q"])
    exp = cf.expand(x)
    for rep in (exp.canonical, exp.alternate):
        if cf.to_fraction(rep) != x:
            return f"{rep} evaluates to {cf.to_fraction(rep)}, not {x}"
    return None


def check_qm_expansions(case):
    x = Fraction(case["p"], case["q"])
    exp = cf.expand(x)
    a, b = minkowski.question_mark(exp.canonical), minkowski.question_mark(exp.alternate)
    return None if a == b else f"?({x}) differs between expansions: {a} vs {b}"


def check_qm_monotone(case):
    x, y = Fraction(case["p1"], case["q1"]), Fraction(case["p2"], case["q2"])
    if x == y:
        return None
    if x > y:
        x, y = y, x
    a, b = minkowski.question_mark_of(x), minkowski.question_mark_of(y)
    return None if a < b else f"{x} < {y} but ?(x) = {a} >= ?(y) = {b}"


def check_qm_enclosure(case):
    prefix, tail = case["prefix"], case["tail"]
    enc = minkowski.question_mark_enclosure(prefix)
    value = minkowski.question_mark(prefix + tail)
    return None if value in enc else f"?{prefix + tail} = {value} escapes the enclosure of {prefix}"


def check_prodlem(case):
    seq = case["seq"]
    if any(1 < a < 12 for a in seq):
        raise InvalidInput("outside the alphabet")
    res = bounds.check_continuant_lower_bound(seq)
    return None if res.decided else f"bound undecided for {seq}"


def check_sumprodlem(case):
    step = Fraction(1, 4)
    inst = bounds.MinProductInstance(case["s4"] * step, case["alpha4"] * step, case["beta4"] * step)
    res = bounds.min_product_oracle(inst, step)
    return None if res.holds else f"minimum {res.minimum} < bound {res.bound} - slack {res.slack}"


def check_unitvar(case):
    half = case["half"]
    B = half + tuple(reversed(half[: len(half) - case["odd"]])) if half else ()
    left, right = transforms.unit_shift_compare(case["A"], B, case["C"], case["m"], case["p"])
    return None if left <= right else f"{left} > {right}"


def check_no2345(case):
    seq, threshold = case["seq"], case["threshold"]
    if threshold < 2:
        raise InvalidInput("threshold")
    out, trace = transforms.eliminate_small(seq, threshold)
    return elimination_problems(seq, out, trace)


def elimination_problems(seq, out, trace) -> str | None:
    """Every invariant of :func:`transforms.eliminate_small` on one input."""
    if len(out) != len(seq):
        return "length changed"
    tails = {pos for _, pos in trace.unmatched}
    for i, a in enumerate(out):
        if 1 < a < trace.threshold and i + 1 not in tails:
            return f"element #{i + 1} = {a} is small and not flagged"
    src, dst = np.cumsum(np.asarray(seq, dtype=np.int64)), np.cumsum(np.asarray(out, dtype=np.int64))
    over = np.flatnonzero(dst > src)
    if over.size:
        return f"prefix sum grows at index {int(over[0]) + 1}"
    if not trace.has_unmatched_tail and dst[-1] != src[-1]:
        return "total changed without an unmatched tail"
    a0, a1 = gmpy2.mpz(0), gmpy2.mpz(1)
    b0, b1 = gmpy2.mpz(0), gmpy2.mpz(1)
    for i, (x, y) in enumerate(zip(seq, out)):
        a0, a1 = a1, x * a1 + a0
        b0, b1 = b1, y * b1 + b0
        if b1 > a1:
            return f"continuant grows at index {i + 1}"
    return None


def check_increment(case):
    lo, hi = increment_bounds_exact(case["seq"], case["t"])
    return None if lo <= hi else f"lower {lo} > upper {hi}"


def check_minimax_optimal(case):
    N, lam = case["N"], Fraction(case["lam_num"], case["lam_den"])
    if not 0 < lam < 1:
        raise InvalidInput("lambda")
    sol = minimax.solve_equalizing(minimax.MinimaxInstance(N, lam, 1))
    if not sol.certified:
        return "equalization not certified"
    rng = random.Random(case["c_seed"])
    base = [float(v) for v in sol.c_sequence()]
    c = [max(0.0, v * (1 + rng.uniform(-0.3, 0.3))) + (1e-3 if k else 0.0) for k, v in enumerate(base)]
    c = [Fraction(v).limit_denominator(10**12) for v in c]
    top = max(v.upper for v in minimax.phi_values(c, lam, 1))
    return None if top >= sol.y_min.lower else f"max phi(c) = {float(top)} below y_min = {float(sol.y_min.mid)}"


def check_dnconv(case):
    lam = Fraction(case["lam_num"], case["lam_den"])
    if not 0 < lam < 1:
        raise InvalidInput("lambda")
    rep = minimax.bounds_check(minimax.MinimaxInstance(case["N"], lam, 1))
    return None if rep.passed else f"failures at {(rep.upper_failures + rep.difference_failures)[:5]}"


def check_pattern(case):
    m, n = case["m"], case["n"]
    if m < 3:
        raise InvalidInput("m")
    cross = extremal.pattern_crossover(n)
    expect = m >= cross
    got = bool(extremal.verify_pattern(m, n))
    return None if got == expect else f"verify_pattern({m}, {n}) = {got}, crossover {cross}"


# ---------------------------------------------------------------------------
# registry

def _gen_split(rng):
    seq = _seq(rng, 30, 1000)
    return {"seq": seq, "cut": rng.randint(0, len(seq))}


def _gen_pq(rng):
    x = _rational(rng, 10**6)
    return {"p": x.numerator, "q": x.denominator}


def _gen_pair(rng):
    x, y = _rational(rng, 10**6), _rational(rng, 10**6)
    return {"p1": x.numerator, "q1": x.denominator, "p2": y.numerator, "q2": y.denominator}


def _gen_unitvar(rng):
    m = rng.randint(1, 50)
    return {"A": _seq(rng, 8, 50, 0), "half": _seq(rng, 5, 50, 0), "odd": rng.randint(0, 1),
            "C": _seq(rng, 8, 50, 0), "m": m, "p": m + rng.randint(0, 50)}


def _gen_sumprod(rng):
    alpha4 = rng.randint(12, 20)
    beta4 = rng.randint(alpha4 + 1, 32)
    return {"alpha4": alpha4, "beta4": beta4, "s4": rng.randint(beta4, 160)}


def _gen_increment(rng):
    seq = _seq(rng, 20, 30)
    return {"seq": seq, "t": rng.randint(1, len(seq))}


def _gen_lam(rng, N_max):
    den = rng.randint(2, 100)
    return {"N": rng.randint(1, N_max), "lam_num": rng.randint(1, den - 1), "lam_den": den}


def default_properties(no2345_length: int = 1000) -> list[Property]:
    return [
        Property("cf.split_identity", _gen_split, check_split),
        Property("cf.mirror_symmetry", lambda r: {"seq": _seq(r, 30, 1000)}, check_mirror),
        Property("cf.expansion_roundtrip", _gen_pq, check_roundtrip),
        Property("minkowski.expansions_agree", _gen_pq, check_qm_expansions),
        Property("minkowski.monotone", _gen_pair, check_qm_monotone),
        Property("minkowski.enclosure", lambda r: {"prefix": _seq(r, 12, 20), "tail": _seq(r, 12, 20)},
                 check_qm_enclosure),
        Property("diagnostics.increment_bounds", _gen_increment, check_increment),
        Property("bounds.continuant_lower_bound", lambda r: {"seq": _prod_alphabet(r)}, check_prodlem),
        Property("bounds.min_product", _gen_sumprod, check_sumprodlem, max_trials=300),
        Property("transforms.unit_shift", _gen_unitvar, check_unitvar),
        Property("transforms.eliminate_small",
                 lambda r: {"seq": _small_heavy(r, r.randint(1, no2345_length)), "threshold": 12},
                 check_no2345, max_trials=200),
        Property("minimax.equalizer_optimal", lambda r: {**_gen_lam(r, 6), "c_seed": r.randrange(2**32)},
                 check_minimax_optimal, max_trials=200),
        Property("minimax.convergence_bounds", lambda r: _gen_lam(r, 400), check_dnconv, max_trials=20),
        Property("extremal.pattern_crossover", lambda r: {"m": r.randint(3, 400), "n": r.randint(0, 600)},
                 check_pattern, max_trials=300),
    ]


@dataclass
class SuiteReport:
    seed: int
    trials: int
    results: list[PropertyResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_json(self) -> dict:
        return {"seed": self.seed, "trials": self.trials, "passed": self.passed,
                "properties": [r.to_json() for r in self.results]}


def verify_all(seed: int = 0, trials: int = 100, only: list[str] | None = None,
               properties: list[Property] | None = None) -> SuiteReport:
    """Run every registered property with ``trials`` trials each (capped per property)."""
    if trials < 1:
        raise InvalidInput("trials must be positive")
    props = properties if properties is not None else default_properties()
    if only:
        unknown = set(only) - {p.name for p in props}
        if unknown:
            raise InvalidInput(f"unknown properties: {sorted(unknown)}")
        props = [p for p in props if p.name in only]
    report = SuiteReport(seed, trials)
    for prop in props:
        report.results.append(run_property(prop, seed, trials))
    return report
