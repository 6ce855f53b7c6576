"""Command-line entry point.

Exit codes: 0 success, 2 a verification failed, 3 something stayed
undecided at the maximal precision, 64 bad arguments or input.
Reports go to standard output; ``--format`` picks text, json or csv.
Options may also come from a ``key=value`` file given with ``--config``;
explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from qmark import __version__, bounds, cf, diagnostics, extremal, minimax, minkowski, suite, transforms
from qmark.constants import constants
from qmark.errors import InvalidInput, LemmaViolation, QmarkError, ResourceLimit
from qmark.intervals import DEFAULT_PRECISION, MAX_PRECISION

EXIT_OK, EXIT_FAIL, EXIT_UNDECIDED, EXIT_USAGE = 0, 2, 3, 64

# global option -> (type, default)
GLOBALS = {
    "precision": (int, DEFAULT_PRECISION),
    "seed": (int, 0),
    "trials": (int, 100),
    "format": (str, "text"),
    "cap": (int, 24),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Result:
    payload: dict
    text: str
    rows: list[dict] | None = None
    status: int = EXIT_OK
    stderr: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# parsing helpers

def _approx(iv, digits: int = 20) -> str:
    """Decimal rendering of an enclosure (both endpoints when they differ)."""
    lo, hi = iv.decimal(digits)
    return lo if lo == hi else f"[{lo}, {hi}]"


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise InvalidInput(f"not a rational number: {text!r}") from None


def parse_sequence(text: str) -> tuple[int, ...]:
    """``"1,2,3"``, ``"1 2 3"`` or ``"[1, 2, 3]"``."""
    cleaned = text.strip().strip("[]()").replace(",", " ").replace(";", " ")
    try:
        seq = tuple(int(tok) for tok in cleaned.split())
    except ValueError:
        raise InvalidInput(f"not a sequence of integers: {text!r}") from None
    return cf.as_quotients(seq)


def read_quotients(path: str) -> np.ndarray:
    """A newline-separated partial-quotient file (blank lines and ``#`` comments ignored)."""
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from None
    lines = [ln.split("#", 1)[0].strip() for ln in raw.splitlines()]
    try:
        arr = np.array([int(ln) for ln in lines if ln], dtype=np.int64)
    except ValueError:
        raise InvalidInput(f"{path} must hold one integer per line") from None
    if arr.size and int(arr.max()) < 2**31:
        arr = arr.astype(np.int32)
    return cf.as_array(arr)


def write_quotients(path: str, arr: np.ndarray) -> None:
    with open(path, "w") as fh:
        np.savetxt(fh, arr, fmt="%d")


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read config {path}: {exc}") from None
    out = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInput(f"{path}:{n}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_").lower()] = value
    return out


def _prefix_arg(args, name="seq"):
    if getattr(args, "file", None):
        return tuple(int(a) for a in read_quotients(args.file).tolist())
    value = getattr(args, name, None)
    if value is None:
        raise InvalidInput("give a sequence or --file")
    return parse_sequence(value)


def _opt(args, name, conv, default=None):
    """Flag value, else config value, else ``default``."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in args.config_values:
        try:
            return conv(args.config_values[name])
        except ValueError:
            raise InvalidInput(f"config value for {name!r} is not valid: {args.config_values[name]!r}") from None
    return default


# ---------------------------------------------------------------------------
# commands

def cmd_qm(args) -> Result:
    if args.cf:
        seq = parse_sequence(args.x)
        value = minkowski.question_mark(seq)
        enc = minkowski.question_mark_enclosure(seq)
        payload = {"prefix": list(seq), "value": str(value.to_fraction()), "dyadic": str(value),
                   "enclosure": {"lower": str(enc.lower.to_fraction()), "upper": str(enc.upper.to_fraction())},
                   "approx": value.decimal(20)}
        text = f"{value.to_fraction()}\nenclosure of all continuations: [{enc.lower.to_fraction()}, {enc.upper.to_fraction()}]"
    else:
        x = parse_rational(args.x)
        value = minkowski.question_mark_of(x)
        payload = {"x": str(x), "value": str(value.to_fraction()), "dyadic": str(value), "approx": value.decimal(20)}
        text = str(value.to_fraction())
    return Result(payload, text, [payload])


def cmd_expand(args) -> Result:
    x = parse_rational(args.x)
    exp = cf.expand(x)
    payload = {"x": str(x), "canonical": list(exp.canonical), "alternate": list(exp.alternate),
               "degenerate": exp.degenerate}
    text = f"canonical: {list(exp.canonical)}\nalternate: {list(exp.alternate)}"
    return Result(payload, text, [{"x": str(x), "canonical": " ".join(map(str, exp.canonical)),
                                   "alternate": " ".join(map(str, exp.alternate))}])


def cmd_continuant(args) -> Result:
    seq = _prefix_arg(args)
    q = cf.fast_continuant(seq)
    payload = {"length": len(seq), "continuant": str(q), "mirror_equal": q == cf.continuant(cf.mirror(seq))
               if len(seq) <= 10**4 else None}
    lines = [str(q)]
    if args.split is not None:
        s = cf.split_product(seq, args.split)
        payload["split"] = {"cut": args.split, "value": str(s), "equal": s == q}
        lines.append(f"split at {args.split}: {s} ({'equal' if s == q else 'DIFFERENT'})")
    if args.fraction:
        payload["fraction"] = str(cf.to_fraction(seq))
        lines.append(f"[0; {', '.join(map(str, seq))}] = {cf.to_fraction(seq)}")
    status = EXIT_OK if payload.get("split", {}).get("equal", True) else EXIT_FAIL
    return Result(payload, "\n".join(lines), [{"length": len(seq), "continuant": str(q)}], status)


def cmd_level(args) -> Result:
    cap = _opt(args, "cap", int, 24)
    level = minkowski.stern_brocot_level(args.n, cap)
    values = [str(v) for v in level.values]
    payload = {"n": args.n, "size": len(values), "values": values}
    text = ", ".join(values)
    if args.x is not None:
        x = parse_rational(args.x)
        dist = minkowski.empirical_distribution(args.n, x, cap)
        qx = minkowski.question_mark_of(x) if 0 < x <= 1 else minkowski.DyadicRational(0, 0)
        payload["distribution"] = {"x": str(x), "F_n": str(dist), "question_mark": str(qx.to_fraction())}
        text += f"\nF_{args.n}({x}) = {dist}; ?({x}) = {qx.to_fraction()}"
    return Result(payload, text, [{"n": args.n, "value": v} for v in values])


def cmd_diagnose(args) -> Result:
    seq = _prefix_arg(args)
    precision = _opt(args, "precision", int, DEFAULT_PRECISION)
    series = diagnostics.phi1_series(seq, precision, parse_rational(args.threshold))
    pos = diagnostics.check_phi_positive(series, args.start)
    payload = {"series": series.to_json(12), "phi_positive": pos.to_json()}
    status = EXIT_OK
    if all(a == 1 or a >= 12 for a in seq):
        payload["phi_gt_3w"] = diagnostics.check_phi_gt_3w(series, 12, args.start).to_json()
    undecided = pos.undecided or payload.get("phi_gt_3w", {}).get("undecided")
    if args.strict:
        if pos.failures or payload.get("phi_gt_3w", {}).get("failures"):
            status = EXIT_FAIL
        elif undecided:
            status = EXIT_UNDECIDED
    rows = series.records(12)
    for r in rows:
        r["phi1_lower"], r["phi1_upper"] = r["phi1"]["lower"], r["phi1"]["upper"]
        del r["phi1"]
    lines = ["t a S phi1 w ratio_vs_threshold"]
    lines += [f"{r['t']} {r['a']} {r['S']} ~{r['phi1_lower']} {r['w']} {r['ratio_class']}" for r in rows]
    lines.append(f"phi1 > 0 from t={args.start}: {'all certified' if pos.passed else f'flagged {pos.flagged}'}")
    return Result(payload, "\n".join(lines), rows, status)


def cmd_blocks(args) -> Result:
    seq = read_quotients(args.file) if args.file else np.array(parse_sequence(args.seq), dtype=np.int64)
    eps = parse_rational(args.epsilon) if args.epsilon else None
    bd = diagnostics.block_decompose(seq, args.t0, parse_rational(args.lam), args.N, epsilon=eps,
                                     precision=_opt(args, "precision", int, DEFAULT_PRECISION),
                                     element_threshold=args.element_threshold)
    payload = bd.to_json(12)
    rows = [b.to_json(12) for b in bd.blocks]
    flat = [{k: (v if not isinstance(v, dict) else v.get("lower")) for k, v in r.items()} for r in rows]
    lines = [f"grid: {bd.grid}"]
    lines += [f"B_{r['i']}: length {r['length']} S={r['S']} max={r['M']}@{r['m']}" for r in rows]
    lines.append("sumfkneg: " + ", ".join(c.value for c in bd.sumfkneg))
    return Result(payload, "\n".join(lines), flat)


def cmd_eliminate(args) -> Result:
    seq = _prefix_arg(args)
    out, trace = transforms.eliminate_small(seq, args.threshold)
    problem = suite.elimination_problems(seq, out, trace)
    payload = {"input": list(seq), "output": list(out), "trace": trace.to_json(), "invariants_hold": problem is None}
    if problem:
        payload["problem"] = problem
    text = f"before: {list(seq)}\nafter:  {list(out)}\ntrace:  {json.dumps(trace.to_json())}"
    return Result(payload, text, [{"index": i + 1, "before": a, "after": b} for i, (a, b) in enumerate(zip(seq, out))],
                  EXIT_OK if problem is None else EXIT_FAIL)


def cmd_bounds(args) -> Result:
    precision = _opt(args, "precision", int, DEFAULT_PRECISION)
    if args.which == "continuant":
        seq = parse_sequence(args.seq)
        try:
            res = bounds.check_continuant_lower_bound(seq, precision)
        except LemmaViolation as exc:
            return Result({"holds": False, "message": str(exc)}, f"FAIL: {exc}", None, EXIT_FAIL)
        payload = {"continuant": str(res.continuant), "bound": res.bound.to_json(20), "decided": res.decided,
                   "holds": True if res.decided else None}
        text = f"<seq> = {res.continuant}\nbound ~ {_approx(res.bound)}\n{'PASS' if res.decided else 'UNDECIDED'}"
        return Result(payload, text, [payload], EXIT_OK if res.decided else EXIT_UNDECIDED)
    if args.which == "min-product":
        inst = bounds.MinProductInstance(parse_rational(args.s), parse_rational(args.alpha), parse_rational(args.beta))
        res = bounds.min_product_oracle(inst, parse_rational(args.step))
        payload = res.to_json()
        text = (f"bound beta^floor(s/beta) = {res.bound}\noracle minimum = {res.minimum} at {payload['argmin']}\n"
                f"{'PASS' if res.holds else 'FAIL'}")
        return Result(payload, text, [payload], EXIT_OK if res.holds else EXIT_FAIL)
    # sweep
    step = parse_rational(args.step)
    alphas = bounds.grid(parse_rational(args.alpha_min), parse_rational(args.alpha_max), step)
    rep = bounds.sweep_min_product(alphas, parse_rational(args.beta_max), parse_rational(args.s_max), step)
    payload = rep.to_json()
    text = (f"instances {rep.instances}, feasible {rep.feasible}, violations {len(rep.violations)}, "
            f"min ratio {rep.min_ratio}\n{'PASS' if rep.passed else 'FAIL'}")
    return Result(payload, text, [{k: v for k, v in payload.items() if k != "violations"}],
                  EXIT_OK if rep.passed else EXIT_FAIL)


def cmd_minimax(args) -> Result:
    precision = _opt(args, "precision", int, DEFAULT_PRECISION)
    inst = minimax.MinimaxInstance(args.N, parse_rational(args.lam), parse_rational(args.eta))
    sol = minimax.solve_equalizing(inst, precision)
    payload = sol.to_json(20)
    status = EXIT_OK if sol.certified else EXIT_UNDECIDED
    lines = [f"y_min ~ {_approx(sol.y_min)}", f"equalized: {'certified' if sol.certified else 'not certified'}"]
    if args.bounds:
        rep = minimax.bounds_check(sol)
        payload["bounds"] = rep.to_json()
        lines.append(f"convergence bounds: {'PASS' if rep.passed else 'FAIL'}")
        if not rep.passed:
            status = EXIT_FAIL if (rep.upper_failures or rep.difference_failures) else EXIT_UNDECIDED
    if args.oracle:
        orc = minimax.brute_force_minmax(args.N, inst.lam, float(inst.eta))
        agree = abs(orc.value - float(sol.y_min.mid)) <= orc.slack
        payload["oracle"] = {**orc.to_json(), "agrees": agree}
        lines.append(f"oracle {orc.value:.15g} (slack {orc.slack:.3g}): {'agrees' if agree else 'DISAGREES'}")
        if not agree:
            status = EXIT_FAIL
    rows = [{"k": k, "d": _approx(v)} for k, v in enumerate(sol.d, start=1)]
    return Result(payload, "\n".join(lines), rows, status)


def _construction_params(args) -> extremal.ConstructionParams:
    precision = _opt(args, "precision", int, DEFAULT_PRECISION)
    eps = _opt(args, "epsilon", parse_rational)
    lam = _opt(args, "lam", parse_rational)
    if eps is None or lam is None:
        raise InvalidInput("epsilon and lambda are required (flags or config)")
    mode = _opt(args, "mode", str, "override")
    T1 = _opt(args, "T1", int)
    if mode == "formula":
        params = extremal.derive_constants(eps, lam, precision)
        return params.with_T1(T1) if T1 is not None else params
    if mode != "override":
        raise InvalidInput(f"mode must be 'formula' or 'override', got {mode!r}")
    N = _opt(args, "N", int)
    if N is None:
        raise InvalidInput("N is required in override mode")
    return extremal.override_params(eps, lam, N, T1, precision)


def cmd_construct(args) -> Result:
    params = _construction_params(args)
    if params.T1 is None:
        est = extremal.estimate_min_T(params)
        raise InvalidInput(f"T1 is required; the windows first become non-empty near T1 = {est}")
    con = extremal.construct(params, _opt(args, "superblocks", int, 1), _opt(args, "selection", str, "slack"),
                             _opt(args, "initial", int))
    payload = con.to_json()
    payload["certificates"] = [extremal.certify_plan(p, con.d, params).to_json() for p in con.plans]
    payload["patterns"] = [{"superblock": p.i, "k": b.k, "verdict": extremal.verify_pattern(b.m, b.n).value}
                           for p in con.plans for b in p.blocks]
    if args.out:
        write_quotients(args.out, con.prefix)
        payload["file"] = args.out
    lines = [f"length {con.prefix.size} (initial run of ones {con.initial_length})",
             f"superblock ends: {con.superblock_ends()}"]
    for p in con.plans:
        for b in p.blocks:
            lines.append(f"superblock {p.i} k={b.k}: m={b.m} n={b.n} repeats={b.repeats} t={b.t}")
    ok = all(c["passed"] for c in payload["certificates"]) and all(p["verdict"] == "pass" for p in payload["patterns"])
    rows = [{"superblock": p.i, **b.to_json()} for p in con.plans for b in p.blocks]
    return Result(payload, "\n".join(lines), rows, EXIT_OK if ok else EXIT_FAIL)


def _patterns_in(arr: np.ndarray) -> list[tuple[int, int]]:
    """Distinct ``(m, n)`` with ``m > 1`` followed by exactly ``n`` ones (a final incomplete run is skipped)."""
    big = np.flatnonzero(arr > 1)
    if big.size < 2:
        return []
    gaps = np.diff(big) - 1
    pairs = set(zip(arr[big[:-1]].tolist(), gaps.tolist()))
    return sorted(pairs)


def cmd_verify_construction(args) -> Result:
    arr = read_quotients(args.file)
    precision = _opt(args, "precision", int, DEFAULT_PRECISION)
    eps = _opt(args, "epsilon", parse_rational)
    if eps is None:
        raise InvalidInput("epsilon is required (flag or config)")
    initial = _opt(args, "initial", int, 0)
    if not 0 <= initial < arr.size:
        raise InvalidInput("initial must lie inside the prefix")
    checkpoints = [int(c) for c in args.checkpoints.split(",")] if args.checkpoints else [int(arr.size)]
    pairs = _patterns_in(arr[initial:])
    patterns = [{"m": m, "n": n, "verdict": extremal.verify_pattern(m, n).value} for m, n in pairs]
    xp = arr[initial:]
    # a leading run of ones always violates the decay, so it is skipped
    lead = initial
    if not lead and (arr != 1).any():
        lead = int(np.argmax(arr != 1))
    decay = extremal.verify_ratio_decay(arr[lead:])
    phi = extremal.verify_phi_bound(arr, checkpoints, eps, precision=precision)
    payload = {"length": int(arr.size), "initial": initial, "decay_start": lead + 1, "patterns": patterns,
               "ratio_decay": decay.to_json(), "phi_bound": [r.to_json() for r in phi]}
    if initial:
        kept = [c for c in checkpoints if c > initial]
        shifted = extremal.verify_phi_bound(xp, [c - initial for c in kept], eps, precision=precision,
                                            normalize_by=kept)
        payload["phi_bound_without_initial"] = [r.to_json() for r in shifted]
        phi = phi + shifted
    holds = [r.bound_holds for r in phi] + [r.target_holds for r in phi]
    failed = (any(p["verdict"] != "pass" for p in patterns) or not decay.passed or any(h is False for h in holds))
    status = EXIT_FAIL if failed else EXIT_UNDECIDED if any(h is None for h in holds) else EXIT_OK
    lines = [f"patterns: {len(patterns)} distinct, {'all pass' if all(p['verdict'] == 'pass' for p in patterns) else 'some FAIL'}",
             f"ratio decay at {len(decay.samples)} samples: {'PASS' if decay.passed else 'FAIL'}"]
    for r in phi:
        lines.append(f"nu<={r.checkpoint}, T={r.normalizer}: max phi1 at {r.max_index}, ratio ~{_approx(r.ratio, 8)} "
                     f"(target {_approx(r.target_ratio, 8)}): {r.target_holds}")
    rows = [r.to_json(12) for r in phi]
    flat = [{k: (v if not isinstance(v, dict) else v.get("lower")) for k, v in r.items()} for r in rows]
    return Result(payload, "\n".join(lines), flat, status)


def cmd_constants(args) -> Result:
    c = constants(_opt(args, "precision", int, DEFAULT_PRECISION))
    payload = c.to_json(30)
    lines = [f"{name} in [{lo}, {hi}]" for name, (lo, hi) in ((n, iv.decimal(30)) for n, iv in c.items())]
    return Result(payload, "\n".join(lines), [{"name": k, **v} for k, v in payload.items() if isinstance(v, dict)])


def cmd_verify_all(args) -> Result:
    seed = _opt(args, "seed", int, 0)
    trials = _opt(args, "trials", int, 100)
    only = args.only.split(",") if args.only else None
    rep = suite.verify_all(seed, trials, only, suite.default_properties(_opt(args, "no2345_length", int, 1000)))
    payload = rep.to_json()
    lines = []
    for r in rep.results:
        line = f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.trials - r.failures - r.errors}/{r.trials}"
        if r.counterexample is not None:
            line += f" counterexample {json.dumps(suite._jsonable(r.counterexample))}: {r.message}"
        lines.append(line)
    rows = [{k: v for k, v in r.to_json().items() if k in ("property", "trials", "failures", "errors", "passed")}
            for r in rep.results]
    return Result(payload, "\n".join(lines), rows, EXIT_OK if rep.passed else EXIT_FAIL)


# ---------------------------------------------------------------------------
# parser

def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    g = parser.add_argument_group("shared options")
    g.add_argument("--precision", type=int, default=default, help="working precision in bits")
    g.add_argument("--seed", type=int, default=default, help="seed for randomized trials")
    g.add_argument("--trials", type=int, default=default, help="trials per property")
    g.add_argument("--format", choices=("text", "json", "csv"), default=default)
    g.add_argument("--config", default=default, help="key=value file with defaults")
    g.add_argument("--cap", type=int, default=default, help="enumeration cap")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qmark", description="Exact and certified computations around Minkowski's ?(x).")
    p.add_argument("--version", action="version", version=f"qmark {__version__}")
    _common(p, suppress=False)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        _common(sp, suppress=True)
        sp.set_defaults(func=func)
        return sp

    sp = add("qm", cmd_qm, "?(x) for a rational x, or for a partial-quotient prefix with --cf")
    sp.add_argument("x")
    sp.add_argument("--cf", action="store_true", help="read x as partial quotients a1,a2,...")

    sp = add("expand", cmd_expand, "both continued-fraction expansions of a rational in (0, 1]")
    sp.add_argument("x")

    sp = add("continuant", cmd_continuant, "continuant of a prefix")
    sp.add_argument("seq", nargs="?")
    sp.add_argument("--file")
    sp.add_argument("--split", type=int, help="also evaluate the split identity at this cut")
    sp.add_argument("--fraction", action="store_true", help="also print [0; seq]")

    sp = add("level", cmd_level, "values of a Stern-Brocot level")
    sp.add_argument("n", type=int)
    sp.add_argument("--x", help="also report the empirical distribution at x")

    sp = add("constants", cmd_constants, "certified enclosures of the constants")

    sp = add("diagnose", cmd_diagnose, "deficiency series and index checks of a prefix")
    sp.add_argument("seq", nargs="?")
    sp.add_argument("--file")
    sp.add_argument("--threshold", default="1/2", help="ratio threshold c for <A_t>/sqrt2^S vs c")
    sp.add_argument("--start", type=int, default=1)
    sp.add_argument("--strict", action="store_true", help="exit 2/3 when a check fails/is undecided")

    sp = add("blocks", cmd_blocks, "block decomposition along t_i = lambda^i t0")
    sp.add_argument("seq", nargs="?")
    sp.add_argument("--file")
    sp.add_argument("--t0", type=int, required=True)
    sp.add_argument("--lam", required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--epsilon")
    sp.add_argument("--element-threshold", type=int)

    sp = add("eliminate", cmd_eliminate, "remove small elements by unit shifts")
    sp.add_argument("seq", nargs="?")
    sp.add_argument("--file")
    sp.add_argument("--threshold", type=int, default=12)

    sp = add("bounds-verify", cmd_bounds, "check the continuant and product lower bounds")
    bsub = sp.add_subparsers(dest="which", required=True, parser_class=_Parser)
    b = bsub.add_parser("continuant")
    b.add_argument("seq")
    b = bsub.add_parser("min-product")
    b.add_argument("--s", required=True)
    b.add_argument("--alpha", required=True)
    b.add_argument("--beta", required=True)
    b.add_argument("--step", default="1/4")
    b = bsub.add_parser("sweep")
    b.add_argument("--alpha-min", default="3")
    b.add_argument("--alpha-max", default="5")
    b.add_argument("--beta-max", default="8")
    b.add_argument("--s-max", default="40")
    b.add_argument("--step", default="1/4")

    sp = add("minimax", cmd_minimax, "equalizing sequence of the minimax problem")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--lam", required=True)
    sp.add_argument("--eta", default="1")
    sp.add_argument("--bounds", action="store_true", help="also run the convergence certificates")
    sp.add_argument("--oracle", action="store_true", help="also run the brute-force oracle (N <= 4)")

    for name, func, help_ in (("construct", cmd_construct, "build a prefix from superblocks"),
                              ("verify-construction", cmd_verify_construction, "certify a constructed prefix")):
        sp = add(name, func, help_)
        sp.add_argument("--epsilon")
        sp.add_argument("--lam", "--lambda", dest="lam")
        sp.add_argument("--N", type=int)
        sp.add_argument("--T1", type=int)
        sp.add_argument("--initial", type=int, help="length of the initial run of ones")
        if name == "construct":
            sp.add_argument("--mode", choices=("formula", "override"))
            sp.add_argument("--superblocks", type=int)
            sp.add_argument("--selection", choices=("slack", "smallest"))
            sp.add_argument("--out", help="write the partial quotients here, one per line")
        else:
            sp.add_argument("file")
            sp.add_argument("--checkpoints", help="comma-separated T values (default: the file length)")

    sp = add("verify-all", cmd_verify_all, "run every property suite")
    sp.add_argument("--only", help="comma-separated property names")
    sp.add_argument("--no2345-length", type=int, dest="no2345_length")
    return p


_CONFIG_ALIASES = {"lambda": "lam", "t1": "T1", "n": "N", "precision_bits": "precision"}


def _render(result: Result, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result.payload, indent=2) + "\n"
    if fmt == "csv":
        rows = result.rows if result.rows is not None else [
            {"key": k, "value": json.dumps(v) if isinstance(v, (dict, list)) else v} for k, v in result.payload.items()]
        buf = io.StringIO()
        if rows:
            keys = list(dict.fromkeys(k for r in rows for k in r))
            w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: json.dumps(v) if isinstance(v, (dict, list)) else v for k, v in r.items()})
        return buf.getvalue()
    return result.text + "\n"


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        args.config_values = {}
        if getattr(args, "config", None):
            raw = read_config(args.config)
            args.config_values = {_CONFIG_ALIASES.get(k, k): v for k, v in raw.items()}
        for name, (conv, default) in GLOBALS.items():
            if getattr(args, name, None) is None:
                setattr(args, name, _opt(args, name, conv, default))
        if args.precision < 32 or args.precision > MAX_PRECISION:
            raise InvalidInput(f"precision must lie in 32..{MAX_PRECISION}")
        if args.trials < 1 or args.cap < 1:
            raise InvalidInput("trials and caps must be positive")
        if args.format not in ("text", "json", "csv"):
            raise InvalidInput(f"unknown format {args.format!r}")
        result = args.func(args)
    except UsageError as exc:
        print(str(exc), file=stderr)
        return EXIT_USAGE
    except (InvalidInput, ResourceLimit, IndexError) as exc:
        print(f"qmark: error: {exc}", file=stderr)
        return EXIT_USAGE
    except LemmaViolation as exc:
        print(f"qmark: verification failed: {exc}", file=stderr)
        return EXIT_FAIL
    except QmarkError as exc:
        print(f"qmark: error: {exc}", file=stderr)
        return EXIT_USAGE
    stdout.write(_render(result, args.format))
    return result.status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
