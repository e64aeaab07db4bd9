"""Command-line front end.

Subcommands: ``run`` (one rule on one file), ``sweep`` (emit a completion
trace as CSV), ``gen-exp`` (write the exponential-outcomes instance),
``compare`` (benchmark the completion methods over a directory of ``.pb``
files), and ``check`` (run the brute-force oracles against the fast
algorithms on one instance).  Exact rationals everywhere; decimals appear
only in printed reports and CSV efficiency columns.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import statistics
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .completion import (
    ADD_ONE_CAP,
    ADD_OPT_CAP,
    StopReason,
    StopRule,
    Strategy,
    SweepTrace,
    add_opt_cardinal,
    add_opt_uniform,
    complete,
    trace_to_csv,
)
from .generators import exponential_outcomes_instance
from .model import Election, Rational, Solution, UtilitySpec, validate_solution
from .oracles import (
    InstanceTooLarge,
    MAX_EXHAUSTIVE_VOTERS,
    check_ejr1,
    oracle_instability_exhaustive,
    oracle_next_change,
)
from .pabulib import (
    PabulibError,
    election_to_instance,
    read_pb,
    to_election,
    write_pb,
    write_results_csv,
)
from .rules import ees, greedy_approval, mes
from .stability import find_certificate

logger = logging.getLogger(__name__)

#: Probe budget for the quadratic/exponential oracles in ``check``.
ORACLE_VOTER_LIMIT = MAX_EXHAUSTIVE_VOTERS
ORACLE_PROJECT_LIMIT = 10


def _utility(election: Election, name: str) -> UtilitySpec:
    if name == "cardinal":
        return UtilitySpec.cardinal(election)
    if name == "cost":
        return UtilitySpec.cost(election)
    raise ValueError(f"unknown utility model {name!r}")


def _load_election(path: str) -> Election:
    instance = read_pb(path)
    election = to_election(instance)
    for message in instance.warnings:
        print(f"warning: {message}", file=sys.stderr)
    return election


def _fmt(value: Rational) -> str:
    return str(value.numerator) if value.denominator == 1 else str(value)


def cmd_run(args: argparse.Namespace) -> int:
    election = _load_election(args.file)
    utility = _utility(election, args.utility)
    if args.rule == "ees":
        solution = ees(election, utility)
    elif args.rule == "mes":
        solution = mes(election, utility)
    else:
        solution = greedy_approval(election)

    print(f"rule: {args.rule}  utility: {args.utility}")
    print(f"selected ({len(solution.selected)}): {', '.join(solution.selected) or '(none)'}")
    for p in solution.selected:
        payers = solution.payers(p)
        if payers:
            sample = solution.payment(payers[0], p)
            print(f"  {p}: cost {_fmt(election.cost(p))}, {len(payers)} payers, {_fmt(sample)} each")
        else:
            print(f"  {p}: cost {_fmt(election.cost(p))} (payments not defined by this rule)")
    eff = solution.spending_efficiency(election)
    print(f"spending efficiency: {_fmt(eff)} ({float(eff):.4f})")

    if args.rule == "greedy":
        print("validation: skipped (greedy approval defines no payments)")
        return 0
    violations = validate_solution(election, solution, equal_shares=args.rule == "ees")
    if violations:
        print("validation FAILED:")
        for v in violations:
            print(f"  - {v}")
        return 1
    print("validation: ok")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    election = _load_election(args.file)
    utility = _utility(election, args.utility)
    trace = complete(
        election,
        utility,
        strategy=args.strategy,
        stop_rule=args.stop,
        iteration_cap=args.cap,
        increment_unit=Fraction(args.unit),
    )
    out = Path(args.out)
    out.write_text(trace_to_csv(trace), encoding="utf-8")
    result = trace.result()
    print(
        f"{trace.executions} executions, stop: {trace.stop_reason.value}, "
        f"best virtual budget {_fmt(result.virtual_budget)}, "
        f"efficiency {float(result.efficiency):.4f}"
    )
    print(f"trace written to {out}")
    if trace.stop_reason is StopReason.ITERATION_CAP:
        print("error: iteration cap reached before the sweep finished", file=sys.stderr)
        return 2
    return 0


def cmd_gen_exp(args: argparse.Namespace) -> int:
    family = exponential_outcomes_instance(args.m)
    out = Path(args.out)
    write_pb(election_to_instance(family.election, {"description": f"exponential-outcomes family (m={args.m})"}), out)
    manifest = {
        "m": args.m,
        "voters": family.election.n,
        "projects": family.election.m,
        "main_projects": list(family.main_projects),
        "budgets": [_fmt(b) for b in family.budgets],
        "expected_patterns": [sorted(family.expected_pattern(k)) for k in range(len(family.budgets))],
        "utility": "cost",
    }
    manifest_path = out.with_suffix(out.suffix + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"instance written to {out} ({family.election.n} voters, {family.election.m} projects)")
    print(f"manifest with {len(family.budgets)} budgets written to {manifest_path}")
    return 0


#: The six completion methods benchmarked by ``compare``: (rule, strategy).
COMPARE_METHODS = (
    ("mes", "add-one"),
    ("mes", "add-one-c"),
    ("ees", "add-opt"),
    ("ees", "add-opt-c"),
    ("ees", "add-opt-skip"),
    ("hybrid", "max"),
)


def _run_method(election: Election, utility: UtilitySpec, rule: str, strategy: str, cap: Optional[int]):
    """Run one completion method; returns (traces tuple, result entry)."""
    single = {
        ("mes", "add-one"): (Strategy.ADD_ONE_MES, StopRule.FIRST_OVERSPEND),
        ("mes", "add-one-c"): (Strategy.ADD_ONE_MES, StopRule.ALL_SELECTED),
        ("ees", "add-opt"): (Strategy.ADD_OPT, StopRule.FIRST_OVERSPEND),
        ("ees", "add-opt-c"): (Strategy.ADD_OPT, StopRule.ALL_SELECTED),
        ("ees", "add-opt-skip"): (Strategy.ADD_OPT_SKIP, StopRule.ALL_SELECTED),
    }
    if (rule, strategy) in single:
        strat, stop = single[(rule, strategy)]
        trace = complete(election, utility, strat, stop, cap)
        return (trace,), trace.result()
    if (rule, strategy) == ("hybrid", "max"):
        mes_trace = complete(election, utility, Strategy.ADD_ONE_MES, StopRule.FIRST_OVERSPEND, cap)
        ees_trace = complete(election, utility, Strategy.ADD_OPT_SKIP, StopRule.ALL_SELECTED, cap)
        mes_entry, ees_entry = mes_trace.result(), ees_trace.result()
        winner = mes_entry if mes_entry.efficiency > ees_entry.efficiency else ees_entry
        return (mes_trace, ees_trace), winner
    raise ValueError(f"unknown method {rule}+{strategy}")


def _increments(trace: SweepTrace, n: int) -> list[Fraction]:
    budgets = [e.virtual_budget for e in trace.entries]
    return [(b2 - b1) / n for b1, b2 in zip(budgets, budgets[1:])]


def _first_overspend_budget(trace: SweepTrace) -> Optional[Fraction]:
    for e in trace.entries:
        if not e.feasible:
            return e.virtual_budget
    return None


def cmd_compare(args: argparse.Namespace) -> int:
    directory = Path(args.directory)
    files = sorted(directory.glob("*.pb"))
    rows: list[dict] = []
    per_method: dict[tuple[str, str], list[tuple[float, float]]] = {m: [] for m in COMPARE_METHODS}
    add_opt_increments: list[Fraction] = []
    fractional_instances = 0
    non_monotone_instances = 0

    for path in files:
        try:
            election = to_election(read_pb(path))
            utility = _utility(election, args.utility)
        except (PabulibError, ValueError) as exc:
            logger.error("skipping %s: %s", path.name, exc)
            continue
        for rule, strategy in COMPARE_METHODS:
            start = time.perf_counter()
            traces, entry = _run_method(election, utility, rule, strategy, args.cap)
            elapsed = time.perf_counter() - start
            executions = sum(t.executions for t in traces)
            probes = sum(t.gpc_probes for t in traces)
            rows.append(
                {
                    "instance": path.name,
                    "rule": rule,
                    "strategy": strategy,
                    "executions": executions,
                    "gpc_probes": probes,
                    "efficiency": f"{float(entry.efficiency):.6f}",
                    "wall_time_s": f"{elapsed:.4f}",
                    "best_virtual_budget": _fmt(entry.virtual_budget),
                }
            )
            per_method[(rule, strategy)].append((executions, float(entry.efficiency)))
            if (rule, strategy) == ("ees", "add-opt-c"):
                trace = traces[0]
                increments = _increments(trace, election.n)
                add_opt_increments.extend(increments)
                if any(d < 1 for d in increments):
                    fractional_instances += 1
                overspend = _first_overspend_budget(trace)
                if overspend is not None and trace.best_feasible().virtual_budget > overspend:
                    non_monotone_instances += 1

    for rule, strategy in COMPARE_METHODS:
        data = per_method[(rule, strategy)]
        if not data:
            continue
        execs = [d[0] for d in data]
        effs = [d[1] for d in data]
        rows.append(
            {
                "instance": "__aggregate__",
                "rule": rule,
                "strategy": strategy,
                "executions": f"{statistics.fmean(execs):.1f}",
                "gpc_probes": "",
                "efficiency": f"{statistics.fmean(effs):.6f}",
                "wall_time_s": "",
                "best_virtual_budget": "",
            }
        )
        print(
            f"{rule + '+' + strategy:18s} avg ex {statistics.fmean(execs):8.1f}  med ex {statistics.median(execs):8.1f}  "
            f"std ex {statistics.pstdev(execs):8.1f}  avg eff {statistics.fmean(effs):.3f}  "
            f"med eff {statistics.median(effs):.3f}  std eff {statistics.pstdev(effs):.3f}"
        )

    if add_opt_increments:
        floats = [float(d) for d in add_opt_increments]
        print(
            f"add-opt per-voter increments: mean {statistics.fmean(floats):.2f}, "
            f"median {statistics.median(floats):.2f} "
            f"({fractional_instances} instances with an increment < 1, "
            f"{non_monotone_instances} with the best budget past the first overspend)"
        )
    write_results_csv(rows, args.out)
    print(f"{len(files)} files, results written to {args.out}")
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    election = _load_election(args.file)
    utility = _utility(election, args.utility)
    solution = ees(election, utility)
    failures = 0

    def report(name: str, ok: Optional[bool], detail: str = "") -> None:
        nonlocal failures
        if ok is None:
            print(f"SKIP {name}: {detail}")
            return
        if not ok:
            failures += 1
        print(f"{'PASS' if ok else 'FAIL'} {name}{': ' + detail if detail else ''}")

    report("price-system", not validate_solution(election, solution))
    report("stability (greedy search)", find_certificate(election, solution, utility) is None)

    if election.n <= ORACLE_VOTER_LIMIT:
        cert = oracle_instability_exhaustive(election, solution, utility)
        report("stability (exhaustive)", cert is None)
    else:
        report("stability (exhaustive)", None, f"more than {ORACLE_VOTER_LIMIT} voters")

    if election.m <= ORACLE_PROJECT_LIMIT and (2 ** election.m) * election.n <= 10_000_000:
        violation = check_ejr1(election, utility, solution.selected)
        report("EJR1", violation is None, "" if violation is None else str(violation))
    else:
        report("EJR1", None, "bundle enumeration too large")

    if election.n <= ORACLE_VOTER_LIMIT and election.m <= ORACLE_PROJECT_LIMIT:
        fast = (
            add_opt_cardinal(election, solution)
            if utility.is_cardinal
            else add_opt_uniform(election, solution, utility)
        )
        slow = oracle_next_change(election, utility, solution)
        ok = fast.amount == slow.amount
        detail = f"next change d = {_fmt(fast.amount) if fast.is_finite else 'infinite'}"
        report("next-budget-change vs oracle", ok, detail)
    else:
        report("next-budget-change vs oracle", None, "instance too large for the oracle")

    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equalshares",
        description="Exact Equal Shares rules, completion heuristics, and verification oracles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one rule on a .pb file")
    p_run.add_argument("file")
    p_run.add_argument("--rule", choices=["ees", "mes", "greedy"], default="ees")
    p_run.add_argument("--utility", choices=["cardinal", "cost"], default="cardinal")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="emit a virtual-budget sweep trace as CSV")
    p_sweep.add_argument("file")
    p_sweep.add_argument("--utility", choices=["cardinal", "cost"], default="cardinal")
    p_sweep.add_argument(
        "--strategy",
        choices=[s.value for s in Strategy],
        default=Strategy.ADD_OPT.value,
    )
    p_sweep.add_argument("--stop", choices=[s.value for s in StopRule], default=StopRule.ALL_SELECTED.value)
    p_sweep.add_argument("--cap", type=int, default=None)
    p_sweep.add_argument("--unit", default="1", help="per-voter increment for add-one strategies")
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_gen = sub.add_parser("gen-exp", help="generate the exponential-outcomes instance")
    p_gen.add_argument("m", type=int)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen_exp)

    p_cmp = sub.add_parser("compare", help="benchmark completion methods over a directory of .pb files")
    p_cmp.add_argument("directory")
    p_cmp.add_argument("--utility", choices=["cardinal", "cost"], default="cardinal")
    p_cmp.add_argument("--cap", type=int, default=None)
    p_cmp.add_argument("--out", required=True)
    p_cmp.set_defaults(func=cmd_compare)

    p_chk = sub.add_parser("check", help="cross-check the fast algorithms against the oracles")
    p_chk.add_argument("file")
    p_chk.add_argument("--utility", choices=["cardinal", "cost"], default="cardinal")
    p_chk.set_defaults(func=cmd_check)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PabulibError, FileNotFoundError, ValueError, InstanceTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
