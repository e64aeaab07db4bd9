"""Budget completion: minimal outcome-changing budget increases and the
virtual-budget sweep strategies built on them.

The core question answered here: given the Exact Equal Shares solution at
budget b, what is the smallest per-voter amount d > 0 such that rerunning
the rule at budget b + n*d produces a different solution (a new project,
or an existing project funded by more voters)?  ``gpc_cardinal`` answers
it for one project under cardinal utilities in O(n) after sorting;
``gpc_uniform`` handles general uniform utilities in O(m + n) given the
budget-list decomposition.  ``add_opt_cardinal`` / ``add_opt_uniform``
minimise over projects, and ``complete`` iterates the jumps into a full
sweep trace.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .model import Election, LeximaxPayment, Rational, Solution, UtilitySpec, leximax
from .rules import ees, mes
from .stability import BudgetLists, build_budget_lists


@dataclass(frozen=True)
class BudgetIncrement:
    """A per-voter budget increase; ``amount`` is None for the infinite
    sentinel (no increase changes anything for the probed projects)."""

    amount: Optional[Rational]
    project: Optional[str] = None

    @property
    def is_finite(self) -> bool:
        return self.amount is not None

    @classmethod
    def infinite(cls) -> "BudgetIncrement":
        return cls(None, None)

    def min_with(self, other: "BudgetIncrement", election: Election) -> "BudgetIncrement":
        """Pointwise minimum; equal amounts keep the project earlier in the
        tie-break order, so the result is independent of probe order."""
        if not other.is_finite:
            return self
        if not self.is_finite:
            return other
        if other.amount < self.amount:
            return other
        if other.amount == self.amount and self.project is not None and other.project is not None:
            if election.project_pos(other.project) < election.project_pos(self.project):
                return other
        return self


def sorted_leftover_list(election: Election, solution: Solution) -> list[tuple[Rational, str]]:
    """All voters' leftover budgets, sorted non-decreasing (ties by voter
    input order)."""
    return sorted(
        ((solution.leftovers[v], v) for v in election.voters),
        key=lambda e: (e[0], election.voter_pos(e[1])),
    )


def sorted_leximax_list(election: Election, solution: Solution) -> list[tuple[LeximaxPayment, str]]:
    """All voters' leximax payments, sorted lexicographically non-decreasing."""
    return sorted(
        ((leximax(election, solution, v), v) for v in election.voters),
        key=lambda e: (*e[0].sort_key(election), election.voter_pos(e[1])),
    )


def gpc_cardinal(
    election: Election,
    solution: Solution,
    project: str,
    sorted_leftovers: Sequence[tuple[Rational, str]],
    sorted_leximaxes: Sequence[tuple[LeximaxPayment, str]],
) -> BudgetIncrement:
    """Minimum per-voter increase after which ``project`` would be funded by
    strictly more voters than pay for it now (cardinal utilities).

    Both input lists range exactly over the project's approvers that do not
    currently pay for it, sorted non-decreasing.  Two pointers walk the
    leftover-budget and leximax-payment lists while the candidate buyer set
    shrinks from all approvers down to the current payers; each buyer must
    cover the per-voter price either from her (topped-up) leftover or by
    abandoning a lexicographically larger payment.
    """
    k = len(sorted_leftovers)
    if k != len(sorted_leximaxes):
        raise ValueError("leftover and leximax lists must cover the same voters")
    if k == 0:
        return BudgetIncrement.infinite()

    for idx in range(k - 1):
        if (sorted_leftovers[idx][0], election.voter_pos(sorted_leftovers[idx][1])) > (
            sorted_leftovers[idx + 1][0],
            election.voter_pos(sorted_leftovers[idx + 1][1]),
        ):
            raise ValueError("leftover budgets list is not sorted")
        if sorted_leximaxes[idx][0].sort_key(election) > sorted_leximaxes[idx + 1][0].sort_key(election):
            raise ValueError("leximax payments list is not sorted")

    cost = election.cost(project)
    payer_count = len(solution.payers(project))
    leximax_index = {voter: idx for idx, (_, voter) in enumerate(sorted_leximaxes)}

    in_liquid = [True] * k   # indexed like sorted_leftovers
    in_solvent = [False] * k  # indexed like sorted_leximaxes
    liquid = k
    solvent = 0
    i = 0  # next liquid candidate in the leftover list
    j = 0  # smallest-leximax solvent candidate
    best: Optional[Rational] = None
    iterations = 0

    while liquid + solvent > 0:
        iterations += 1
        assert iterations <= 2 * k, "buyer loop exceeded its 2|O_p| bound"
        price = cost / (payer_count + liquid + solvent)

        if j < k and sorted_leximaxes[j][0].sort_key(election) < (price, election.project_pos(project)):
            if in_solvent[j]:
                in_solvent[j] = False
                solvent -= 1
            j += 1
            continue

        assert i < k, "unstable input: buyers remain but the leftover list is exhausted"
        amount, voter = sorted_leftovers[i]
        c_i = sorted_leximaxes[leximax_index[voter]][0]
        if c_i.sort_key(election) > (price, election.project_pos(project)):
            # Willing via her leximax payment; park her among the solvent.
            assert leximax_index[voter] >= j, "voter re-entered the solvent set after removal"
            in_liquid[i] = False
            liquid -= 1
            in_solvent[leximax_index[voter]] = True
            solvent += 1
            i += 1
        else:
            candidate = price - amount
            assert candidate > 0, "stable input cannot yield a non-positive increase"
            if best is None or candidate < best:
                best = candidate
            in_liquid[i] = False
            liquid -= 1
            i += 1

    if best is None:
        return BudgetIncrement.infinite()
    return BudgetIncrement(best, project)


def restricted_to_non_payers(
    election: Election,
    solution: Solution,
    project: str,
    full_leftovers: Sequence[tuple[Rational, str]],
    full_leximaxes: Sequence[tuple[LeximaxPayment, str]],
) -> tuple[list[tuple[Rational, str]], list[tuple[LeximaxPayment, str]]]:
    """Filter the full sorted lists down to the project's approvers that do
    not pay for it (order, and hence sortedness, is preserved)."""
    payers = set(solution.payers(project))
    outside = {v for v in election.approvers(project) if v not in payers}
    return (
        [e for e in full_leftovers if e[1] in outside],
        [e for e in full_leximaxes if e[1] in outside],
    )


def add_opt_cardinal(election: Election, solution: Solution) -> BudgetIncrement:
    """Smallest per-voter increase changing the Exact Equal Shares solution
    under cardinal utilities: the minimum of ``gpc_cardinal`` over all
    projects (selected ones included, since their payer set can still
    grow)."""
    full_leftovers = sorted_leftover_list(election, solution)
    full_leximaxes = sorted_leximax_list(election, solution)
    best = BudgetIncrement.infinite()
    for p in election.project_ids:
        leftovers, leximaxes = restricted_to_non_payers(
            election, solution, p, full_leftovers, full_leximaxes
        )
        best = best.min_with(
            gpc_cardinal(election, solution, p, leftovers, leximaxes), election
        )
    return best


def gpc_uniform(
    election: Election,
    solution: Solution,
    utility: UtilitySpec,
    project: str,
    lists: BudgetLists,
) -> BudgetIncrement:
    """Minimum per-voter increase after which ``project`` gains payers,
    for uniform utilities.

    ``lists`` must be the budget-list decomposition restricted to the
    project's non-paying approvers.  For every prospective number of new
    payers l, the candidate bang per buck fixes which selected projects a
    voter would abandon, i.e. which list her available budget lives in;
    the binding voter is then the l-th richest entry of that list.  The
    list pointer only ever moves towards richer lists as l grows."""
    k = len(lists.lists[-1])
    if k == 0:
        return BudgetIncrement.infinite()

    cost = election.cost(project)
    unit = utility.value(project)
    payer_count = len(solution.payers(project))
    target_pos = election.project_pos(project)
    w = lists.width

    def beats(index: int, candidate: Rational) -> bool:
        bang = lists.bangs[index]
        if candidate != bang:
            return candidate > bang
        return target_pos < election.project_pos(lists.order[index])

    best: Optional[Rational] = None
    i = w  # 0-based list index; w denotes the plain-leftover list
    for extra in range(1, k + 1):
        t = payer_count + extra
        candidate_bang = unit * t / cost
        while i > 0 and beats(i - 1, candidate_bang):
            i -= 1
        available = lists.lists[i][k - extra][0]
        candidate = cost / t - available
        assert candidate > 0, "stable input cannot yield a non-positive increase"
        if best is None or candidate < best:
            best = candidate
    return BudgetIncrement(best, project)


def add_opt_uniform(
    election: Election,
    solution: Solution,
    utility: UtilitySpec,
    lists: Optional[BudgetLists] = None,
) -> BudgetIncrement:
    """Smallest per-voter increase changing the Exact Equal Shares solution
    under uniform utilities: builds the budget lists once, then minimises
    ``gpc_uniform`` over all projects."""
    if lists is None:
        lists = build_budget_lists(election, solution, utility)
    best = BudgetIncrement.infinite()
    for p in election.project_ids:
        payers = set(solution.payers(p))
        outside = {v for v in election.approvers(p) if v not in payers}
        best = best.min_with(
            gpc_uniform(election, solution, utility, p, lists.restricted_to(outside)),
            election,
        )
    return best


class Strategy(str, enum.Enum):
    ADD_ONE_MES = "add-one-mes"
    ADD_ONE_EES = "add-one-ees"
    ADD_OPT = "add-opt"
    ADD_OPT_SKIP = "add-opt-skip"


class StopRule(str, enum.Enum):
    FIRST_OVERSPEND = "first-overspend"
    ALL_SELECTED = "all-selected"


class StopReason(str, enum.Enum):
    ALL_PROJECTS_SELECTED = "all-projects-selected"
    OVERSPEND_STOP = "overspend-stop"
    NO_MORE_BREAKPOINTS = "no-more-breakpoints"
    ITERATION_CAP = "iteration-cap"


#: Default iteration caps; unit-step sweeps may need thousands of probes.
ADD_ONE_CAP = 100_000
ADD_OPT_CAP = 50_000


@dataclass(frozen=True)
class SweepEntry:
    virtual_budget: Rational
    solution: Solution
    cost: Rational
    efficiency: Rational
    feasible: bool


@dataclass(frozen=True)
class SweepTrace:
    """Record of one completion run: every probed virtual budget with the
    solution found there, plus why the sweep stopped."""

    strategy: Strategy
    stop_rule: StopRule
    true_budget: Rational
    entries: tuple[SweepEntry, ...]
    stop_reason: StopReason
    gpc_probes: int = 0

    @property
    def executions(self) -> int:
        """Base-rule invocations (one per probed virtual budget)."""
        return len(self.entries)

    def feasible_entries(self) -> list[SweepEntry]:
        return [e for e in self.entries if e.feasible]

    def last_feasible(self) -> SweepEntry:
        feasible = self.feasible_entries()
        if not feasible:
            raise ValueError("trace has no feasible entry")
        return feasible[-1]

    def best_feasible(self) -> SweepEntry:
        feasible = self.feasible_entries()
        if not feasible:
            raise ValueError("trace has no feasible entry")
        best = feasible[0]
        for e in feasible[1:]:
            if e.efficiency > best.efficiency:
                best = e
        return best

    def result(self) -> SweepEntry:
        """The entry defining the strategy's outcome: the last feasible one
        for first-overspend sweeps (mirroring how the sweep is used in
        practice), the best feasible one otherwise."""
        if self.stop_rule is StopRule.FIRST_OVERSPEND:
            return self.last_feasible()
        return self.best_feasible()


def trace_to_csv(trace: SweepTrace) -> str:
    """Serialise a sweep trace: budgets and costs as exact fraction
    strings, efficiency as a decimal for plotting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["virtual_budget", "cost_of_W", "efficiency", "feasible", "projects"])
    for e in trace.entries:
        writer.writerow(
            [
                str(e.virtual_budget),
                str(e.cost),
                f"{float(e.efficiency):.6f}",
                str(e.feasible).lower(),
                ";".join(e.solution.selected),
            ]
        )
    return buf.getvalue()


def _increment_over(
    election: Election,
    solution: Solution,
    utility: UtilitySpec,
    projects: Iterable[str],
    cardinal_engine: bool,
) -> tuple[BudgetIncrement, int]:
    """Minimal increase over a set of probe projects; returns the increment
    and the number of per-project probes performed."""
    probes = 0
    best = BudgetIncrement.infinite()
    if cardinal_engine:
        full_leftovers = sorted_leftover_list(election, solution)
        full_leximaxes = sorted_leximax_list(election, solution)
        for p in projects:
            leftovers, leximaxes = restricted_to_non_payers(
                election, solution, p, full_leftovers, full_leximaxes
            )
            best = best.min_with(gpc_cardinal(election, solution, p, leftovers, leximaxes), election)
            probes += 1
    else:
        lists = build_budget_lists(election, solution, utility)
        for p in projects:
            payers = set(solution.payers(p))
            outside = {v for v in election.approvers(p) if v not in payers}
            best = best.min_with(
                gpc_uniform(election, solution, utility, p, lists.restricted_to(outside)),
                election,
            )
            probes += 1
    return best, probes


def complete(
    election: Election,
    utility: Optional[UtilitySpec] = None,
    strategy: Strategy | str = Strategy.ADD_OPT,
    stop_rule: StopRule | str = StopRule.FIRST_OVERSPEND,
    iteration_cap: Optional[int] = None,
    increment_unit: Rational = Fraction(1),
) -> SweepTrace:
    """Run a completion sweep over virtual budgets.

    * add-one-*: virtual budgets b, b + n*unit, b + 2n*unit, ... running the
      base rule (MES or Exact Equal Shares) at each.
    * add-opt: jump by the provably minimal outcome-changing per-voter
      increase; every solution change in the range is visited.
    * add-opt-skip: like add-opt but probing only currently unselected
      projects, repeated until every project has appeared in some visited
      outcome (or all remaining probes are infinite).

    Under ``first-overspend`` the sweep additionally stops at the first
    virtual budget whose outcome costs more than the true budget.
    """
    strategy = Strategy(strategy)
    stop_rule = StopRule(stop_rule)
    if utility is None:
        utility = UtilitySpec.cardinal(election)
    if iteration_cap is None:
        iteration_cap = ADD_ONE_CAP if strategy in (Strategy.ADD_ONE_MES, Strategy.ADD_ONE_EES) else ADD_OPT_CAP

    base_rule: Callable[[Election, UtilitySpec], Solution]
    base_rule = mes if strategy is Strategy.ADD_ONE_MES else ees
    cardinal_engine = utility.is_cardinal
    all_projects = set(election.project_ids)
    true_budget = election.budget

    entries: list[SweepEntry] = []
    seen: set[str] = set()
    gpc_probes = 0
    current = election
    stop_reason: Optional[StopReason] = None

    while True:
        solution = base_rule(current, utility)
        cost = solution.selected_cost(election)
        feasible = cost <= true_budget
        efficiency = Fraction(0) if true_budget == 0 else cost / true_budget
        entries.append(
            SweepEntry(
                virtual_budget=current.budget,
                solution=solution,
                cost=cost,
                efficiency=efficiency,
                feasible=feasible,
            )
        )
        seen.update(solution.selected)

        if stop_rule is StopRule.FIRST_OVERSPEND and not feasible:
            stop_reason = StopReason.OVERSPEND_STOP
            break
        if strategy is Strategy.ADD_OPT_SKIP:
            if seen == all_projects:
                stop_reason = StopReason.ALL_PROJECTS_SELECTED
                break
        elif set(solution.selected) == all_projects:
            stop_reason = StopReason.ALL_PROJECTS_SELECTED
            break
        if len(entries) >= iteration_cap:
            stop_reason = StopReason.ITERATION_CAP
            break

        if strategy in (Strategy.ADD_ONE_MES, Strategy.ADD_ONE_EES):
            next_budget = current.budget + election.n * increment_unit
        else:
            if strategy is Strategy.ADD_OPT_SKIP:
                probe_set = [p for p in election.project_ids if p not in solution.selected]
            else:
                probe_set = list(election.project_ids)
            increment, probes = _increment_over(current, solution, utility, probe_set, cardinal_engine)
            gpc_probes += probes
            if not increment.is_finite:
                stop_reason = StopReason.NO_MORE_BREAKPOINTS
                break
            next_budget = current.budget + election.n * increment.amount
        current = election.with_budget(next_budget)

    return SweepTrace(
        strategy=strategy,
        stop_rule=stop_rule,
        true_budget=true_budget,
        entries=tuple(entries),
        stop_reason=stop_reason,
        gpc_probes=gpc_probes,
    )


def hybrid_max(election: Election, utility: Optional[UtilitySpec] = None) -> Solution:
    """Run MES with unit budget increases (stopping at the first overspend)
    and Exact Equal Shares with the skipping jump strategy, and return the
    feasible outcome with the higher spending efficiency; ties go to the
    Exact Equal Shares result."""
    if utility is None:
        utility = UtilitySpec.cardinal(election)
    mes_trace = complete(election, utility, Strategy.ADD_ONE_MES, StopRule.FIRST_OVERSPEND)
    ees_trace = complete(election, utility, Strategy.ADD_OPT_SKIP, StopRule.ALL_SELECTED)
    mes_entry = mes_trace.result()
    ees_entry = ees_trace.result()
    if mes_entry.efficiency > ees_entry.efficiency:
        return mes_entry.solution
    return ees_entry.solution
