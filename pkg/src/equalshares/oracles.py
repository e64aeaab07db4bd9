"""Independent brute-force references for the fast algorithms.

Everything here is deliberately naive and kept separate from the
production code paths: the next-budget-change oracle reruns the full rule
at every candidate threshold, the instability oracle enumerates voter
subsets literally, and the proportionality checker enumerates project
bundles.  They exist to be tested against, not to be fast; guards reject
instances beyond desk scale.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

from .completion import BudgetIncrement
from .model import Election, Rational, Solution, UtilitySpec, leximax
from .rules import ees
from .stability import (
    InstabilityCertificate,
    WillingnessModel,
    build_budget_lists,
    willing_for_model,
)

#: Size guards for the exhaustive searches.
MAX_EXHAUSTIVE_VOTERS = 15
MAX_EJR_PROJECTS = 15


class InstanceTooLarge(ValueError):
    """Raised when an instance exceeds an oracle's brute-force guard."""


def candidate_increments(
    election: Election,
    utility: UtilitySpec,
    solution: Solution,
) -> list[Rational]:
    """Every per-voter increase at which some voter's ability to join some
    project's payer group can flip.

    A change point always has the form cost(p)/t minus a budget level the
    voter could bring: one of her aggregated budgets from the list
    decomposition (uniform willingness), her plain leftover, or her leximax
    amount (cardinal willingness).  Enumerating all (project, group size,
    voter, level) combinations therefore covers every possible breakpoint.
    """
    lists = build_budget_lists(election, solution, utility)
    w = lists.width
    levels: dict[str, set[Rational]] = {}
    for v in election.voters:
        vals = {lists.amount(i, v) for i in range(w + 1)}
        vals.add(solution.leftovers[v])
        vals.add(leximax(election, solution, v).amount)
        levels[v] = vals

    out: set[Rational] = set()
    for p in election.project_ids:
        cost = election.cost(p)
        supporters = election.approvers(p)
        for t in range(1, len(supporters) + 1):
            share = cost / t
            for v in supporters:
                for level in levels[v]:
                    d = share - level
                    if d > 0:
                        out.add(d)
    return sorted(out)


def oracle_next_change(
    election: Election,
    utility: UtilitySpec,
    solution: Solution,
) -> BudgetIncrement:
    """Reference for the minimal outcome-changing increase: rerun the full
    rule at budget b + n*d for every candidate d in ascending order and
    report the first d whose solution differs."""
    for d in candidate_increments(election, utility, solution):
        probe = ees(election.with_budget(election.budget + election.n * d), utility)
        if not probe.same_allocation(solution):
            return BudgetIncrement(d, None)
    return BudgetIncrement.infinite()


def oracle_instability_exhaustive(
    election: Election,
    solution: Solution,
    utility: UtilitySpec,
    model: WillingnessModel = "uniform",
) -> Optional[InstabilityCertificate]:
    """Literal instability search: enumerate, for every project, every
    superset of its payer group within its approvers, and check each
    newcomer's willingness directly."""
    if election.n > MAX_EXHAUSTIVE_VOTERS:
        raise InstanceTooLarge(
            f"exhaustive instability search is limited to {MAX_EXHAUSTIVE_VOTERS} voters"
        )
    for p in election.project_ids:
        payers = set(solution.payers(p))
        outside = [v for v in election.approvers(p) if v not in payers]
        for extra in range(1, len(outside) + 1):
            t = len(payers) + extra
            share = election.cost(p) / t
            for combo in itertools.combinations(outside, extra):
                if all(willing_for_model(election, solution, utility, model, v, t, p) for v in combo):
                    return InstabilityCertificate(
                        project=p,
                        payers=frozenset(payers) | frozenset(combo),
                        per_voter_price=share,
                    )
    return None


@dataclass(frozen=True)
class EJR1Violation:
    """A project bundle and the minimal cohesive group size witnessing that
    the outcome under-serves the bundle's common supporters."""

    projects: frozenset[str]
    cohesive_size: int


def _cohesive_threshold(election: Election, bundle_cost: Rational) -> Optional[int]:
    """Smallest group size t with t * b / n >= bundle cost, or None when the
    budget is zero and the cost positive."""
    if election.budget == 0:
        return None if bundle_cost > 0 else 1
    return max(1, math.ceil(bundle_cost * election.n / election.budget))


def check_ejr1(
    election: Election,
    utility: UtilitySpec,
    outcome,
) -> Optional[EJR1Violation]:
    """Check the up-to-one-project representation guarantee by brute force.

    For every nonempty bundle T of projects: a group is cohesive for T when
    all members approve all of T and the group's pooled share covers T's
    cost.  The outcome fails for T when at least one cohesive group exists
    whose members all fall short: no member can reach u(T) even after
    adding her favourite missing project of T to the outcome (for fully
    selected bundles the member's outcome utility itself must reach u(T),
    which holds trivially).  Willingness of a member depends only on the
    bundle, so counting failing common supporters against the minimal
    cohesive size decides existence exactly.
    """
    if election.m > MAX_EJR_PROJECTS:
        raise InstanceTooLarge(f"bundle enumeration is limited to {MAX_EJR_PROJECTS} projects")
    selected = set(outcome)
    utility_of_outcome = {
        v: utility.voter_utility(election, v, selected) for v in election.voters
    }
    for size in range(1, election.m + 1):
        for bundle in itertools.combinations(election.project_ids, size):
            threshold = _cohesive_threshold(election, election.total_cost(bundle))
            if threshold is None:
                continue
            common = [v for v in election.voters if set(bundle) <= election.ballot(v)]
            if len(common) < threshold:
                continue
            missing = [p for p in bundle if p not in selected]
            if not missing:
                continue  # bundle fully selected: every common supporter reaches u(T)
            bundle_value = utility.total(bundle)
            best_addition = max(utility.value(p) for p in missing)
            failing = sum(
                1 for v in common if utility_of_outcome[v] + best_addition < bundle_value
            )
            if failing >= threshold:
                return EJR1Violation(projects=frozenset(bundle), cohesive_size=threshold)
    return None
