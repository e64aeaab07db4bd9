"""Aggregation rules: Greedy Approval, Exact Equal Shares, and the Method
of Equal Shares.

The Exact Equal Shares rule repeatedly funds the project whose approvers
can split its cost equally at the best utility-per-money rate ("bang per
buck").  It is implemented over a sorted leftover-budget list that is
split and merged between rounds, so a full run costs O(m^2 n) exact
rational operations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .model import Election, ElectionError, Rational, Solution, UtilitySpec


@dataclass(frozen=True)
class BangPerBuck:
    """Utility per unit of per-voter payment, |V| * u(p) / cost(p), with the
    project carried along for tie-breaking."""

    value: Rational
    project: str

    def beats(self, other: "BangPerBuck", election: Election) -> bool:
        """Strict "better" comparison: larger value wins, ties go to the
        project earlier in the tie-break order."""
        if self.value != other.value:
            return self.value > other.value
        return election.project_pos(self.project) < election.project_pos(other.project)


@dataclass(frozen=True)
class SortedBudgetList:
    """Leftover budgets sorted non-decreasing (ties by voter input order).

    ``entries`` holds ``(budget, voter position)`` pairs; updating after a
    purchase splits the list into payers and non-payers and merges the two
    still-sorted halves back together in linear time.
    """

    entries: tuple[tuple[Rational, int], ...]

    @classmethod
    def uniform(cls, election: Election) -> "SortedBudgetList":
        share = election.share
        return cls(tuple((share, k) for k in range(election.n)))

    def charge(self, payer_positions: set[int], delta: Rational) -> "SortedBudgetList":
        """Subtract ``delta`` from every payer and re-merge."""
        payers = [(b - delta, v) for (b, v) in self.entries if v in payer_positions]
        others = [e for e in self.entries if e[1] not in payer_positions]
        merged: list[tuple[Rational, int]] = []
        i = j = 0
        while i < len(payers) and j < len(others):
            if payers[i] <= others[j]:
                merged.append(payers[i])
                i += 1
            else:
                merged.append(others[j])
                j += 1
        merged.extend(payers[i:])
        merged.extend(others[j:])
        return SortedBudgetList(tuple(merged))

    def budgets_by_voter(self) -> dict[int, Rational]:
        return {v: b for (b, v) in self.entries}


def _require_positive_costs(election: Election) -> None:
    # Bang-per-buck and the MES payment rate divide by cost, so the rules
    # (unlike the data model) cannot accept free projects.
    for p in election.project_ids:
        if election.cost(p) == 0:
            raise ElectionError(f"project {p!r} has zero cost; rules require positive costs")


def greedy_approval(election: Election) -> Solution:
    """Pick projects in decreasing order of approval count (ties by input
    order), skipping any project that no longer fits the remaining budget.

    Payments are undefined for this rule: the returned solution has an
    empty payment matrix and untouched leftovers; only ``selected`` is
    meaningful.
    """
    order = sorted(
        election.project_ids,
        key=lambda p: (-len(election.approvers(p)), election.project_pos(p)),
    )
    remaining = election.budget
    selected: list[str] = []
    for p in order:
        if election.cost(p) <= remaining:
            selected.append(p)
            remaining -= election.cost(p)
    share = election.share
    return Solution(
        selected=tuple(selected),
        payments={},
        leftovers={v: share for v in election.voters},
        share=share,
    )


def _best_group(
    entries: tuple[tuple[Rational, int], ...],
    approver_positions: set[int],
    cost: Rational,
) -> Optional[int]:
    """Largest suffix of the sorted approver budgets that can split ``cost``
    equally; returns the group size or None when no group can afford it.

    Scanning for the first index whose budget covers the equal share of the
    remaining suffix yields the cheapest per-voter price, hence the best
    bang per buck this project can offer.
    """
    budgets = [b for (b, v) in entries if v in approver_positions]
    k = len(budgets)
    for j, b in enumerate(budgets):
        if b * (k - j) >= cost:
            return k - j
    return None


def ees(election: Election, utility: Optional[UtilitySpec] = None) -> Solution:
    """Exact Equal Shares: every funded project is paid for by the largest
    group of approvers that can split its cost equally, and projects are
    bought in order of decreasing bang per buck (|V| * u(p) / cost(p)),
    ties broken by input order.  Defaults to cardinal utilities.
    """
    _require_positive_costs(election)
    if utility is None:
        utility = UtilitySpec.cardinal(election)

    budgets = SortedBudgetList.uniform(election)
    approver_pos = {
        p: {election.voter_pos(v) for v in election.approvers(p)} for p in election.project_ids
    }
    pending = list(election.project_ids)
    selected: list[str] = []
    payments: dict[str, dict[str, Rational]] = {}

    while True:
        best: Optional[BangPerBuck] = None
        best_size = 0
        for p in pending:
            size = _best_group(budgets.entries, approver_pos[p], election.cost(p))
            if size is None:
                continue
            bang = BangPerBuck(size * utility.value(p) / election.cost(p), p)
            if best is None or bang.beats(best, election):
                best = bang
                best_size = size
        if best is None:
            break

        p = best.project
        price = election.cost(p) / best_size
        # The chosen group is the suffix of the sorted approver budgets.
        group = [v for (b, v) in budgets.entries if v in approver_pos[p]][-best_size:]
        group_set = set(group)
        payments[p] = {election.voters[v]: price for v in sorted(group_set)}
        budgets = budgets.charge(group_set, price)
        selected.append(p)
        pending.remove(p)

    by_pos = budgets.budgets_by_voter()
    return Solution(
        selected=tuple(selected),
        payments=payments,
        leftovers={election.voters[k]: by_pos[k] for k in range(election.n)},
        share=election.share,
    )


def _mes_rate(sorted_budgets: list[Rational], unit: Rational, cost: Rational) -> Optional[Rational]:
    """Minimal payment rate rho with sum(min(budget, rho * unit)) == cost,
    or None when even all leftovers together cannot cover the cost.

    ``sorted_budgets`` must be ascending; voters below the rate contribute
    their whole leftover, the rest pay rho * unit each.
    """
    total = sum(sorted_budgets, Fraction(0))
    if total < cost:
        return None
    prefix = Fraction(0)
    k = len(sorted_budgets)
    for s in range(k):
        rho = (cost - prefix) / ((k - s) * unit)
        if rho * unit <= sorted_budgets[s]:
            return rho
        prefix += sorted_budgets[s]
    # Reachable only when total == cost exactly and all voters saturate.
    return sorted_budgets[-1] / unit


def mes(election: Election, utility: Optional[UtilitySpec] = None) -> Solution:
    """Method of Equal Shares: like Exact Equal Shares, but an approver who
    cannot afford the common payment rate contributes her entire leftover
    budget instead.  Each round funds the project with the smallest rate
    rho solving sum(min(r_i, rho * u(p))) = cost(p), ties by input order.

    The returned payments are generally *not* equal-shares; validate with
    ``equal_shares=False``.
    """
    _require_positive_costs(election)
    if utility is None:
        utility = UtilitySpec.cardinal(election)

    budgets: dict[str, Rational] = {v: election.share for v in election.voters}
    pending = list(election.project_ids)
    selected: list[str] = []
    payments: dict[str, dict[str, Rational]] = {}

    while True:
        best_rho: Optional[Rational] = None
        best_p: Optional[str] = None
        for p in pending:
            unit = utility.value(p)
            if unit == 0:
                continue  # zero utility never clears a positive cost
            supporters = election.approvers(p)
            rho = _mes_rate(sorted(budgets[v] for v in supporters), unit, election.cost(p))
            if rho is None:
                continue
            if best_rho is None or rho < best_rho or (
                rho == best_rho and election.project_pos(p) < election.project_pos(best_p)
            ):
                best_rho, best_p = rho, p
        if best_p is None:
            break

        unit = utility.value(best_p)
        charge: dict[str, Rational] = {}
        for v in election.approvers(best_p):
            amount = min(budgets[v], best_rho * unit)
            if amount > 0:
                charge[v] = amount
                budgets[v] -= amount
        payments[best_p] = charge
        selected.append(best_p)
        pending.remove(best_p)

    return Solution(
        selected=tuple(selected),
        payments=payments,
        leftovers=dict(budgets),
        share=election.share,
    )
