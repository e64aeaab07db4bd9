"""Stability of equal-shares solutions: willingness to contribute,
instability certificates, and the per-project budget decomposition used by
the uniform-utility completion algorithms.

A solution is unstable when some project could be funded by strictly more
voters than currently pay for it, with every newcomer willing to
contribute the equal share.  "Willing" has two equivalent readings:

* cardinal: the share fits in the voter's leftover budget, or it is
  lexicographically below her largest current payment (she would rather
  deviate);
* uniform: the share fits in the total the voter spends on projects with
  worse bang per buck than the candidate would offer, plus her leftover.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Optional, Sequence

from .model import (
    Election,
    LeximaxPayment,
    Rational,
    Solution,
    UtilitySpec,
    lex_less,
    leximax,
)

WillingnessModel = Literal["cardinal", "uniform"]


@dataclass(frozen=True)
class InstabilityCertificate:
    """Witness that a project could be funded by more voters than pay now:
    `payers` approve the project, outnumber its current payer set, and all
    newcomers are willing to contribute ``per_voter_price``."""

    project: str
    payers: frozenset[str]
    per_voter_price: Rational


@dataclass(frozen=True)
class BudgetLists:
    """For a solution with selection order p_1, ..., p_w (strictly
    decreasing bang per buck), list i holds for every voter the total she
    spends on p_i, ..., p_w plus her leftover, sorted non-decreasing; list
    w+1 holds plain leftovers.

    Entries are ``(amount, voter id)``; ties are broken by voter input
    order.  Built back-to-front by adding each project's equal share to its
    payers' entries and merging the two sorted halves, O(mn) overall.
    """

    order: tuple[str, ...]
    bangs: tuple[Rational, ...]
    lists: tuple[tuple[tuple[Rational, str], ...], ...]

    @property
    def width(self) -> int:
        return len(self.order)

    def amount(self, index: int, voter: str) -> Rational:
        """Entry of ``voter`` in list ``index`` (0-based: 0..w)."""
        for amount, v in self.lists[index]:
            if v == voter:
                return amount
        raise KeyError(voter)

    def restricted_to(self, voters: set[str]) -> "BudgetLists":
        """The same lists filtered to a voter subset (order preserved)."""
        return BudgetLists(
            order=self.order,
            bangs=self.bangs,
            lists=tuple(tuple(e for e in lst if e[1] in voters) for lst in self.lists),
        )


def selection_bang(election: Election, solution: Solution, utility: UtilitySpec, project: str) -> Rational:
    """Bang per buck a selected project realises in the solution:
    u(p) * |payers| / cost(p)."""
    return utility.value(project) * len(solution.payers(project)) / election.cost(project)


def willing_cardinal(
    election: Election,
    solution: Solution,
    voter: str,
    amount: Rational,
    target: str,
) -> bool:
    """Cardinal willingness: the amount fits in the leftover budget, or the
    pair (amount, target) is lexicographically below the voter's leximax
    payment (deviating is preferable)."""
    if amount <= solution.leftovers[voter]:
        return True
    return lex_less(amount, target, leximax(election, solution, voter), election)


def _first_beaten_index(
    election: Election,
    lists: BudgetLists,
    utility: UtilitySpec,
    target: str,
    payer_count: int,
) -> int:
    """Smallest 0-based index i whose selected project the candidate bang
    per buck (with ``payer_count`` payers) strictly beats; ``w`` when it
    beats none (leftover list)."""
    candidate = utility.value(target) * payer_count / election.cost(target)
    target_pos = election.project_pos(target)
    for i, (bang, p) in enumerate(zip(lists.bangs, lists.order)):
        if candidate > bang or (candidate == bang and target_pos < election.project_pos(p)):
            return i
    return lists.width


def willing_uniform(
    election: Election,
    solution: Solution,
    utility: UtilitySpec,
    voter: str,
    payer_count: int,
    target: str,
) -> bool:
    """Uniform-utility willingness: with ``payer_count`` voters sharing the
    target's cost, the voter can cover her share from her leftover plus
    everything she spends on selected projects with strictly worse
    (bang per buck, tie order) than the target would offer."""
    if payer_count < 1:
        raise ValueError("payer count must be at least 1")
    share = election.cost(target) / payer_count
    available = solution.leftovers[voter]
    candidate = utility.value(target) * payer_count / election.cost(target)
    target_pos = election.project_pos(target)
    for p in solution.selected:
        bang = selection_bang(election, solution, utility, p)
        if candidate > bang or (candidate == bang and target_pos < election.project_pos(p)):
            available += solution.payment(voter, p)
    return available >= share


def build_budget_lists(election: Election, solution: Solution, utility: UtilitySpec) -> BudgetLists:
    """Compute the per-project budget decomposition for an equal-shares
    solution with recorded selection order."""
    order = tuple(solution.selected)
    bangs = tuple(selection_bang(election, solution, utility, p) for p in order)
    for k in range(len(order) - 1):
        a, b = bangs[k], bangs[k + 1]
        assert a > b or (
            a == b and election.project_pos(order[k]) < election.project_pos(order[k + 1])
        ), "selection order must have strictly decreasing (bang per buck, project)"

    def entry_key(entry: tuple[Rational, str]) -> tuple[Rational, int]:
        return (entry[0], election.voter_pos(entry[1]))

    current = sorted(((solution.leftovers[v], v) for v in election.voters), key=entry_key)
    lists = [tuple(current)]
    for p in reversed(order):
        per_voter = solution.payments[p]
        amounts = set(per_voter.values())
        assert len(amounts) == 1, "budget lists require an equal-shares solution"
        delta = next(iter(amounts))
        payers = [(a + delta, v) for (a, v) in current if v in per_voter]
        others = [e for e in current if e[1] not in per_voter]
        merged: list[tuple[Rational, str]] = []
        i = j = 0
        while i < len(payers) and j < len(others):
            if entry_key(payers[i]) <= entry_key(others[j]):
                merged.append(payers[i])
                i += 1
            else:
                merged.append(others[j])
                j += 1
        merged.extend(payers[i:])
        merged.extend(others[j:])
        current = merged
        lists.append(tuple(current))
    lists.reverse()
    return BudgetLists(order=order, bangs=bangs, lists=tuple(lists))


def willing_for_model(
    election: Election,
    solution: Solution,
    utility: UtilitySpec,
    model: WillingnessModel,
    voter: str,
    payer_count: int,
    target: str,
) -> bool:
    if model == "cardinal":
        share = election.cost(target) / payer_count
        return willing_cardinal(election, solution, voter, share, target)
    return willing_uniform(election, solution, utility, voter, payer_count, target)


def _willing_budget(
    election: Election,
    solution: Solution,
    utility: UtilitySpec,
    model: WillingnessModel,
    lists: BudgetLists,
    voter: str,
    payer_count: int,
    target: str,
) -> Rational:
    """Ranking key for certificate construction: the budget the voter can
    bring to the target at this payer count."""
    if model == "cardinal":
        leftover = solution.leftovers[voter]
        share = election.cost(target) / payer_count
        if share <= leftover:
            return leftover
        return leximax(election, solution, voter).amount
    index = _first_beaten_index(election, lists, utility, target, payer_count)
    return lists.amount(index, voter)


def find_certificate(
    election: Election,
    solution: Solution,
    utility: UtilitySpec,
    model: WillingnessModel = "uniform",
) -> Optional[InstabilityCertificate]:
    """Polynomial-time instability search: for each project and each payer
    count above the current one, count willing non-payers.  Willingness at
    a fixed (project, count) does not depend on who else joins, so the
    count test is exact.  Returns a certificate built from the richest
    willing voters, or None when the solution is stable."""
    lists = build_budget_lists(election, solution, utility) if model == "uniform" else None
    for p in election.project_ids:
        payers = set(solution.payers(p))
        outside = [v for v in election.approvers(p) if v not in payers]
        for t in range(len(payers) + 1, len(payers) + len(outside) + 1):
            need = t - len(payers)
            willing = [
                v
                for v in outside
                if willing_for_model(election, solution, utility, model, v, t, p)
            ]
            if len(willing) >= need:
                willing.sort(
                    key=lambda v: (
                        _willing_budget(election, solution, utility, model, lists, v, t, p),
                        -election.voter_pos(v),
                    ),
                    reverse=True,
                )
                chosen = payers | set(willing[:need])
                return InstabilityCertificate(
                    project=p,
                    payers=frozenset(chosen),
                    per_voter_price=election.cost(p) / t,
                )
    return None


def certificate_is_valid(
    election: Election,
    solution: Solution,
    utility: UtilitySpec,
    certificate: InstabilityCertificate,
    model: WillingnessModel = "uniform",
) -> bool:
    """Literal check of the instability definition for a given witness."""
    p = certificate.project
    payers_now = set(solution.payers(p))
    group = set(certificate.payers)
    if not group <= set(election.approvers(p)):
        return False
    if len(group) <= len(payers_now):
        return False
    if certificate.per_voter_price != election.cost(p) / len(group):
        return False
    return all(
        willing_for_model(election, solution, utility, model, v, len(group), p)
        for v in group - payers_now
    )
