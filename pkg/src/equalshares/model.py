"""Core data model: elections, utilities, solutions, and payment validation.

All monetary quantities are exact rationals (`fractions.Fraction`).  No
floating point is used anywhere in rule computation; floats only appear in
reporting layers.  Every type in this module is immutable after
construction and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

#: All exact arithmetic goes through this alias.  ``fractions.Fraction``
#: already guarantees lowest terms and a positive denominator.
Rational = Fraction

RationalLike = Union[Rational, int, str]


def as_rational(value: RationalLike) -> Rational:
    """Convert ints, decimal strings ("3.2") or fraction strings ("16/5")
    to an exact rational."""
    return Fraction(value)


class ElectionError(ValueError):
    """Raised for structurally invalid elections or solutions."""


@dataclass(frozen=True)
class Election:
    """An approval-based budget-allocation election.

    Projects and voters keep their input order; the tie-breaking order on
    projects is exactly the order of ``project_ids``, and ties between
    voters (e.g. equal leftover budgets in sorted lists) are broken by
    voter input position.
    """

    project_ids: tuple[str, ...]
    costs: Mapping[str, Rational]
    voters: tuple[str, ...]
    ballots: Mapping[str, frozenset[str]]
    budget: Rational
    _project_pos: Mapping[str, int] = field(repr=False, compare=False, default=None)  # type: ignore[assignment]
    _voter_pos: Mapping[str, int] = field(repr=False, compare=False, default=None)  # type: ignore[assignment]
    _approvers: Mapping[str, tuple[str, ...]] = field(repr=False, compare=False, default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if len(self.voters) < 1:
            raise ElectionError("an election needs at least one voter")
        if len(set(self.project_ids)) != len(self.project_ids):
            raise ElectionError("duplicate project ids")
        if len(set(self.voters)) != len(self.voters):
            raise ElectionError("duplicate voter ids")
        if self.budget < 0:
            raise ElectionError("budget must be nonnegative")
        for p in self.project_ids:
            if p not in self.costs:
                raise ElectionError(f"project {p!r} has no cost")
            if self.costs[p] < 0:
                raise ElectionError(f"project {p!r} has negative cost")
        if self._project_pos is None:
            object.__setattr__(self, "_project_pos", {p: k for k, p in enumerate(self.project_ids)})
            object.__setattr__(self, "_voter_pos", {v: k for k, v in enumerate(self.voters)})
            approvers: dict[str, list[str]] = {p: [] for p in self.project_ids}
            for v in self.voters:
                for p in self.ballots.get(v, ()):
                    if p not in approvers:
                        raise ElectionError(f"ballot of {v!r} references unknown project {p!r}")
                    approvers[p].append(v)
            for p, sup in approvers.items():
                if not sup:
                    raise ElectionError(f"project {p!r} is approved by no voter")
            object.__setattr__(self, "_approvers", {p: tuple(sup) for p, sup in approvers.items()})

    @classmethod
    def create(
        cls,
        projects: Sequence[tuple[str, RationalLike]],
        ballots: Mapping[str, Iterable[str]],
        budget: RationalLike,
        voters: Optional[Sequence[str]] = None,
    ) -> "Election":
        """Build an election from ``(project id, cost)`` pairs and per-voter
        approval sets.  ``voters`` fixes the voter order; by default the
        ballot mapping's insertion order is used."""
        voter_list = tuple(voters) if voters is not None else tuple(ballots.keys())
        return cls(
            project_ids=tuple(p for p, _ in projects),
            costs={p: as_rational(c) for p, c in projects},
            voters=voter_list,
            ballots={v: frozenset(ballots.get(v, ())) for v in voter_list},
            budget=as_rational(budget),
        )

    @property
    def n(self) -> int:
        return len(self.voters)

    @property
    def m(self) -> int:
        return len(self.project_ids)

    @property
    def share(self) -> Rational:
        """Each voter's equal share of the budget."""
        return self.budget / self.n

    def cost(self, project: str) -> Rational:
        return self.costs[project]

    def total_cost(self, projects: Iterable[str]) -> Rational:
        return sum((self.costs[p] for p in projects), Fraction(0))

    def approvers(self, project: str) -> tuple[str, ...]:
        """Voters approving ``project``, in voter input order."""
        return self._approvers[project]

    def ballot(self, voter: str) -> frozenset[str]:
        return self.ballots[voter]

    def project_pos(self, project: str) -> int:
        """Position of ``project`` in the tie-breaking order (smaller wins ties)."""
        return self._project_pos[project]

    def voter_pos(self, voter: str) -> int:
        return self._voter_pos[voter]

    def with_budget(self, budget: RationalLike) -> "Election":
        """The same election at a different (e.g. virtual) budget."""
        return Election(
            project_ids=self.project_ids,
            costs=self.costs,
            voters=self.voters,
            ballots=self.ballots,
            budget=as_rational(budget),
            _project_pos=self._project_pos,
            _voter_pos=self._voter_pos,
            _approvers=self._approvers,
        )

    def scaled(self, factor: RationalLike) -> "Election":
        """Scale all costs and the budget by a positive factor (a currency
        change); approvals and orders are untouched."""
        lam = as_rational(factor)
        if lam <= 0:
            raise ElectionError("scale factor must be positive")
        return Election(
            project_ids=self.project_ids,
            costs={p: c * lam for p, c in self.costs.items()},
            voters=self.voters,
            ballots=self.ballots,
            budget=self.budget * lam,
            _project_pos=self._project_pos,
            _voter_pos=self._voter_pos,
            _approvers=self._approvers,
        )


@dataclass(frozen=True)
class UtilitySpec:
    """A uniform utility function over projects: every approver of ``p``
    derives ``values[p]`` from it, everyone else zero."""

    values: Mapping[str, Rational]

    @classmethod
    def cardinal(cls, election: Election) -> "UtilitySpec":
        """One unit of utility per approved project."""
        return cls({p: Fraction(1) for p in election.project_ids})

    @classmethod
    def cost(cls, election: Election) -> "UtilitySpec":
        """Utility equal to project cost."""
        return cls(dict(election.costs))

    def value(self, project: str) -> Rational:
        return self.values[project]

    def total(self, projects: Iterable[str]) -> Rational:
        return sum((self.values[p] for p in projects), Fraction(0))

    def voter_utility(self, election: Election, voter: str, projects: Iterable[str]) -> Rational:
        ballot = election.ballot(voter)
        return sum((self.values[p] for p in projects if p in ballot), Fraction(0))

    @property
    def is_cardinal(self) -> bool:
        return all(v == 1 for v in self.values.values())


@dataclass(frozen=True)
class Solution:
    """Outcome of a rule: selected projects (in selection order), the sparse
    payment matrix, per-voter leftover budgets and the per-voter share.

    Payments are stored per project; only strictly positive payments are
    recorded.  Rules that do not define payments (Greedy Approval) leave
    ``payments`` empty and only ``selected`` is meaningful.
    """

    selected: tuple[str, ...]
    payments: Mapping[str, Mapping[str, Rational]]
    leftovers: Mapping[str, Rational]
    share: Rational

    def payers(self, project: str) -> tuple[str, ...]:
        """Voters with a positive payment towards ``project``."""
        return tuple(self.payments.get(project, {}))

    def payment(self, voter: str, project: str) -> Rational:
        return self.payments.get(project, {}).get(voter, Fraction(0))

    def voter_payments(self, voter: str) -> dict[str, Rational]:
        return {p: m[voter] for p, m in self.payments.items() if voter in m}

    def selected_cost(self, election: Election) -> Rational:
        return election.total_cost(self.selected)

    def spending_efficiency(self, election: Election) -> Rational:
        """Fraction of the true budget covered by the selected projects."""
        if election.budget == 0:
            return Fraction(0)
        return self.selected_cost(election) / election.budget

    def same_allocation(self, other: "Solution") -> bool:
        """True when both solutions select the same project set with
        identical payment matrices (selection order is ignored)."""
        if set(self.selected) != set(other.selected):
            return False
        if set(self.payments) != set(other.payments):
            return False
        return all(dict(self.payments[p]) == dict(other.payments[p]) for p in self.payments)


@dataclass(frozen=True)
class LeximaxPayment:
    """A voter's largest single payment, paired with the tie-break-maximal
    project attaining it.  ``project`` is None for voters who pay nothing."""

    amount: Rational
    project: Optional[str]

    def sort_key(self, election: Election) -> tuple[Rational, int]:
        pos = -1 if self.project is None else election.project_pos(self.project)
        return (self.amount, pos)


def lex_less(amount: Rational, project: Optional[str], other: LeximaxPayment, election: Election) -> bool:
    """Strict lexicographic comparison of payment pairs: first by amount,
    then by the project tie-break order."""
    pos = -1 if project is None else election.project_pos(project)
    return (amount, pos) < other.sort_key(election)


def leximax(election: Election, solution: Solution, voter: str) -> LeximaxPayment:
    """The voter's maximum payment and the tie-break-maximal project
    attaining it; ``(0, None)`` for voters who pay for nothing."""
    if voter not in election._voter_pos:
        raise ElectionError(f"unknown voter {voter!r}")
    best: Optional[LeximaxPayment] = None
    for project, per_voter in solution.payments.items():
        amount = per_voter.get(voter)
        if amount is None:
            continue
        if (
            best is None
            or amount > best.amount
            or (amount == best.amount and election.project_pos(project) > election.project_pos(best.project))
        ):
            best = LeximaxPayment(amount, project)
    return best if best is not None else LeximaxPayment(Fraction(0), None)


def validate_solution(
    election: Election,
    solution: Solution,
    *,
    equal_shares: bool = True,
) -> list[str]:
    """Check every price-system condition and return human-readable
    descriptions of all violations (an empty list means the solution is a
    valid price system).

    ``equal_shares=False`` skips the equal-split check; use it for rules
    whose payments are legitimately unequal.
    """
    violations: list[str] = []
    selected_set = set(solution.selected)

    if len(selected_set) != len(solution.selected):
        violations.append("selected projects contain duplicates")
    for p in solution.selected:
        if p not in election._project_pos:
            violations.append(f"selected project {p} does not exist")

    spent: dict[str, Rational] = {v: Fraction(0) for v in election.voters}
    for project, per_voter in solution.payments.items():
        if project not in election._project_pos:
            violations.append(f"payment references unknown project {project}")
            continue
        if project not in selected_set:
            violations.append(f"positive payment for unselected project {project}")
        amounts = []
        for voter, amount in per_voter.items():
            if voter not in election._voter_pos:
                violations.append(f"payment references unknown voter {voter}")
                continue
            if amount <= 0:
                violations.append(f"non-positive recorded payment of {voter} for {project}: {amount}")
            if project not in election.ballot(voter):
                violations.append(f"voter {voter} pays for unapproved project {project}")
            spent[voter] += amount
            amounts.append(amount)
        covered = sum(amounts, Fraction(0))
        if project in selected_set and covered != election.cost(project):
            violations.append(
                f"payments for {project} sum to {covered}, cost is {election.cost(project)}"
            )
        if equal_shares and amounts and any(a != amounts[0] for a in amounts):
            low, high = min(amounts), max(amounts)
            violations.append(f"equal-shares broken at {project}: payments range from {low} to {high}")

    share = election.share
    for voter in election.voters:
        if spent[voter] > share:
            violations.append(f"voter {voter} spends {spent[voter]}, share is only {share}")
        leftover = solution.leftovers.get(voter)
        if leftover is None:
            violations.append(f"missing leftover budget for voter {voter}")
        else:
            if leftover != share - spent[voter]:
                violations.append(
                    f"leftover of {voter} is {leftover}, expected {share - spent[voter]}"
                )
            if leftover < 0:
                violations.append(f"negative leftover for voter {voter}: {leftover}")

    total = election.total_cost(selected_set)
    if total > election.budget:
        violations.append(f"selected set costs {total}, budget is {election.budget}")
    return violations
