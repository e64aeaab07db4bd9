"""Naive reference implementations used only by the tests.

These mirror the rule definitions as directly as possible (dict budgets,
re-sorting every round, literal per-voter feasibility checks) so that the
production implementations' sorted-list maintenance and pointer tricks are
checked against something that cannot share their bugs.
"""

from __future__ import annotations

from fractions import Fraction

from equalshares import Election, Solution, UtilitySpec


def naive_ees(election: Election, utility: UtilitySpec) -> Solution:
    """Round-based rerun: each round, for every pending project, find the
    largest group of approvers all of whom can pay the equal split, by
    checking group sizes from largest to smallest against freshly sorted
    budgets."""
    budgets = {v: election.share for v in election.voters}
    pending = list(election.project_ids)
    selected: list[str] = []
    payments: dict[str, dict[str, Fraction]] = {}

    while True:
        best = None  # (bang, -pos) maximised
        for p in pending:
            cost = election.cost(p)
            supporters = sorted(
                election.approvers(p), key=lambda v: (budgets[v], election.voter_pos(v))
            )
            group = None
            for size in range(len(supporters), 0, -1):
                candidates = supporters[-size:]
                if all(budgets[v] >= cost / size for v in candidates):
                    group = candidates
                    break
            if group is None:
                continue
            bang = len(group) * utility.value(p) / cost
            key = (bang, -election.project_pos(p))
            if best is None or key > best[0]:
                best = (key, p, group)
        if best is None:
            break
        _, p, group = best
        price = election.cost(p) / len(group)
        payments[p] = {v: price for v in sorted(group, key=election.voter_pos)}
        for v in group:
            budgets[v] -= price
        selected.append(p)
        pending.remove(p)

    return Solution(
        selected=tuple(selected),
        payments=payments,
        leftovers=dict(budgets),
        share=election.share,
    )


def naive_greedy(election: Election) -> list[str]:
    """Greedy approval by repeated argmax instead of sorting."""
    remaining = election.budget
    pending = list(election.project_ids)
    out: list[str] = []
    while pending:
        best = min(
            pending,
            key=lambda p: (-len(election.approvers(p)), election.project_pos(p)),
        )
        pending.remove(best)
        if election.cost(best) <= remaining:
            out.append(best)
            remaining -= election.cost(best)
    return out


def grid_next_change(
    election: Election,
    utility: UtilitySpec,
    solution: Solution,
    samples: int = 1000,
    span: Fraction = Fraction(4),
) -> Fraction | None:
    """Secondary sanity probe: scan a uniform grid of per-voter increases
    and report the first grid point whose rerun differs.  Only an upper
    bound on the true change point (the grid may skip it)."""
    from equalshares import ees

    for k in range(1, samples + 1):
        d = span * k / samples
        probe = ees(election.with_budget(election.budget + election.n * d), utility)
        if not probe.same_allocation(solution):
            return d
    return None
