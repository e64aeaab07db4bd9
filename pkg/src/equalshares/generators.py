"""Instance generators: seeded random elections for the benchmark corpus
and engineered instances with known behaviour.

``exponential_outcomes_instance`` builds a family where varying only the
budget makes the rule produce exponentially many distinct outcomes: m main
projects whose selection pattern tracks the binary expansion of the budget
step, padded with decoy projects that soak up the money of voters who skip
one main project.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .model import Election, Rational


def random_election(
    rng: random.Random,
    n_range: tuple[int, int] = (10, 200),
    m_range: tuple[int, int] = (3, 20),
    budget_range: tuple[int, int] = (50, 500),
    approval_range: tuple[float, float] = (0.1, 0.5),
    max_cost: Optional[int] = None,
) -> Election:
    """Seeded random approval election: integer budget, integer costs
    uniform in [1, budget] (or [1, max_cost]), and a per-instance approval
    probability drawn from ``approval_range``.  Every project is guaranteed
    at least one approver; voters may end up with empty ballots."""
    n = rng.randint(*n_range)
    m = rng.randint(*m_range)
    budget = rng.randint(*budget_range)
    cost_cap = max_cost if max_cost is not None else budget
    prob = rng.uniform(*approval_range)

    projects = [(f"p{k + 1}", rng.randint(1, cost_cap)) for k in range(m)]
    voters = [f"v{k + 1}" for k in range(n)]
    ballots: dict[str, set[str]] = {v: set() for v in voters}
    for v in voters:
        for p, _ in projects:
            if rng.random() < prob:
                ballots[v].add(p)
    for p, _ in projects:
        if not any(p in ballots[v] for v in voters):
            ballots[rng.choice(voters)].add(p)
    return Election.create(projects=projects, ballots=ballots, budget=budget, voters=voters)


def random_small_election(
    rng: random.Random,
    max_n: int = 12,
    max_m: int = 6,
    max_budget: int = 30,
) -> Election:
    """Small instances for the brute-force oracles."""
    return random_election(
        rng,
        n_range=(2, max_n),
        m_range=(2, max_m),
        budget_range=(3, max_budget),
        approval_range=(0.2, 0.6),
    )


def benchmark_corpus_election(rng: random.Random) -> Election:
    """One instance of the completion-benchmark corpus, shaped like real
    participatory-budgeting data: a core of cheap, widely approved projects
    whose payer sets churn across many budget increases, two expensive
    low-support projects that eventually tip the outcome over the true
    budget, and one budget-sized project backed by two voters that unit
    stepping crawls towards but a certificate jump reaches at once."""
    n = rng.randint(80, 120)
    budget = 3 * n // 2
    core_m = rng.randint(6, 8)
    projects = [
        (f"c{k + 1}", rng.randint(max(2, budget // 12), budget // 7)) for k in range(core_m)
    ]
    total_core = sum(c for _, c in projects)
    if total_core > int(0.95 * budget):  # keep the core jointly affordable
        scale = 0.95 * budget / total_core
        projects = [(p, max(2, int(c * scale))) for p, c in projects]
    projects += [(f"t{k + 1}", rng.randint(int(0.55 * budget), int(0.8 * budget))) for k in range(2)]
    projects.append(("anchor", budget))

    voters = [f"v{k + 1}" for k in range(n)]
    ballots: dict[str, set[str]] = {v: set() for v in voters}
    for v in voters:
        for p, _ in projects:
            if p.startswith("c") and rng.random() < 0.3:
                ballots[v].add(p)
            elif p.startswith("t") and rng.random() < 0.08:
                ballots[v].add(p)
    for v in rng.sample(voters, 2):
        ballots[v].add("anchor")
    for p, _ in projects:
        if not any(p in ballots[v] for v in voters):
            ballots[rng.choice(voters)].add(p)
    return Election.create(projects=projects, ballots=ballots, budget=budget, voters=voters)


def worked_example() -> Election:
    """Five voters, three projects (costs 2, 16/5, 6), budget 10.  The base
    equal-shares outcome funds the first two projects; the third joins at a
    per-voter increase of exactly 1/2."""
    return Election.create(
        projects=[("p1", 2), ("p2", Fraction(16, 5)), ("p3", 6)],
        ballots={
            "v1": {"p1"},
            "v2": {"p1", "p3"},
            "v3": {"p2", "p3"},
            "v4": {"p2", "p3"},
            "v5": {"p3"},
        },
        budget=10,
    )


def remark_example() -> Election:
    """Three voters, four projects (costs 2, 98, 100, 51), budget 150.
    Probing only the cheapest-to-add project is misleading here: the
    per-project minimum for p4 is 51, yet a global increase of 1 (via p2)
    already changes the outcome to {p1, p2, p4}."""
    return Election.create(
        projects=[("p1", 2), ("p2", 98), ("p3", 100), ("p4", 51)],
        ballots={
            "v1": {"p1", "p2"},
            "v2": {"p2", "p3"},
            "v3": {"p3", "p4"},
        },
        budget=150,
    )


def fractional_breakpoint_instance() -> Election:
    """Integer costs, yet the first outcome-changing per-voter increase is
    1/2: the outcome at that half-step (both supporters pick up the second
    project) never occurs at any whole-unit budget, where a third project
    is already affordable too."""
    return Election.create(
        projects=[("q", 3), ("p", 4), ("r", 4)],
        ballots={
            "v1": {"r"},
            "v2": {"q", "p"},
            "v3": {"q", "p"},
        },
        budget=9,
    )


def non_monotone_instance() -> Election:
    """Sweep shape: cheap filler first (efficiency 0.17), then an
    overspending outcome at the first jump, then a feasible 0.99-efficiency
    outcome at a later budget where the big project displaces the
    overspender by draining its supporters."""
    return Election.create(
        projects=[("filler", 12), ("overspender", 60), ("saviour", 57)],
        ballots={
            "v1": {"overspender"},
            "v2": {"overspender", "saviour"},
            "v3": {"overspender", "saviour"},
            "v4": {"filler", "saviour"},
            "v5": {"filler", "saviour"},
        },
        budget=70,
    )


@dataclass(frozen=True)
class ExponentialFamily:
    """An election plus the budget ladder realising 2**m distinct outcomes.

    ``budgets[k]`` makes the rule (under cost utilities) select exactly the
    main projects whose bit is set in k; outcomes are pairwise distinct.
    Costs are scaled by the voter count so the published file stays
    integer-valued; outcomes are invariant under that scaling.
    """

    election: Election
    budgets: tuple[Rational, ...]
    main_projects: tuple[str, ...]

    def expected_pattern(self, step: int) -> frozenset[str]:
        return frozenset(
            self.main_projects[j] for j in range(len(self.main_projects)) if step >> j & 1
        )


def exponential_outcomes_instance(m: int) -> ExponentialFamily:
    """Build the m-bit family: n = 2m^2 + m + m^3 voters, main projects
    p_1..p_m with cost 2^i (2m^2 + i), decoys a_1..a_m with cost
    2^i (m - i + m^2), and budgets 2kn for k = 0..2^m - 1.

    Main project p_i is approved by 2m^2 + i voters of the core group V
    (|V| = 2m^2 + m); each core voter misses at most one main project and
    approves the matching decoy instead.  Decoy a_i additionally has its
    own block of m^2 dedicated voters.
    """
    if not 2 <= m <= 12:
        raise ValueError("m must be between 2 and 12")
    core_size = 2 * m * m + m
    n = core_size + m ** 3

    projects: list[tuple[str, int]] = []
    for i in range(1, m + 1):
        projects.append((f"p{i}", 2 ** i * (2 * m * m + i)))
    for i in range(1, m + 1):
        projects.append((f"a{i}", 2 ** i * (m - i + m * m)))

    core = [f"v{k + 1}" for k in range(core_size)]
    ballots: dict[str, set[str]] = {v: {f"p{i}" for i in range(1, m + 1)} for v in core}
    # Main project p_i must be missed by exactly m - i core voters, all
    # distinct across projects (sum m(m-1)/2 < |V|), who approve the decoy.
    cursor = 0
    for i in range(1, m + 1):
        for _ in range(m - i):
            voter = core[cursor]
            cursor += 1
            ballots[voter].discard(f"p{i}")
            ballots[voter].add(f"a{i}")

    voters = list(core)
    for i in range(1, m + 1):
        for k in range(m * m):
            voter = f"d{i}_{k + 1}"
            voters.append(voter)
            ballots[voter] = {f"a{i}"}

    election = Election.create(
        projects=projects,
        ballots=ballots,
        budget=2 * (2 ** m - 1) * n,
        voters=voters,
    )
    budgets = tuple(Fraction(2 * k * n) for k in range(2 ** m))
    return ExponentialFamily(
        election=election,
        budgets=budgets,
        main_projects=tuple(f"p{i}" for i in range(1, m + 1)),
    )
