import random
from fractions import Fraction

import pytest

from equalshares import (
    UtilitySpec,
    ees,
    exponential_outcomes_instance,
    random_election,
)


class TestRandomElection:
    def test_seeded_determinism(self):
        a = random_election(random.Random(1))
        b = random_election(random.Random(1))
        assert a == b

    def test_every_project_approved(self):
        rng = random.Random(2)
        for _ in range(20):
            e = random_election(rng, n_range=(2, 15), m_range=(2, 10))
            for p in e.project_ids:
                assert len(e.approvers(p)) >= 1

    def test_costs_within_budget_bound(self):
        rng = random.Random(3)
        e = random_election(rng, budget_range=(20, 20))
        assert all(1 <= c <= 20 for c in e.costs.values())


class TestExponentialFamily:
    def test_structure(self):
        fam = exponential_outcomes_instance(3)
        e = fam.election
        m = 3
        assert e.n == 2 * m * m + m + m ** 3
        assert e.m == 2 * m
        # Main project i has 2m^2 + i approvers, decoys fill the rest.
        for i in range(1, m + 1):
            assert len(e.approvers(f"p{i}")) == 2 * m * m + i
            assert e.cost(f"p{i}") == 2 ** i * (2 * m * m + i)
            assert e.cost(f"a{i}") == 2 ** i * (m - i + m * m)
        # Core voters miss at most one main project.
        core = [v for v in e.voters if v.startswith("v")]
        mains = set(fam.main_projects)
        for v in core:
            assert len(mains - e.ballot(v)) <= 1

    def test_m_out_of_range(self):
        with pytest.raises(ValueError):
            exponential_outcomes_instance(1)
        with pytest.raises(ValueError):
            exponential_outcomes_instance(13)

    @pytest.mark.parametrize("m", [2, 3])
    def test_budget_ladder_realises_all_patterns(self, m):
        fam = exponential_outcomes_instance(m)
        u = UtilitySpec.cost(fam.election)
        outcomes = []
        for step, budget in enumerate(fam.budgets):
            w = ees(fam.election.with_budget(budget), u)
            pattern = frozenset(p for p in w.selected if p in fam.main_projects)
            assert pattern == fam.expected_pattern(step), step
            outcomes.append(frozenset(w.selected))
        assert len(set(outcomes)) == 2 ** m

    def test_top_budget_selects_every_main_project(self):
        fam = exponential_outcomes_instance(2)
        u = UtilitySpec.cost(fam.election)
        w = ees(fam.election.with_budget(fam.budgets[-1]), u)
        assert set(fam.main_projects) <= set(w.selected)
