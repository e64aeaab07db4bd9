"""Exact Equal Shares participatory budgeting: rules, efficient budget
completion, and brute-force verification oracles."""

from .model import (
    Election,
    ElectionError,
    LeximaxPayment,
    Rational,
    Solution,
    UtilitySpec,
    as_rational,
    leximax,
    validate_solution,
)
from .rules import BangPerBuck, SortedBudgetList, ees, greedy_approval, mes
from .stability import (
    BudgetLists,
    InstabilityCertificate,
    build_budget_lists,
    certificate_is_valid,
    find_certificate,
    willing_cardinal,
    willing_for_model,
    willing_uniform,
)
from .completion import (
    BudgetIncrement,
    StopReason,
    StopRule,
    Strategy,
    SweepEntry,
    SweepTrace,
    add_opt_cardinal,
    add_opt_uniform,
    complete,
    gpc_cardinal,
    gpc_uniform,
    hybrid_max,
    sorted_leftover_list,
    sorted_leximax_list,
    trace_to_csv,
)
from .oracles import (
    EJR1Violation,
    InstanceTooLarge,
    candidate_increments,
    check_ejr1,
    oracle_instability_exhaustive,
    oracle_next_change,
)
from .pabulib import (
    PabulibError,
    PabulibInstance,
    election_to_instance,
    parse_pb,
    read_pb,
    serialize_pb,
    to_election,
    write_pb,
)
from .generators import (
    ExponentialFamily,
    benchmark_corpus_election,
    exponential_outcomes_instance,
    fractional_breakpoint_instance,
    non_monotone_instance,
    random_election,
    random_small_election,
    remark_example,
    worked_example,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
