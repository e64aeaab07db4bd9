import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from equalshares import (
    Election,
    UtilitySpec,
    non_monotone_instance,
    remark_example,
    worked_example,
)


@pytest.fixture
def worked() -> Election:
    return worked_example()


@pytest.fixture
def remark() -> Election:
    return remark_example()


@pytest.fixture
def non_monotone() -> Election:
    return non_monotone_instance()


def cardinal(e: Election) -> UtilitySpec:
    return UtilitySpec.cardinal(e)


def cost_u(e: Election) -> UtilitySpec:
    return UtilitySpec.cost(e)
