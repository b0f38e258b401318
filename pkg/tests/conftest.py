import sys

import pytest
from hypothesis import HealthCheck, settings

from normadd.cone import FiniteDiscrete, rational
from normadd.operators import DiscreteWeights, Permutation, WeightedCompositionOp

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def ab():
    return FiniteDiscrete(("a", "b"))


@pytest.fixture
def swap_op(ab):
    """tau = swap, h = (2, 1/2) on {a, b}."""
    return WeightedCompositionOp(ab, ab, Permutation(ab, ab, ("b", "a")),
                                 DiscreteWeights(ab, (rational(2), rational("1/2"))))


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in list(sys.modules.items())
                if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results):
            terminalreporter.write_line(results[key])
