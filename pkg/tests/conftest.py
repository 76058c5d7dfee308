import pytest

from urnsearch import PriorKind, build_problem


@pytest.fixture
def greedy_trap():
    """Two independent urns where the greedy order is suboptimal:
    N=(1,2), marginals (9/16, 1). Optimal cost 1/2, greedy cost 21/32."""
    return build_problem(
        [("u1", 1), ("u2", 2)], PriorKind.INDEPENDENT, {"u1": 9 / 16, "u2": 1.0}
    )


@pytest.fixture
def correlated_three():
    """Three single-marble urns, all marginals 1/2, all higher joints 1/3.
    Positively correlated at the start; one blue draw flips the sign."""
    joints = {
        ("u1", "u2"): 1 / 3,
        ("u1", "u3"): 1 / 3,
        ("u2", "u3"): 1 / 3,
        ("u1", "u2", "u3"): 1 / 3,
    }
    return build_problem(
        [("u1", 1), ("u2", 1), ("u3", 1)],
        PriorKind.GENERAL,
        {"u1": 0.5, "u2": 0.5, "u3": 0.5},
        joints,
    )


@pytest.fixture
def lopsided_single():
    """Single-marble pair: N=(2,1), marginals (0.6, 0.4)."""
    return build_problem([("u1", 2), ("u2", 1)], PriorKind.SINGLE_MARBLE, {"u1": 0.6, "u2": 0.4})
