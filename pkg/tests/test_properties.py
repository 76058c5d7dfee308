"""Property-based tests for the probabilistic invariants of the dynamics.

Strategies generate problems whose priors are consistent by construction
(general-kind priors are derived from an explicit placement distribution),
so every generated instance passes validation.
"""

import itertools
import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from urnsearch import (
    PriorKind,
    SearchState,
    build_problem,
    draw_distribution,
    placement_distribution,
    posterior,
    prior_probability,
    survival,
    validate,
)

MIN_SURVIVAL = 1e-6


@st.composite
def problems(draw, kinds=(PriorKind.INDEPENDENT, PriorKind.SINGLE_MARBLE, PriorKind.GENERAL)):
    n = draw(st.integers(min_value=1, max_value=4))
    counts = draw(st.lists(st.integers(1, 3), min_size=n, max_size=n))
    urns = [(f"u{i + 1}", c) for i, c in enumerate(counts)]
    labels = [label for label, _ in urns]
    kind = draw(st.sampled_from(kinds))
    prob = st.floats(0.05, 1.0, allow_nan=False, allow_infinity=False)

    if kind is PriorKind.INDEPENDENT:
        marginals = {label: draw(prob) for label in labels}
        return build_problem(urns, kind, marginals)

    if kind is PriorKind.SINGLE_MARBLE:
        raw = [draw(prob) for _ in labels]
        scale = draw(st.floats(0.2, 1.0)) / sum(raw)
        return build_problem(urns, kind, {l: r * scale for l, r in zip(labels, raw)})

    subsets = []
    for r in range(len(labels) + 1):
        subsets.extend(frozenset(c) for c in itertools.combinations(labels, r))
    weights = {s: draw(prob) for s in subsets}
    total = sum(weights.values())
    atoms = {s: w / total for s, w in weights.items()}

    def phi(subset):
        return sum(p for placed, p in atoms.items() if subset <= placed)

    marginals = {label: phi(frozenset([label])) for label in labels}
    joints = {tuple(sorted(s)): phi(s) for s in subsets if len(s) >= 2}
    return build_problem(urns, kind, marginals, joints or None)


@st.composite
def problem_and_state(draw, **kwargs):
    problem = draw(problems(**kwargs))
    counts = tuple(draw(st.integers(0, u.marbles)) for u in problem.urns)
    state = SearchState(counts)
    assume(survival(problem, state) > MIN_SURVIVAL)
    return problem, state


@st.composite
def problem_and_walk(draw, **kwargs):
    """A problem plus a shuffled full draw sequence."""
    problem = draw(problems(**kwargs))
    seq = []
    for i, urn in enumerate(problem.urns):
        seq.extend([i] * urn.marbles)
    return problem, tuple(draw(st.permutations(seq)))


@settings(max_examples=50, deadline=None)
@given(problems())
def test_generated_problems_always_validate(problem):
    report = validate(problem)
    assert report.ok, report.violations


@settings(max_examples=50, deadline=None)
@given(problems())
def test_placement_distribution_sums_to_one(problem):
    total = math.fsum(o.probability for o in placement_distribution(problem))
    assert abs(total - 1.0) <= 1e-9
    assert all(o.probability >= 0.0 for o in placement_distribution(problem))


@settings(max_examples=50, deadline=None)
@given(problems())
def test_prior_recovery_at_fresh_state(problem):
    fresh = SearchState.fresh(problem)
    for subset in range(1 << problem.n_urns):
        assert posterior(problem, fresh, subset) == pytest.approx(
            prior_probability(problem, subset), abs=1e-12
        )


@settings(max_examples=50, deadline=None)
@given(problem_and_state(kinds=(PriorKind.INDEPENDENT,)))
def test_independence_preserved_at_every_state(case):
    problem, state = case
    marginals = [posterior(problem, state, 1 << i) for i in range(problem.n_urns)]
    for subset in range(1 << problem.n_urns):
        product = math.prod(marginals[i] for i in range(problem.n_urns) if subset >> i & 1)
        assert posterior(problem, state, subset) == pytest.approx(product, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(problem_and_walk(kinds=(PriorKind.INDEPENDENT,)))
def test_non_queried_marginals_never_move(case):
    problem, seq = case
    state = SearchState.fresh(problem)
    for urn in seq:
        if survival(problem, state) <= MIN_SURVIVAL:
            break
        before = [posterior(problem, state, 1 << i) for i in range(problem.n_urns)]
        next_state = state.after_draw(urn)
        if survival(problem, next_state) <= MIN_SURVIVAL:
            break
        for i in range(problem.n_urns):
            if i != urn:
                assert posterior(problem, next_state, 1 << i) == pytest.approx(
                    before[i], abs=1e-9
                )
        state = next_state


@settings(max_examples=60, deadline=None)
@given(problem_and_walk())
def test_queried_subset_probability_never_rises(case):
    # any subset containing the queried urn loses probability on a blue
    # draw, strictly unless it was already 0 or the urn was certain
    problem, seq = case
    state = SearchState.fresh(problem)
    for urn in seq:
        if survival(problem, state) <= MIN_SURVIVAL:
            break
        next_state = state.after_draw(urn)
        if survival(problem, next_state) <= MIN_SURVIVAL:
            break
        p_urn = posterior(problem, state, 1 << urn)
        for subset in range(1 << problem.n_urns):
            if not subset >> urn & 1:
                continue
            before = posterior(problem, state, subset)
            after = posterior(problem, next_state, subset)
            assert after <= before + 1e-12
            if before > 1e-9 and p_urn < 1.0 - 1e-9:
                assert after < before
        state = next_state


@settings(max_examples=60, deadline=None)
@given(problem_and_walk())
def test_repeat_draw_red_probability_rises(case):
    problem, seq = case
    state = SearchState.fresh(problem)
    for urn in seq:
        if survival(problem, state) <= MIN_SURVIVAL:
            break
        next_state = state.after_draw(urn)
        if survival(problem, next_state) <= MIN_SURVIVAL:
            break
        if problem.urns[urn].marbles - state.drawn[urn] >= 2:
            before = draw_distribution(problem, state, urn).p_red
            after = draw_distribution(problem, next_state, urn).p_red
            if before > 1e-12:
                assert after > before
            else:
                assert after >= before
        state = next_state


@settings(max_examples=60, deadline=None)
@given(problem_and_state())
def test_queried_urn_has_fastest_probability_growth(case):
    # the red-draw probability of the queried urn grows at least as fast
    # as any other urn's between consecutive stages
    problem, state = case
    for urn in range(problem.n_urns):
        if problem.urns[urn].marbles - state.drawn[urn] < 2:
            continue
        next_state = state.after_draw(urn)
        if survival(problem, next_state) <= MIN_SURVIVAL:
            continue
        own_before = draw_distribution(problem, state, urn).p_red
        own_after = draw_distribution(problem, next_state, urn).p_red
        if own_before <= 1e-9:
            continue
        own_ratio = own_after / own_before
        for other in range(problem.n_urns):
            if other == urn or state.drawn[other] >= problem.urns[other].marbles:
                continue
            other_before = draw_distribution(problem, state, other).p_red
            other_after = draw_distribution(problem, next_state, other).p_red
            if other_before <= 1e-9:
                continue
            assert own_ratio >= other_after / other_before - 1e-9


@settings(max_examples=50, deadline=None)
@given(problem_and_walk())
def test_path_independence_of_posteriors(case):
    # two different orderings of the same draws reach the same state object,
    # hence bit-identical posteriors
    problem, seq = case
    forward = SearchState.fresh(problem)
    for urn in seq:
        forward = forward.after_draw(urn)
    backward = SearchState.fresh(problem)
    for urn in reversed(seq):
        backward = backward.after_draw(urn)
    assert forward == backward
    if survival(problem, forward) > MIN_SURVIVAL:
        for subset in range(1 << problem.n_urns):
            a = posterior(problem, forward, subset)
            b = posterior(problem, backward, subset)
            assert a == b


@settings(max_examples=50, deadline=None)
@given(problem_and_walk())
def test_survival_ratio_equals_blue_probability(case):
    problem, seq = case
    state = SearchState.fresh(problem)
    for urn in seq:
        s_here = survival(problem, state)
        if s_here <= MIN_SURVIVAL:
            break
        dist = draw_distribution(problem, state, urn)
        state = state.after_draw(urn)
        assert dist.p_blue == pytest.approx(survival(problem, state) / s_here, abs=1e-9)
