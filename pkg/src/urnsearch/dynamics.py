"""Exact probability evolution during a search.

Every quantity here is a pure function of the immutable problem and a state
of per-urn drawn counts; the order in which past draws happened never
matters. Conditioning on a state always means "this state was reached
without drawing a red marble".
"""

import math
from dataclasses import dataclass

from .errors import ExhaustedUrnError, ImpossibleStateError
from .model import (
    VALIDATION_EPS,
    PriorKind,
    Problem,
    iter_bits,
    iter_submasks,
)

# Derived probabilities may stray out of [0, 1] by cancellation noise; beyond
# this much is a genuine bug and raises.
RANGE_TOL = 1e-9


@dataclass(frozen=True)
class SearchState:
    """Per-urn counts of marbles already drawn; the sufficient statistic."""

    drawn: tuple[int, ...]

    @classmethod
    def fresh(cls, problem: Problem) -> "SearchState":
        return cls((0,) * problem.n_urns)

    @property
    def stage(self) -> int:
        return sum(self.drawn)

    def after_draw(self, urn: int) -> "SearchState":
        counts = list(self.drawn)
        counts[urn] += 1
        return SearchState(tuple(counts))


@dataclass(frozen=True)
class DrawDistribution:
    """Outcome distribution of one draw: red ends the search, blue continues."""

    p_red: float
    p_blue: float


def _check_state(problem: Problem, state: SearchState) -> None:
    if len(state.drawn) != problem.n_urns:
        raise ValueError(f"state has {len(state.drawn)} counts for {problem.n_urns} urns")
    for count, urn in zip(state.drawn, problem.urns):
        if count < 0 or count > urn.marbles:
            raise ValueError(f"drawn count {count} out of range for urn {urn.id!r} ({urn.marbles} marbles)")


def _clamp(p: float, what: str) -> float:
    if p < -RANGE_TOL or p > 1.0 + RANGE_TOL:
        raise ArithmeticError(f"{what} out of [0, 1] beyond tolerance: {p!r}")
    return min(1.0, max(0.0, p))


def survival(problem: Problem, state: SearchState) -> float:
    """Probability of reaching ``state`` without having drawn a red marble.

    Alternating sum over urn subsets S of phi_S times the drawn fractions
    x_i/N_i for i in S; only urns with draws contribute, so the sum runs
    over submasks of the drawn set.
    """
    _check_state(problem, state)
    phi = problem.phi_table()
    drawn_mask = 0
    fractions = [0.0] * problem.n_urns
    for i, (count, urn) in enumerate(zip(state.drawn, problem.urns)):
        if count:
            drawn_mask |= 1 << i
            fractions[i] = count / urn.marbles

    terms = []
    for mask in iter_submasks(drawn_mask):
        term = phi[mask]
        if term == 0.0:
            continue
        for i in iter_bits(mask):
            term *= fractions[i]
        terms.append(-term if mask.bit_count() & 1 else term)
    return _clamp(math.fsum(terms), "survival")


def posterior(problem: Problem, state: SearchState, subset: int) -> float:
    """Probability that every urn in ``subset`` holds a red marble, given the
    state was reached with no red drawn.

    Ratio of two alternating subset sums; the denominator is exactly
    :func:`survival`, so conditioning on a state that cannot be reached
    red-free raises :class:`ImpossibleStateError`. Depends only on the
    drawn counts, never on the order of past draws.
    """
    _check_state(problem, state)
    if subset < 0 or subset > problem.full_mask:
        raise ValueError(f"subset mask {subset:#x} references urns outside the problem")

    denom = survival(problem, state)
    if denom <= VALIDATION_EPS:
        raise ImpossibleStateError(
            f"state {state.drawn} is unreachable without a red draw (survival {denom:.3g})"
        )

    phi = problem.phi_table()
    undrawn_factor = 1.0
    for i in iter_bits(subset):
        undrawn_factor *= 1.0 - state.drawn[i] / problem.urns[i].marbles
    if undrawn_factor == 0.0:
        return 0.0

    rest = 0
    fractions = [0.0] * problem.n_urns
    for i in range(problem.n_urns):
        if state.drawn[i] and not subset >> i & 1:
            rest |= 1 << i
            fractions[i] = state.drawn[i] / problem.urns[i].marbles

    terms = []
    for extra in iter_submasks(rest):
        term = phi[subset | extra]
        if term == 0.0:
            continue
        for i in iter_bits(extra):
            term *= fractions[i]
        terms.append(-term if extra.bit_count() & 1 else term)
    return _clamp(undrawn_factor * math.fsum(terms) / denom, "posterior")


def draw_distribution(problem: Problem, state: SearchState, urn: int) -> DrawDistribution:
    """Distribution of the next draw's color when drawing from ``urn``.

    p_red spreads the urn's posterior uniformly over its remaining marbles.
    """
    _check_state(problem, state)
    remaining = problem.urns[urn].marbles - state.drawn[urn]
    if remaining <= 0:
        raise ExhaustedUrnError(f"urn {problem.urns[urn].id!r} has no marbles left")
    p_red = _clamp(posterior(problem, state, 1 << urn) / remaining, "draw probability")
    return DrawDistribution(p_red, 1.0 - p_red)


def posterior_independent(problem: Problem, state: SearchState, urn: int) -> float:
    """Closed-form marginal posterior for independent priors.

        phi_i * (1 - x_i/N_i) / (1 - phi_i * x_i/N_i)

    Other urns' counts cannot matter: independence is preserved by every
    update. Used as a fast path and as a cross-check of :func:`posterior`.
    """
    if problem.prior.kind is not PriorKind.INDEPENDENT:
        raise ValueError("closed form requires an independent prior")
    _check_state(problem, state)
    p = problem.prior.marginals[urn]
    frac = state.drawn[urn] / problem.urns[urn].marbles
    denom = 1.0 - p * frac
    if denom <= VALIDATION_EPS:
        raise ImpossibleStateError(
            f"urn {problem.urns[urn].id!r} fully drawn with certain red marble: impossible blue-only history"
        )
    return _clamp(p * (1.0 - frac) / denom, "posterior")


def posterior_single_marble(problem: Problem, state: SearchState, urn: int) -> float:
    """Closed-form marginal posterior when at most one red marble exists.

        phi_i * (1 - x_i/N_i) / (1 - sum_j phi_j * x_j/N_j)

    The denominator is the survival probability of the whole state.
    """
    if problem.prior.kind is not PriorKind.SINGLE_MARBLE:
        raise ValueError("closed form requires a single-marble prior")
    _check_state(problem, state)
    removed = math.fsum(
        p * count / u.marbles
        for p, count, u in zip(problem.prior.marginals, state.drawn, problem.urns)
    )
    denom = 1.0 - removed
    if denom <= VALIDATION_EPS:
        raise ImpossibleStateError(f"state {state.drawn} is unreachable without a red draw")
    p = problem.prior.marginals[urn]
    frac = state.drawn[urn] / problem.urns[urn].marbles
    return _clamp(p * (1.0 - frac) / denom, "posterior")
