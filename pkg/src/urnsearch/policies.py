"""Policies and their exact expected-cost evaluation.

A valid policy is a length-N draw sequence that uses each urn exactly as
many times as it has marbles. A block policy exhausts each urn before
moving on and is just an urn ordering.
"""

import math
from collections import Counter
from dataclasses import dataclass

from .dynamics import SearchState, survival
from .errors import InvalidPolicyError
from .model import VALIDATION_EPS, PriorKind, Problem


@dataclass(frozen=True)
class Policy:
    """A full draw sequence: urn index per stage."""

    sequence: tuple[int, ...]

    def validate_for(self, problem: Problem) -> None:
        counts = Counter(self.sequence)
        for i, urn in enumerate(problem.urns):
            if counts.get(i, 0) != urn.marbles:
                raise InvalidPolicyError(
                    f"policy draws urn {urn.id!r} {counts.get(i, 0)} times, needs exactly {urn.marbles}"
                )
        for i in counts:
            if i < 0 or i >= problem.n_urns:
                raise InvalidPolicyError(f"policy references urn index {i} outside the problem")

    def is_block(self) -> bool:
        """True when no urn reappears after a different urn intervened."""
        seen: set[int] = set()
        prev: int | None = None
        for u in self.sequence:
            if u != prev:
                if u in seen:
                    return False
                seen.add(u)
                prev = u
        return True


@dataclass(frozen=True)
class BlockPolicy:
    """An urn ordering; expansion queries each urn exhaustively in turn."""

    order: tuple[int, ...]

    def validate_for(self, problem: Problem) -> None:
        if sorted(self.order) != list(range(problem.n_urns)):
            raise InvalidPolicyError(
                f"block order {self.order} is not a permutation of all {problem.n_urns} urns"
            )

    def expand(self, problem: Problem) -> Policy:
        self.validate_for(problem)
        seq: list[int] = []
        for u in self.order:
            seq.extend([u] * problem.urns[u].marbles)
        return Policy(tuple(seq))


@dataclass(frozen=True)
class CostReport:
    """Expected cost of a policy plus its per-stage diagnostics.

    ``survival_curve[k]`` is the probability of completing k+1 draws without
    a red marble; the expected number of blue draws is its sum.
    ``stage_red_probs[t]`` is the red probability of the stage-t draw;
    stages from ``dead_from`` on are unreachable (survival already 0) and
    report 0 there.
    """

    expected_cost: float
    survival_curve: tuple[float, ...]
    stage_red_probs: tuple[float, ...]
    dead_from: int | None = None


def parse_policy_text(problem: Problem, text: str, full: bool = False) -> Policy:
    """Parse comma-separated urn ids: a block ordering by default, a full
    draw sequence when ``full`` is set."""
    labels = [part.strip() for part in text.split(",") if part.strip()]
    if not labels:
        raise InvalidPolicyError("empty policy text")
    try:
        indices = tuple(problem.index_of(label) for label in labels)
    except Exception as exc:
        raise InvalidPolicyError(str(exc)) from None
    if full:
        policy = Policy(indices)
        policy.validate_for(problem)
        return policy
    block = BlockPolicy(indices)
    return block.expand(problem)


def policy_text(problem: Problem, sequence: tuple[int, ...]) -> str:
    return ",".join(problem.urns[i].id for i in sequence)


def expected_cost(problem: Problem, policy: Policy) -> CostReport:
    """Exact expected number of blue draws for ``policy``, with the survival
    curve and per-stage red probabilities.

    Survival is evaluated directly at every stage (numerically stabler than
    telescoping one-draw ratios); the stage red probabilities are then
    recovered from successive survival ratios.
    """
    policy.validate_for(problem)
    curve: list[float] = []
    red_probs: list[float] = []
    dead_from: int | None = None

    state = SearchState.fresh(problem)
    s_prev = 1.0
    for t, urn in enumerate(policy.sequence):
        state = state.after_draw(urn)
        s = survival(problem, state)
        curve.append(s)
        if s_prev <= VALIDATION_EPS:
            if dead_from is None:
                dead_from = t
            red_probs.append(0.0)
        else:
            # ratio can exceed 1 by rounding noise only
            red_probs.append(min(1.0, max(0.0, 1.0 - s / s_prev)))
        s_prev = s

    return CostReport(math.fsum(curve), tuple(curve), tuple(red_probs), dead_from)


def block_cost_independent(problem: Problem, block: BlockPolicy) -> float:
    """Closed-form block-policy cost for independent priors.

    Urn i in query order contributes (N_i - (N_i+1)*phi_i/2) times the
    probability that every earlier urn came up empty.
    """
    if problem.prior.kind is not PriorKind.INDEPENDENT:
        raise ValueError("closed form requires an independent prior")
    block.validate_for(problem)
    contributions = []
    prefix = 1.0
    for u in block.order:
        n = problem.urns[u].marbles
        p = problem.prior.marginals[u]
        contributions.append((n - (n + 1) * p / 2.0) * prefix)
        prefix *= 1.0 - p
    return math.fsum(contributions)


def block_cost_single_marble(problem: Problem, block: BlockPolicy) -> float:
    """Closed-form block-policy cost when at most one red marble exists.

    Urn i contributes N_i - (N_i+1)*phi_i/2 minus N_i times the total prior
    mass of the urns queried before it.
    """
    if problem.prior.kind is not PriorKind.SINGLE_MARBLE:
        raise ValueError("closed form requires a single-marble prior")
    block.validate_for(problem)
    contributions = []
    prefix = 0.0
    for u in block.order:
        n = problem.urns[u].marbles
        p = problem.prior.marginals[u]
        contributions.append(n - (n + 1) * p / 2.0 - n * prefix)
        prefix += p
    return math.fsum(contributions)
