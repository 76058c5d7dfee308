"""Optimal-policy construction.

Sorted priority indices solve the independent and single-marble cases
outright; for arbitrary correlations an optimal block policy always exists,
so exhaustive block enumeration is exact there too. Full-policy enumeration
over every valid interleaving is kept as the oracle that certifies the
block-optimality claim empirically.
"""

import math
from collections.abc import Iterator
from dataclasses import dataclass
from itertools import permutations

from .errors import EnumerationCapError
from .model import PriorKind, Problem
from .policies import BlockPolicy, Policy, expected_cost

TIE_TOL = 1e-9
DEFAULT_BLOCK_ENUM_CAP = math.factorial(10)
DEFAULT_FULL_ENUM_CAP = 12_600


@dataclass(frozen=True)
class OptimizationResult:
    """An optimal policy, how it was found, and how many candidates tied."""

    best_policy: Policy
    best_block: BlockPolicy | None
    expected_cost: float
    method: str
    ties: int
    notes: tuple[str, ...] = ()


def _tie_classes(keys: list[float]) -> int:
    """Number of orderings equivalent to the sorted one: product of the
    factorials of equal-key group sizes (1e-9 absolute key tolerance)."""
    ties = 1
    run = 1
    for prev, cur in zip(keys, keys[1:]):
        same = (prev == cur) or abs(cur - prev) <= TIE_TOL
        run = run + 1 if same else 1
        if same:
            ties *= run
    return ties


def independence_index(problem: Problem, urn: int) -> float:
    """Priority index for independent priors; ascending order is optimal.

    Balances urn size against hit probability: N_i * (2 - phi_i) / phi_i.
    Undefined (infinite) when phi_i is 0.
    """
    p = problem.prior.marginals[urn]
    if p == 0.0:
        return math.inf
    return problem.urns[urn].marbles * (2.0 - p) / p


def single_marble_index(problem: Problem, urn: int) -> float:
    """Priority index for the single-marble case; descending order is
    optimal. Equals the first-draw red probability phi_i / N_i."""
    return problem.prior.marginals[urn] / problem.urns[urn].marbles


def _result_for_block(
    problem: Problem, order: tuple[int, ...], method: str, ties: int, notes: tuple[str, ...] = ()
) -> OptimizationResult:
    block = BlockPolicy(order)
    policy = block.expand(problem)
    cost = expected_cost(problem, policy).expected_cost
    return OptimizationResult(policy, block, cost, method, ties, notes)


def optimal_block_independent(problem: Problem) -> OptimizationResult:
    """Optimal block policy for an independent prior: urns sorted by
    ascending :func:`independence_index`, ties broken by urn index.

    Urns with zero prior probability have no defined index; they are placed
    last (ascending marble count among themselves) with a note, since
    drawing from them can never find the target.
    """
    if problem.prior.kind is not PriorKind.INDEPENDENT:
        raise ValueError("requires an independent prior")
    indexed = [(independence_index(problem, i), i) for i in range(problem.n_urns)]
    positive = sorted((ix, i) for ix, i in indexed if ix != math.inf)
    zeros = sorted((problem.urns[i].marbles, i) for ix, i in indexed if ix == math.inf)
    order = tuple(i for _, i in positive) + tuple(i for _, i in zeros)

    ties = _tie_classes([ix for ix, _ in positive]) * math.factorial(len(zeros))
    notes = ()
    if zeros:
        labels = ", ".join(problem.urns[i].id for _, i in zeros)
        notes = (f"urns with zero prior probability placed last: {labels}",)
    return _result_for_block(problem, order, "sorted-independent", ties, notes)


def optimal_block_single_marble(problem: Problem) -> OptimizationResult:
    """Optimal block policy for a single-marble prior: urns sorted by
    descending :func:`single_marble_index`, ties broken by urn index.
    Zero-probability urns have index 0 and naturally go last."""
    if problem.prior.kind is not PriorKind.SINGLE_MARBLE:
        raise ValueError("requires a single-marble prior")
    ranked = sorted((-single_marble_index(problem, i), i) for i in range(problem.n_urns))
    order = tuple(i for _, i in ranked)
    ties = _tie_classes([k for k, _ in ranked])
    return _result_for_block(problem, order, "sorted-single", ties)


def optimal_block_enum(problem: Problem, cap: int = DEFAULT_BLOCK_ENUM_CAP) -> OptimizationResult:
    """Exhaustively evaluate every block ordering and return the cheapest.

    Correct for every prior kind, because some block policy is always
    optimal. Returns the lexicographically smallest optimal ordering; ties
    counts orderings within 1e-9 of the optimum.
    """
    count = math.factorial(problem.n_urns)
    if count > cap:
        raise EnumerationCapError(
            f"{count} block orderings exceed the cap of {cap}", required=count, cap=cap
        )

    best_cost = math.inf
    for order in permutations(range(problem.n_urns)):
        cost = expected_cost(problem, BlockPolicy(order).expand(problem)).expected_cost
        if cost < best_cost:
            best_cost = cost

    ties = 0
    best_order: tuple[int, ...] | None = None
    for order in permutations(range(problem.n_urns)):
        cost = expected_cost(problem, BlockPolicy(order).expand(problem)).expected_cost
        if cost <= best_cost + TIE_TOL:
            ties += 1
            if best_order is None:
                best_order = order
    assert best_order is not None
    return _result_for_block(problem, best_order, "block-enum", ties)


def valid_policy_count(problem: Problem) -> int:
    """Number of distinct valid policies: multinomial N! / prod N_i!."""
    count = math.factorial(problem.total_marbles)
    for urn in problem.urns:
        count //= math.factorial(urn.marbles)
    return count


def iter_valid_policies(problem: Problem) -> Iterator[Policy]:
    """Yield every valid policy in lexicographic sequence order."""
    counts = [u.marbles for u in problem.urns]
    total = problem.total_marbles
    seq: list[int] = []

    def rec() -> Iterator[Policy]:
        if len(seq) == total:
            yield Policy(tuple(seq))
            return
        for u in range(len(counts)):
            if counts[u]:
                counts[u] -= 1
                seq.append(u)
                yield from rec()
                seq.pop()
                counts[u] += 1

    yield from rec()


def rank_policies(
    problem: Problem, cap: int = DEFAULT_FULL_ENUM_CAP
) -> list[tuple[Policy, float, bool]]:
    """Evaluate every valid policy; return (policy, cost, is_block) sorted by
    ascending cost, lexicographic sequence order within equal cost."""
    count = valid_policy_count(problem)
    if count > cap:
        raise EnumerationCapError(
            f"{count} valid policies exceed the cap of {cap}", required=count, cap=cap
        )
    ranked = [
        (policy, expected_cost(problem, policy).expected_cost, policy.is_block())
        for policy in iter_valid_policies(problem)
    ]
    ranked.sort(key=lambda item: (item[1], item[0].sequence))
    return ranked


def optimal_full_enum(problem: Problem, cap: int = DEFAULT_FULL_ENUM_CAP) -> OptimizationResult:
    """Brute-force oracle over every valid interleaved policy.

    Returns the lexicographically smallest optimal sequence. The optimal
    set must contain a block policy; ``best_block`` is the first one found
    within the tie tolerance (a note records the impossible case where none
    exists, rather than masking it).
    """
    ranked = rank_policies(problem, cap)
    best_policy, best_cost, _ = ranked[0]
    ties = 0
    best_block: BlockPolicy | None = None
    for policy, cost, is_block in ranked:
        if cost > best_cost + TIE_TOL:
            break
        ties += 1
        if is_block and best_block is None:
            best_block = _block_from_policy(policy)
    notes = () if best_block is not None else ("no block policy attains the optimum",)
    return OptimizationResult(best_policy, best_block, best_cost, "full-enum", ties, notes)


def _block_from_policy(policy: Policy) -> BlockPolicy:
    order: list[int] = []
    for u in policy.sequence:
        if not order or order[-1] != u:
            order.append(u)
    return BlockPolicy(tuple(order))


def optimize(problem: Problem, method: str = "auto", cap: int | None = None) -> OptimizationResult:
    """Dispatch on method name: ``auto`` picks the sorted index for the two
    solved kinds and block enumeration otherwise."""
    kind = problem.prior.kind
    if method == "auto":
        method = "sorted" if kind in (PriorKind.INDEPENDENT, PriorKind.SINGLE_MARBLE) else "block-enum"
    if method == "sorted":
        if kind is PriorKind.INDEPENDENT:
            return optimal_block_independent(problem)
        if kind is PriorKind.SINGLE_MARBLE:
            return optimal_block_single_marble(problem)
        raise ValueError("sorted method needs an independent or single-marble prior")
    if method == "block-enum":
        return optimal_block_enum(problem, cap if cap is not None else DEFAULT_BLOCK_ENUM_CAP)
    if method == "full-enum":
        return optimal_full_enum(problem, cap if cap is not None else DEFAULT_FULL_ENUM_CAP)
    raise ValueError(f"unknown method {method!r}")
